"""Stationary radial solutions U(r) = z(r)/r of -ΔU = ζ|U|^{p-1}U.

Since (rU)'' = rΔU, the reduced function obeys

    z''(r) = -ζ |z|^{p-1} z / r^{p-1},   z(+inf) = 1,  z'(+inf) = 0.

Sign convention: the defocusing display z'' = |z|^{p-1}z/r^{p-1} is the
ζ = -1 instance of this equation.

The profile is seeded at a large radius with the first-order asymptotic
correction and integrated backwards in s = log r. In the defocusing case z
is increasing and convex towards the origin and blows up at a finite radius
R_-; once z passes ``z_switch`` the integration continues with log z as the
independent variable, in which the blow-up is regular, and the radius
converges to R_-.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass

import numpy as np

from .core import Grid1D, ModelParams, derive_params
from .rk import IntegrationError, hermite, integrate


@dataclass(frozen=True)
class StationaryConfig:
    R_inf: float = 1e4
    r_min: float = 1e-3
    rtol: float = 1e-10
    atol: float = 1e-12
    Z_max: float = 1e12
    r_tol: float = 1e-8
    n_nodes: int = 16_000
    z_switch: float = 2.0
    n_blowup_nodes: int = 4000


@dataclass(frozen=True)
class StationaryProfile:
    params: ModelParams
    r_nodes: Grid1D
    z: np.ndarray
    z_prime: np.ndarray
    R_inf: float
    R_minus: tuple[float, float] | None
    n_log: int  # the first n_log nodes (from the top) are log-uniform
    blowup_segments: tuple = ()  # (sigma, r, q) arrays on uniform log z grids

    @property
    def r(self) -> np.ndarray:
        return self.r_nodes.nodes

    @property
    def U(self) -> np.ndarray:
        return self.z / self.r

    def log_uniform_slice(self) -> slice:
        return slice(self.r.size - self.n_log, self.r.size)

    def z_at(self, r):
        """Hermite interpolation of z; beyond R_inf the asymptotic seed form."""
        rq = np.asarray(r, dtype=float)
        out = np.empty(np.shape(rq))
        out = np.atleast_1d(out)
        rr = np.atleast_1d(rq)
        inside = rr <= self.R_inf
        if np.any(rr < self.r[0] * (1.0 - 1e-12)):
            raise ValueError(f"radius below the stored grid (r_min={self.r[0]:.6g})")
        rr = np.maximum(rr, self.r[0])
        if np.any(inside):
            out[inside] = hermite(self.r, self.z, self.z_prime, rr[inside])
        if np.any(~inside):
            out[~inside] = asymptotic_z(rr[~inside], self.params)
        return out if np.ndim(rq) else float(out[0])


def asymptotic_z(r, params: ModelParams):
    """First-order expansion z ≈ 1 - ζ r^{-(p-3)}/((p-2)(p-3)) at large r."""
    p = params.p
    return 1.0 - params.zeta * np.asarray(r, dtype=float) ** (3.0 - p) / ((p - 2.0) * (p - 3.0))


def asymptotic_z_prime(r, params: ModelParams):
    p = params.p
    return params.zeta * np.asarray(r, dtype=float) ** (2.0 - p) / (p - 2.0)


def _rhs_log(params: ModelParams):
    zeta, pm1, e = params.zeta, params.p - 1.0, 3.0 - params.p
    exp = math.exp

    # (z, v = r z') in s = log r
    def rhs(s, z, v):
        return v, v - zeta * abs(z) ** pm1 * z * exp(e * s)

    return rhs


def _rhs_blowup(params: ModelParams):
    p = params.p
    k = 0.5 * (p + 1.0)
    e = 0.5 * (1.0 - p)
    exp = math.exp

    # (r, q = z' z^{-(p+1)/2}) in sigma = log z, defocusing branch only
    def rhs(sigma, r, q):
        return exp(e * sigma) / q, 1.0 / (r ** (p - 1.0) * q) - k * q

    return rhs


def solve_stationary(zeta: int, params: ModelParams | float, cfg: StationaryConfig | None = None) -> StationaryProfile:
    """Backward integration of the stationary profile from ``cfg.R_inf``."""
    cfg = cfg or StationaryConfig()
    if not isinstance(params, ModelParams):
        params = derive_params(params, zeta)
    elif params.zeta != zeta:
        params = derive_params(params.p, zeta)
    if not (cfg.R_inf > 1.0 and 0.0 < cfg.r_min < 1.0):
        raise ValueError("need R_inf > 1 and 0 < r_min < 1")
    s0, s1 = math.log(cfg.R_inf), math.log(cfg.r_min)
    z0 = float(asymptotic_z(cfg.R_inf, params))
    v0 = cfg.R_inf * float(asymptotic_z_prime(cfg.R_inf, params))
    s_eval = np.linspace(s0, s1, cfg.n_nodes)
    zmax = cfg.Z_max if params.focusing else min(cfg.z_switch, cfg.Z_max)
    res = integrate(
        _rhs_log(params),
        s0,
        (z0, v0),
        s1,
        rtol=cfg.rtol,
        atol=cfg.atol,
        t_eval=s_eval,
        stop=lambda s, z, v: abs(z) >= zmax,
    )
    r = np.exp(res.t)
    r[0] = cfg.R_inf  # exp(log(R_inf)) can be off by an ulp
    z = res.y[0]
    zp = res.y[1] / r
    n_log = int(np.searchsorted(-s_eval, -res.t[-1], side="right"))
    n_log = min(n_log, r.size)
    if params.focusing:
        if res.stopped:
            raise IntegrationError(f"focusing profile exceeded Z_max at r={r[-1]:.6g}")
        R_minus = None
        segments = ()
    else:
        if not res.stopped:
            raise IntegrationError(
                f"defocusing profile reached r_min={cfg.r_min} without blowing up; lower r_min or Z_max"
            )
        segments, R_minus = _blowup_tail(params, cfg, r[-1], z[-1], zp[-1])
        k = 0.5 * (params.p + 1.0)
        r_b = np.concatenate([seg[1] for seg in segments])
        z_b = np.exp(np.concatenate([seg[0] for seg in segments]))
        zp_b = np.concatenate([seg[2] for seg in segments]) * z_b**k
        keep = r_b < r[-1]
        r = np.concatenate([r, r_b[keep]])
        z = np.concatenate([z, z_b[keep]])
        zp = np.concatenate([zp, zp_b[keep]])
    # store increasing in r and drop unresolvable duplicates near the blow-up
    order = np.argsort(r, kind="stable")
    r, z, zp = r[order], z[order], zp[order]
    uniq = np.concatenate([[True], np.diff(r) > 0])
    r, z, zp = r[uniq], z[uniq], zp[uniq]
    return StationaryProfile(
        params=params,
        r_nodes=Grid1D(r, "logarithmic" if params.focusing else "adaptive"),
        z=z,
        z_prime=zp,
        R_inf=cfg.R_inf,
        R_minus=R_minus,
        n_log=n_log,
        blowup_segments=tuple(segments),
    )


def _blowup_tail(params, cfg, r0, z0, zp0):
    """Continue the defocusing profile in log z until the blow-up radius is bracketed."""
    k = 0.5 * (params.p + 1.0)
    sig0 = math.log(z0)
    q0 = zp0 * z0**-k
    sig_end = math.log(cfg.Z_max)
    rhs = _rhs_blowup(params)
    segments = []
    sig, r, q = sig0, r0, q0
    for _ in range(8):
        sig_eval = np.linspace(sig, sig_end, cfg.n_blowup_nodes)
        res = integrate(rhs, sig, (r, q), sig_end, rtol=cfg.rtol, atol=0.0, t_eval=sig_eval)
        sig, r, q = float(res.t[-1]), float(res.y[0, -1]), float(res.y[1, -1])
        segments.append((res.t, res.y[0], res.y[1]))
        # remaining radial travel: int_sig^inf e^{(1-k)s}/|q| ds, |q| nearly frozen
        tail = math.exp((1.0 - k) * sig) / (abs(q) * (k - 1.0))
        lo, hi = r - 2.0 * tail, r
        if hi - lo <= cfg.r_tol * hi:
            break
        sig_end = sig + 4.0 * math.log(10.0)
    else:
        raise IntegrationError("could not bracket the blow-up radius to the requested width")
    return segments, (lo, hi)


@dataclass(frozen=True)
class LadderCoefficients:
    k: int
    beta_k: float
    log_c_k: float
    c_k: float | None  # None once c_k is reported only through its logarithm
    beta_closed_form: float


def ladder(k_max: int, params: ModelParams | float) -> list[LadderCoefficients]:
    """Lower-bound ladder z(r) >= r^{-beta_k}/c_k of the defocusing profile.

    beta_{k+1} = p beta_k + p - 3,
    c_{k+1} = (p beta_k + p - 3)(p beta_k + p - 2) c_k^p,   (beta_0, c_0) = (0, 1).

    c_k grows doubly exponentially, so beyond k = 6 only log c_k is reported.
    """
    if not isinstance(params, ModelParams):
        params = derive_params(params, -1)
    if not (0 <= int(k_max) <= 12):
        raise ValueError("k_max must lie in [0, 12]")
    p = params.p
    # exponents in exact rationals: p - 3 cancels badly in floats near p = 3
    pf = Fraction(p)
    out = []
    beta_exact, log_c = Fraction(0), 0.0
    for k in range(int(k_max) + 1):
        beta_k = float(beta_exact)
        closed = float((pf - 3) * (pf**k - 1) / (pf - 1))
        c_val = None
        if k <= 6 and log_c < math.log(np.finfo(float).max):
            c_val = math.exp(log_c)
        out.append(LadderCoefficients(k, beta_k, log_c, c_val, closed))
        a1 = pf * beta_exact + pf - 3
        log_c = p * log_c + math.log(a1) + math.log(a1 + 1)
        beta_exact = a1
    return out


@dataclass(frozen=True)
class LadderCheck:
    k: int
    min_margin: float
    min_relative_margin: float


def check_ladder_bounds(profile: StationaryProfile, k_max: int) -> list[LadderCheck]:
    """Worst margin z(r) - r^{-beta_k}/c_k over nodes r < 1, per rung."""
    if profile.params.zeta != -1:
        raise ValueError("ladder bounds apply to the defocusing profile only")
    mask = profile.r < 1.0
    r, z = profile.r[mask], profile.z[mask]
    checks = []
    for rung in ladder(k_max, profile.params):
        bound = np.exp(-rung.beta_k * np.log(r) - rung.log_c_k)
        margin = z - bound
        checks.append(
            LadderCheck(
                rung.k,
                float(np.min(margin)) if margin.size else 0.0,
                float(np.min(margin / z)) if margin.size else 0.0,
            )
        )
    return checks


def evaluate_rescaled(profile: StationaryProfile, C: float, x):
    """U_C(x) = sgn(C)|C|^{-2/(p-3)} U(x / |C|^{(p-1)/(p-3)}), U = z/r; zero for C = 0."""
    p = profile.params.p
    xq = np.asarray(x, dtype=float)
    if np.any(xq <= 0):
        raise ValueError("radius must be positive")
    if C == 0:
        return np.zeros_like(xq) if np.ndim(xq) else 0.0
    scale = abs(C) ** ((p - 1.0) / (p - 3.0))
    if profile.R_minus is not None and np.any(xq <= scale * profile.R_minus[1]):
        raise ValueError(
            f"evaluation inside the rescaled blow-up radius {scale * profile.R_minus[1]:.6g}"
        )
    y = xq / scale
    U = profile.z_at(y) / y
    return math.copysign(1.0, C) * abs(C) ** (-2.0 / (p - 3.0)) * U


def rescaled_derivative(profile: StationaryProfile, C: float, x):
    """d/dx U_C(x), from z' by the chain rule."""
    p = profile.params.p
    xq = np.asarray(x, dtype=float)
    if C == 0:
        return np.zeros_like(xq)
    scale = abs(C) ** ((p - 1.0) / (p - 3.0))
    y = xq / scale
    inside = y <= profile.R_inf
    zp = np.where(inside, hermite(profile.r, profile.z_prime, _z_second(profile), np.minimum(y, profile.R_inf)),
                  asymptotic_z_prime(y, profile.params))
    z = profile.z_at(y)
    dU = (zp * y - z) / y**2
    return math.copysign(1.0, C) * abs(C) ** (-2.0 / (p - 3.0)) * dU / scale


def _z_second(profile: StationaryProfile) -> np.ndarray:
    pr = profile.params
    return -pr.zeta * np.abs(profile.z) ** (pr.p - 1) * profile.z / profile.r ** (pr.p - 1)


def _d1(y, h):
    return (-y[4:] + 8 * y[3:-1] - 8 * y[1:-3] + y[:-4]) / (12 * h)


def _d2(y, h):
    return (-y[4:] + 16 * y[3:-1] - 30 * y[2:-2] + 16 * y[1:-3] - y[:-4]) / (12 * h * h)


def ode_residual(profile: StationaryProfile) -> np.ndarray:
    """ODE residual of the stored profile from five-point finite differences.

    On the log-uniform segment (s = log r) the returned quantity is

        |z_ss - z_s + ζ|z|^{p-1} z r^{3-p}| / (1 + |z|^p) / max(1, r^2),

    i.e. |z'' + ζ|z|^{p-1}z/r^{p-1}| / (1 + |z|^p) scaled by min(r^2, 1):
    below r = 1 roundoff in z'' grows like 1/r^2. On the defocusing blow-up
    segments (uniform in log z) z'' is rebuilt as (dz'/dsigma)/(dr/dsigma).
    """
    pr = profile.params
    sl = profile.log_uniform_slice()
    out = [np.empty(0)]
    r, z = profile.r[sl], profile.z[sl]
    if r.size >= 5:
        s = np.log(r)
        h = (s[-1] - s[0]) / (s.size - 1)
        rm, zm = r[2:-2], z[2:-2]
        res = np.abs(_d2(z, h) - _d1(z, h) + pr.zeta * np.abs(zm) ** (pr.p - 1) * zm * rm ** (3.0 - pr.p))
        out.append(res / (1.0 + np.abs(zm) ** pr.p) / np.maximum(1.0, rm**2))
    k = 0.5 * (pr.p + 1.0)
    for sig, rs, q in profile.blowup_segments:
        if sig.size < 5:
            continue
        hs = (sig[-1] - sig[0]) / (sig.size - 1)
        zs = np.exp(sig)
        # z'' = (d z'/d sigma) / (dr/d sigma); dr/d sigma is exact from q
        dr = np.exp(sig * (1.0 - pr.p) / 2.0) / q
        zpp = _d1(q * zs**k, hs) / dr[2:-2]
        zc, rc = zs[2:-2], rs[2:-2]
        res = np.abs(zpp + pr.zeta * zc**pr.p / rc ** (pr.p - 1))
        out.append(res / (1.0 + zc**pr.p) / np.maximum(1.0, rc**2))
    return np.concatenate(out)


def singular_steady_state(r, params: ModelParams):
    """z_s(r) = c_p r^{1-beta}, the reduced focusing singular solution."""
    return params.c_p * np.asarray(r, dtype=float) ** (1.0 - params.beta)


def singular_steady_state_residual(r, params: ModelParams) -> np.ndarray:
    """Relative residual of z_s'' = -z_s^p / r^{p-1} using the exact derivative.

    z_s'' = c_p (1-beta)(-beta) r^{-1-beta}, so the residual vanishes iff
    c_p^{p-1} = beta(1-beta).
    """
    r = np.asarray(r, dtype=float)
    b = params.beta
    zss = params.c_p * (1.0 - b) * (-b) * r ** (-1.0 - b)
    rhs = -singular_steady_state(r, params) ** params.p / r ** (params.p - 1.0)
    return np.abs(zss - rhs) / np.abs(rhs)


def stationary_sidecar(profile: StationaryProfile) -> dict:
    lo, hi = profile.R_minus if profile.R_minus is not None else (None, None)
    return {
        "p": profile.params.p,
        "zeta": profile.params.zeta,
        "R_inf": profile.R_inf,
        "R_minus_lo": lo,
        "R_minus_hi": hi,
    }
