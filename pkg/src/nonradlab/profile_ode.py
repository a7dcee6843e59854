"""Self-similar profiles u(r, t) = r^{-beta} f(t/r) of the defocusing equation.

The profile solves

    (1 - x^2) f'' - 2 beta x f' + gamma f + |f|^{p-1} f = 0,   f(0) = 0, f'(0) = a,

on (-1, 1). Near x = 1 the derivative grows like (1 - x^2)^{-beta}, so the
solver integrates the pair (f, g) with g = (1 - x^2)^beta f', which obeys

    f' = g (1 - x^2)^{-beta},   g' = -(1 - x^2)^{beta - 1} P'(f),
    P(y) = gamma y^2 / 2 + |y|^{p+1} / (p + 1),

in the stretched variable xi = -log(1 - x). Both right-hand sides decay
exponentially in xi, and g tends to the endpoint constant G.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Grid1D, ModelParams, derive_params
from .rk import hermite, integrate


@dataclass(frozen=True)
class ProfileConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    delta: float = 1e-8
    max_nodes: int = 40_000
    a_tol: float = 1e-12  # relative bisection width in a
    g_tol: float | None = None  # default 1e-8 * (1 + a^p)
    h_max: float | None = None  # largest step in xi = -log(1 - x); bounds the interpolation error


@dataclass(frozen=True)
class ProfileSolution:
    a: float
    params: ModelParams
    x_nodes: Grid1D
    one_minus_x: np.ndarray
    f: np.ndarray
    f_prime: np.ndarray
    g: np.ndarray  # (1 - x^2)^beta f'
    dg: np.ndarray  # dg/dx
    G: float
    f1: float
    N_extrema: int
    delta: float
    extrema: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def x(self) -> np.ndarray:
        return self.x_nodes.nodes

    def f_second(self) -> np.ndarray:
        """f'' recovered from the ODE at every node."""
        pr = self.params
        x = self.x
        omx2 = self.one_minus_x * (1.0 + x)
        return (2 * pr.beta * x * self.f_prime - potential_prime(self.f, pr)) / omx2

    def evaluate(self, x):
        """Return (f(x), f'(x)) for |x| <= 1 - delta, odd extension for x < 0."""
        xq = np.asarray(x, dtype=float)
        ax = np.abs(xq)
        if np.any(ax > self.x[-1] * (1 + 1e-15)):
            raise ValueError("evaluation point outside [-(1-delta), 1-delta]")
        sgn = np.sign(xq)
        fx = hermite(self.x, self.f, self.f_prime, ax)
        fpx = hermite(self.x, self.f_prime, self.f_second(), ax)
        return sgn * fx, fpx

    def Q(self) -> np.ndarray:
        """Upper semi-conserved quantity ½(1-x²)^{2β}f'² + (1-x²)^{2β-1}P(f)."""
        pr = self.params
        omx2 = self.one_minus_x * (1.0 + self.x)
        return 0.5 * self.g**2 + omx2 ** (2 * pr.beta - 1) * potential(self.f, pr)

    def lower_quantity(self) -> np.ndarray:
        """½(1-x²)f'² + P(f), bounded below by a²/2."""
        omx2 = self.one_minus_x * (1.0 + self.x)
        return 0.5 * omx2 * self.f_prime**2 + potential(self.f, self.params)


def potential(y, params: ModelParams):
    y = np.asarray(y, dtype=float)
    return 0.5 * params.gamma * y**2 + np.abs(y) ** (params.p + 1) / (params.p + 1)


def potential_prime(y, params: ModelParams):
    y = np.asarray(y, dtype=float)
    return params.gamma * y + np.abs(y) ** (params.p - 1) * y


def uniform_bound_constant(params: ModelParams) -> float:
    """K(p) with |f(x)| <= K |a| on [0, 1]: integrate |f'| <= |a|(1-x)^{-beta}."""
    return 1.0 / (1.0 - params.beta)


def _check_params(params: ModelParams) -> None:
    if params.zeta != -1:
        raise ValueError("self-similar profiles are built for the defocusing equation (zeta=-1)")


def _rhs_factory(params: ModelParams):
    beta, gamma, pm1 = params.beta, params.gamma, params.p - 1.0
    e_f = 1.0 - beta
    exp = math.exp

    def rhs(xi, f, g):
        m = exp(-xi)
        w = 2.0 - m
        return (
            g * w**-beta * m**e_f,
            -(w ** (beta - 1.0)) * m**beta * (gamma * f + abs(f) ** pm1 * f),
        )

    return rhs


def solve_profile(a: float, params: ModelParams | float = 4.0, cfg: ProfileConfig | None = None) -> ProfileSolution:
    """Integrate the profile equation from x = 0 to x = 1 - delta."""
    if not isinstance(params, ModelParams):
        params = derive_params(params, -1)
    _check_params(params)
    cfg = cfg or ProfileConfig()
    if not (0.0 < cfg.delta < 0.5):
        raise ValueError("endpoint margin delta must lie in (0, 0.5)")
    a = float(a)
    if not math.isfinite(a):
        raise ValueError("shooting parameter must be finite")
    xi_end = -math.log(cfg.delta)
    if a == 0.0:
        xi = np.linspace(0.0, xi_end, 64)
        zeros = np.zeros_like(xi)
        return _assemble(a, params, cfg, xi, zeros, zeros, zeros, zeros)
    res = integrate(_rhs_factory(params), 0.0, (0.0, a), xi_end, rtol=cfg.rtol, atol=cfg.atol, h_max=cfg.h_max)
    if res.t.size > cfg.max_nodes:
        # thin to the node budget while keeping both endpoints
        keep = np.unique(np.linspace(0, res.t.size - 1, cfg.max_nodes).round().astype(int))
        xi, f, g, dfxi, dgxi = res.t[keep], res.y[0, keep], res.y[1, keep], res.dy[0, keep], res.dy[1, keep]
    else:
        xi, f, g, dfxi, dgxi = res.t, res.y[0], res.y[1], res.dy[0], res.dy[1]
    return _assemble(a, params, cfg, xi, f, g, dfxi, dgxi)


def _assemble(a, params, cfg, xi, f, g, dfxi, dgxi) -> ProfileSolution:
    beta = params.beta
    m = np.exp(-xi)
    x = 1.0 - m
    omx2 = m * (2.0 - m)
    f_prime = g * omx2**-beta
    dg = dgxi / m  # d/dx = e^{xi} d/dxi
    f1 = float(f[-1])
    G = float(g[-1] - omx2[-1] ** beta * potential_prime(f1, params) / (2 * beta))
    extrema = _locate_sign_changes(xi, g, dgxi)
    return ProfileSolution(
        a=a,
        params=params,
        x_nodes=Grid1D(x, "adaptive"),
        one_minus_x=m,
        f=np.asarray(f, dtype=float),
        f_prime=f_prime,
        g=np.asarray(g, dtype=float),
        dg=dg,
        G=G,
        f1=f1,
        N_extrema=int(extrema.size),
        delta=cfg.delta,
        extrema=extrema,
    )


def _locate_sign_changes(xi, g, dgxi) -> np.ndarray:
    """Zeros of g (equivalently f') on interior nodes, refined by bisection."""
    s = np.sign(g)
    idx = np.nonzero(s[1:-1] * s[2:] < 0)[0] + 1
    # exact zeros at interior nodes count only where g changes sign across them
    zero_nodes = np.nonzero((s[1:-1] == 0) & (s[:-2] * s[2:] < 0))[0] + 1
    roots = []
    for i in idx:
        lo, hi = xi[i], xi[i + 1]
        glo = g[i]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            gm = hermite(xi[i : i + 2], g[i : i + 2], dgxi[i : i + 2], mid)
            if gm == 0.0:
                lo = hi = mid
                break
            if np.sign(gm) == np.sign(glo):
                lo, glo = mid, gm
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    roots.extend(xi[zero_nodes])
    return 1.0 - np.exp(-np.sort(np.array(roots, dtype=float)))


def conservation_report(sol: ProfileSolution) -> tuple[float, float]:
    """(max increase of Q between consecutive nodes, min of lower quantity - a²/2)."""
    if sol.a == 0.0 and not np.any(sol.f):
        return 0.0, 0.0
    q = sol.Q()
    max_up = float(np.max(np.diff(q))) if q.size > 1 else 0.0
    low = sol.lower_quantity() - 0.5 * sol.a**2
    return max_up, float(np.min(low))


def count_extrema(sol: ProfileSolution) -> int:
    """Number of isolated zeros of f' on (0, 1 - delta)."""
    return sol.N_extrema


def g_tolerance(a: float, params: ModelParams, cfg: ProfileConfig) -> float:
    if cfg.g_tol is not None:
        return cfg.g_tol
    return 1e-8 * (1.0 + abs(a) ** params.p)


def find_bounded_profiles(
    params: ModelParams | float,
    a_lo: float,
    a_hi: float,
    n_scan: int,
    cfg: ProfileConfig | None = None,
    *,
    return_scan: bool = False,
):
    """Locate shooting parameters a with G(a) = 0 in [a_lo, a_hi].

    Scans G on ``n_scan`` equispaced samples and bisects every sign change
    down to a relative width ``cfg.a_tol``. Returns a list of
    ``(a_root, |G(a_root)|)``; with ``return_scan`` also the scan arrays.
    """
    if not isinstance(params, ModelParams):
        params = derive_params(params, -1)
    cfg = cfg or ProfileConfig()
    if not (0.0 <= a_lo < a_hi):
        raise ValueError("need 0 <= a_lo < a_hi")
    if n_scan < 2:
        raise ValueError("n_scan must be at least 2")
    grid = np.linspace(a_lo, a_hi, int(n_scan))
    if grid[0] == 0.0:
        # G(0) = 0 trivially; start the scan just inside the interval
        grid[0] = grid[1] * 1e-3
    Gs = np.array([solve_profile(a, params, cfg).G for a in grid])
    roots = []
    for i in range(grid.size - 1):
        if Gs[i] == 0.0:
            roots.append((float(grid[i]), 0.0))
            continue
        if Gs[i] * Gs[i + 1] >= 0:
            continue
        roots.append(_bisect_G(params, cfg, grid[i], grid[i + 1], Gs[i]))
    if Gs[-1] == 0.0:
        roots.append((float(grid[-1]), 0.0))
    accepted = [(a, g) for a, g in roots if g < g_tolerance(a, params, cfg)]
    if return_scan:
        return accepted, grid, Gs
    return accepted


def _bisect_G(params, cfg, lo, hi, g_lo):
    best = None
    while hi - lo > cfg.a_tol * hi:
        mid = 0.5 * (lo + hi)
        gm = solve_profile(mid, params, cfg).G
        if best is None or abs(gm) < best[1]:
            best = (mid, abs(gm))
        if gm == 0.0:
            return float(mid), 0.0
        if np.sign(gm) == np.sign(g_lo):
            lo, g_lo = mid, gm
        else:
            hi = mid
    return float(best[0]), float(best[1])


def profile_sidecar(sol: ProfileSolution) -> dict:
    return {
        "a": sol.a,
        "p": sol.params.p,
        "zeta": sol.params.zeta,
        "G": sol.G,
        "f1": sol.f1,
        "N_extrema": sol.N_extrema,
        "delta": sol.delta,
    }
