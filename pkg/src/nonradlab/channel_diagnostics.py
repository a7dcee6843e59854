"""Exterior-energy diagnostics for snapshots of radial exterior solutions.

Every integral is per steradian: the factor 4π of the 3D volume element is
dropped, so for instance the squared norm of the generator (1/r, 0) on
{r > R} is 1/R. Integrals that should extend to infinity are computed on
the causally valid part of the grid and completed with a power law fitted
on its last decade.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import PowerLawFit, fit_power_law, integrate_grid
from .exterior_wave import Trajectory, WaveState

VERDICTS = ("nonradiative-consistent", "radiating", "inconclusive")


# -- numerical helpers -----------------------------------------------------


def derivative4(y: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order first derivative on a uniform grid, one-sided at the ends."""
    y = np.asarray(y, dtype=float)
    if y.size < 5:
        raise ValueError("need at least 5 samples for a fourth-order derivative")
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * h)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * h)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * h)
    return d


def corrected_trapezoid(y: np.ndarray, h: float) -> float:
    """Trapezoid rule with the h² Euler-Maclaurin end correction (fourth order)."""
    y = np.asarray(y, dtype=float)
    trap = h * (y.sum() - 0.5 * (y[0] + y[-1]))
    dy = derivative4(y, h)
    return float(trap - h * h / 12.0 * (dy[-1] - dy[0]))


def power_law_tail(r: np.ndarray, density: np.ndarray) -> tuple[float, PowerLawFit | None]:
    """∫_{r[-1]}^∞ of a power law fitted to ``density`` on the last decade.

    Returns (0, None) when the density is not strictly positive there (for
    instance compactly supported fields). Raises if the fitted decay is not
    integrable.
    """
    r_end = r[-1]
    sel = r >= r_end / 10.0
    if np.count_nonzero(sel) < 3:
        sel = slice(max(0, r.size - 3), r.size)
    rs, ds = r[sel], density[sel]
    if not np.all(ds > 0):
        return 0.0, None
    fit = fit_power_law(rs, ds)
    if fit.exponent >= -1.0:
        raise ValueError(f"tail density decays like r^{fit.exponent:.3f}; not integrable")
    return float(-fit.amplitude * r_end ** (fit.exponent + 1) / (fit.exponent + 1)), fit


def _window(snap: WaveState, R: float, *, margin: int = 0) -> slice:
    """Nodes with r > |t| + R that are not yet influenced by the outer boundary."""
    r = snap.r
    lo = int(np.searchsorted(r, abs(snap.t) + R, side="right"))
    hi = int(np.searchsorted(r, snap.valid_limit(), side="right")) - margin
    if hi - lo < 5:
        raise ValueError(f"exterior window beyond |t|+R={abs(snap.t) + R:.6g} is empty at t={snap.t:.6g}")
    return slice(lo, hi)


def _fixed_window(snap: WaveState, window: tuple[float, float]) -> slice:
    lo_r, hi_r = window
    r = snap.r
    if hi_r > snap.valid_limit():
        raise ValueError("fixed window reaches beyond the causally valid region")
    if lo_r <= abs(snap.t) + snap.R0:
        raise ValueError("fixed window must lie strictly outside the shifted cone")
    lo = int(np.searchsorted(r, lo_r, side="left"))
    hi = int(np.searchsorted(r, hi_r, side="right"))
    if hi - lo < 5:
        raise ValueError("fixed window holds fewer than 5 nodes")
    return slice(lo, hi)


# -- snapshot diagnostics --------------------------------------------------


def exterior_energy(
    snap: WaveState, R: float, *, window: tuple[float, float] | None = None, tail: bool = True
) -> float:
    """∫ (w_r² + w_t²) dr over r > |t| + R, trapezoid plus a power-law tail.

    With ``window=(lo, hi)`` the integral runs over that fixed radial range
    instead and no tail is added.
    """
    sl = _fixed_window(snap, window) if window is not None else _window(snap, R)
    r = snap.r[sl]
    w_r = np.gradient(snap.w_curr, snap.dr, edge_order=2)[sl]
    dens = w_r**2 + snap.w_t()[sl] ** 2
    total = integrate_grid(dens, r)
    if tail and window is None:
        total += power_law_tail(r, dens)[0]
    return total


def _window_fields(snap: WaveState, R: float):
    sl = _window(snap, R)
    r = snap.r[sl]
    w = snap.w_curr[sl]
    u = w / r
    w_r = derivative4(w, snap.dr)
    u_r = derivative4(u, snap.dr)
    u_t = snap.w_t()[sl] / r
    return r, w, u, w_r, u_r, u_t


def energy_identity_residual(snap: WaveState, R: float) -> float:
    """Mismatch of ∫ w_r² = ∫ r² u_r² + L u(L)² - a u(a)² on the window [a, L].

    The window is the set of exterior nodes; with L → ∞ and u decaying the
    boundary term at L disappears, which is the half-line form. Derivatives
    and quadrature are fourth order and restricted to the window, so the
    residual measures only discretization of a smooth snapshot.
    """
    r, w, u, w_r, u_r, _ = _window_fields(snap, R)
    h = snap.dr
    lhs = corrected_trapezoid(w_r**2, h)
    rhs = corrected_trapezoid(r**2 * u_r**2, h) + r[-1] * u[-1] ** 2 - r[0] * u[0] ** 2
    return abs(lhs - rhs)


def exterior_total_energy(snap: WaveState, R: float) -> float:
    """∫ r² (u_r²/2 + u_t²/2 + |u|^{p+1}/(p+1)) dr over the exterior window.

    The potential enters with a plus sign for both signs of the equation,
    so the value is a positive scale for relative tolerances.
    """
    r, _, u, _, u_r, u_t = _window_fields(snap, R)
    p = snap.params.p
    dens = r**2 * (0.5 * u_r**2 + 0.5 * u_t**2 + np.abs(u) ** (p + 1) / (p + 1))
    return integrate_grid(dens, r)


def projection_from_arrays(r, u, u_r, u_t, R: float) -> tuple[float, float]:
    """Projection coefficient and angle cosine of (u, u_t) against (1/r, 0) on r > R.

    ``r`` is a uniform grid starting at R. The pairing with the generator is
    u(R) and its squared norm is 1/R, so the coefficient is R u(R); the data
    norm ∫ r² (u_r² + u_t²) uses the end-corrected trapezoid and is completed
    by a fitted power-law tail.
    """
    r = np.asarray(r, dtype=float)
    if abs(r[0] - R) > 1e-12 * max(1.0, R):
        raise ValueError("grid must start at the projection radius")
    dens = r**2 * (np.asarray(u_r) ** 2 + np.asarray(u_t) ** 2)
    norm2 = corrected_trapezoid(dens, r[1] - r[0]) + power_law_tail(r, dens)[0]
    lam = R * float(u[0])
    if not norm2 > 0:
        return lam, float("nan")
    return lam, lam / math.sqrt(R) / math.sqrt(norm2)


def projection_onto_generator(snap: WaveState, R: float) -> tuple[float, float]:
    """(lambda, cos_angle) of the snapshot against (1/r, 0) on r > R.

    ``R`` is an absolute radius and must be a grid node inside the valid
    region. A vanishing data norm gives cos_angle = nan.
    """
    r = snap.r
    j = int(round(R / snap.dr))
    if j <= 0 or j >= r.size or abs(r[j] - R) > 1e-9 * snap.dr:
        raise ValueError(f"projection radius {R} is not a grid node")
    hi = int(np.searchsorted(r, snap.valid_limit(), side="right"))
    if hi - j < 5:
        raise ValueError("projection window is empty")
    sl = slice(j, hi)
    u = snap.w_curr[sl] / r[sl]
    return projection_from_arrays(r[sl], u, derivative4(u, snap.dr), snap.w_t()[sl] / r[sl], R)


def pointwise_bound_check(snap: WaveState, R: float | None = None) -> float:
    """Worst margin of r^{-1/2} (∫_r^∞ u_r² s² ds)^{1/2} - |u(r)| over exterior nodes.

    The bound is Cauchy-Schwarz applied to u(r) = -∫_r^∞ u_r ds, with
    equality exactly for multiples of 1/r.
    """
    R = snap.R0 if R is None else R
    r, _, u, _, u_r, _ = _window_fields(snap, R)
    if not np.any(u):
        return 0.0
    dens = r**2 * u_r**2
    tail = power_law_tail(r, dens)[0]
    cells = 0.5 * np.diff(r) * (dens[1:] + dens[:-1])
    outer = np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]]) + tail
    return float(np.min(np.sqrt(outer / r) - np.abs(u)))


# -- trajectory diagnostics ------------------------------------------------


def characteristic_residual(traj: Trajectory, r0: float, t0: float, T: float) -> float:
    """Check v₊(end) - v₊(start) = ζ ∫ (t' - t0 + r0) |u|^{p-1} u dt' along r = r0 + t' - t0.

    v₊ = w_t - w_r from centred differences; the time integral is a
    trapezoid rule over the recorded snapshots in [t0, T].
    """
    times = traj.times
    i0 = int(np.argmin(np.abs(times - t0)))
    i1 = int(np.argmin(np.abs(times - T)))
    tol = 1e-9 * max(1.0, abs(T))
    if abs(times[i0] - t0) > tol or abs(times[i1] - T) > tol or i1 < i0:
        raise ValueError("t0 and T must be recorded snapshot times with t0 <= T")
    snaps = traj.snapshots[i0 : i1 + 1]
    first = snaps[0]
    if first.lam != 1.0:
        raise ValueError("characteristic residual needs a lambda = 1 run")
    if r0 <= abs(t0) + first.R0:
        raise ValueError("the characteristic must start outside the shifted cone")
    p, zeta, h = first.params.p, first.params.zeta, first.dr
    ts, vals, vplus = [], [], []
    for s in snaps:
        rr = r0 + s.t - t0
        j = int(round(rr / h))
        if abs(j * h - rr) > 1e-9 * h:
            raise ValueError("characteristic does not pass through grid nodes")
        if rr > s.valid_limit() - h:
            raise ValueError(f"characteristic leaves the valid grid before T (t={s.t:.6g})")
        w = s.w_curr[j]
        vals.append(abs(w) ** (p - 1) * w / rr ** (p - 1))
        ts.append(s.t)
        if s is first or s is snaps[-1]:
            w_r = (s.w_curr[j + 1] - s.w_curr[j - 1]) / (2 * h)
            vplus.append(s.w_t()[j] - w_r)
    integral = integrate_grid(np.array(vals), np.array(ts)) if len(ts) > 1 else 0.0
    return abs(vplus[-1] - vplus[0] - zeta * integral)


def characteristic_tail_bound(eps: float, p: float, r_end: float) -> float:
    """2 ε^p r^{2-pβ} / (pβ - 2): size of the neglected integral beyond radius ``r_end``."""
    beta = 2.0 / (p - 1.0)
    return 2.0 * eps**p * r_end ** (2.0 - p * beta) / (p * beta - 2.0)


def weighted_sup(traj: Trajectory, R: float | None = None) -> float:
    """ε = sup r^β |u| over the exterior windows of all snapshots."""
    best = 0.0
    for s in traj.snapshots:
        sl = _window(s, s.R0 if R is None else R)
        r = s.r[sl]
        best = max(best, float(np.max(r ** s.params.beta * np.abs(s.w_curr[sl] / r))))
    return best


@dataclass
class ChannelReport:
    R: float
    times: np.ndarray
    E_ext: np.ndarray
    lambda_proj: np.ndarray
    cos_angle: np.ndarray
    decay_fit: PowerLawFit | None
    verdict: str
    spatial_exponents: np.ndarray = field(default_factory=lambda: np.empty(0))
    C_fit: float = float("nan")
    C_residual_exponent: float = float("nan")

    def to_dict(self) -> dict:
        fit = None if self.decay_fit is None else asdict(self.decay_fit)
        return {
            "R": self.R,
            "times": self.times.tolist(),
            "E_ext": self.E_ext.tolist(),
            "lambda_proj": self.lambda_proj.tolist(),
            "cos_angle": self.cos_angle.tolist(),
            "decay_fit": fit,
            "verdict": self.verdict,
            "spatial_exponents": self.spatial_exponents.tolist(),
            "C_fit": self.C_fit,
            "C_residual_exponent": self.C_residual_exponent,
        }

    def to_json(self) -> str:
        return json.dumps(_finite_or_none(self.to_dict()), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["t", "E_ext", "lambda", "cos_angle"])
        for row in zip(self.times, self.E_ext, self.lambda_proj, self.cos_angle):
            wr.writerow([repr(float(x)) for x in row])
        return buf.getvalue()


def _finite_or_none(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite_or_none(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite_or_none(v) for v in obj]
    return obj


def fit_far_field_constant(snap: WaveState, R: float, n_terms: int = 4) -> tuple[float, float]:
    """Fit w ≈ C + Σ_k D_k r^{k(3-p)} on the outer three quarters of the exterior window.

    Stationary fields expand in powers of r^{3-p} at large r. Returns C and
    the decay exponent of |u - C/r| on the outer half of the window.
    """
    sl = _window(snap, R)
    r, w = snap.r[sl], snap.w_curr[sl]
    keep = r >= 0.25 * r[-1]
    if np.count_nonzero(keep) < 2 * n_terms:
        keep = np.ones_like(r, dtype=bool)
    rf, wf = r[keep], w[keep]
    k = 3.0 - snap.params.p
    design = np.column_stack([rf ** (i * k) for i in range(n_terms)])
    coef, *_ = np.linalg.lstsq(design, wf, rcond=None)
    C = float(coef[0])
    outer = r >= 0.5 * r[-1]
    resid = np.abs(w[outer] - C) / r[outer]
    if resid.size < 3 or not np.all(resid > 0):
        return C, float("nan")
    return C, fit_power_law(r[outer], resid).exponent


def decay_report(traj: Trajectory, R: float, *, t_range: tuple[float, float] | None = None) -> ChannelReport:
    """Exterior energy, projection and decay fits across a trajectory.

    The verdict is nonradiative-consistent when E_ext decreases over the
    fitted times and its fitted exponent is at most -(5-p)/(p-1) + 0.1;
    radiating when the fitted exponent is above -0.05 (no appreciable
    decay); inconclusive otherwise.
    """
    if len(traj.snapshots) < 4:
        raise ValueError("decay report needs at least 4 snapshots")
    snaps = traj.snapshots
    times = np.array([s.t for s in snaps])
    E = np.array([exterior_energy(s, R) for s in snaps])
    lam, cos = [], []
    spatial = []
    for s in snaps:
        radius = round((abs(s.t) + R) / s.dr) * s.dr
        if radius <= abs(s.t) + R:
            radius += s.dr
        try:
            lo, co = projection_onto_generator(s, radius)
        except ValueError:
            lo, co = float("nan"), float("nan")
        lam.append(lo)
        cos.append(co)
        spatial.append(_spatial_exponent(s, R))
    p = snaps[0].params.p
    threshold = -(5.0 - p) / (p - 1.0) + 0.1
    sel = times > 0
    if t_range is not None:
        sel &= (times >= t_range[0]) & (times <= t_range[1])
    fit = None
    verdict = "inconclusive"
    if np.count_nonzero(sel) >= 3 and np.all(E[sel] > 0):
        fit = fit_power_law(times[sel], E[sel])
        decreasing = bool(np.all(np.diff(E[sel]) < 0))
        if decreasing and fit.exponent <= threshold:
            verdict = "nonradiative-consistent"
        elif fit.exponent > -0.05:
            verdict = "radiating"
    C, c_exp = fit_far_field_constant(snaps[-1], R)
    return ChannelReport(
        R=R,
        times=times,
        E_ext=E,
        lambda_proj=np.array(lam),
        cos_angle=np.array(cos),
        decay_fit=fit,
        verdict=verdict,
        spatial_exponents=np.array(spatial),
        C_fit=C,
        C_residual_exponent=c_exp,
    )


def _spatial_exponent(snap: WaveState, R: float) -> float:
    """Decay exponent of |u| over r in [max(2|t|, 2R), r_valid / 2]."""
    r = snap.r
    lo = max(2 * abs(snap.t), 2 * R)
    hi = 0.5 * snap.valid_limit()
    sel = (r >= lo) & (r <= hi)
    if np.count_nonzero(sel) < 3:
        return float("nan")
    u = np.abs(snap.w_curr[sel] / r[sel])
    if not np.all(u > 0):
        return float("nan")
    return fit_power_law(r[sel], u).exponent
