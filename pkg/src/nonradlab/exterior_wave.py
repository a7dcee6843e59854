"""Exterior solutions of the radial equation via the reduction w = r u.

The evolved equation is

    w_tt - w_rr = ζ χ(r > |t| + R0) |w|^{p-1} w / r^{p-1}   on [0, r_max],

with w(0, t) = 0. The leapfrog scheme at Courant number 1 transports the
linear part exactly along grid characteristics, and because the forcing is
switched off inside the shifted light cone, nodes outside it never read
values from inside: the interior extension of the data is irrelevant there.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .core import Grid1D, ModelParams
from .profile_ode import ProfileSolution
from .rk import IntegrationError

Sampler = Callable[[np.ndarray], np.ndarray]


class WaveBlowup(IntegrationError):
    """Non-finite values appeared; ``state`` holds the last finite state."""

    def __init__(self, message: str, state: "WaveState"):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class WaveConfig:
    params: ModelParams
    R0: float
    dr: float
    T_max: float
    lam: float = 1.0
    r_max: float | None = None
    support: float | None = None  # radius beyond which the data vanish, if compact
    extension: str = "clamp"  # data inside r < R0: clamp, zero, or none (sample as given)

    def __post_init__(self):
        if not (self.R0 > 0 and math.isfinite(self.R0)):
            raise ValueError("truncation radius R0 must be positive")
        if not (self.dr > 0 and math.isfinite(self.dr)):
            raise ValueError("grid spacing dr must be positive")
        if not (0.0 < self.lam <= 1.0):
            raise ValueError("Courant number must lie in (0, 1]")
        if not (self.T_max >= 0 and math.isfinite(self.T_max)):
            raise ValueError("T_max must be non-negative")
        if self.extension not in ("clamp", "zero", "none"):
            raise ValueError(f"unknown interior extension {self.extension!r}")
        if self.r_max is None and self.support is None:
            raise ValueError("give r_max or the data support radius")
        need = self.required_r_max()
        if self.r_max is not None and need is not None and self.r_max < need:
            raise ValueError(f"r_max={self.r_max} is inside the causal budget {need}")

    @property
    def dt(self) -> float:
        return self.lam * self.dr

    def required_r_max(self) -> float | None:
        if self.support is None:
            return None
        return self.R0 + self.T_max + self.support + 2 * self.dr

    def resolved_r_max(self) -> float:
        r_max = self.r_max if self.r_max is not None else self.required_r_max()
        return math.ceil(r_max / self.dr - 1e-9) * self.dr

    def grid(self) -> Grid1D:
        n = int(round(self.resolved_r_max() / self.dr))
        return Grid1D(np.arange(n + 1) * self.dr, "uniform")

    def echo(self) -> dict:
        return {
            "p": self.params.p,
            "zeta": self.params.zeta,
            "R0": self.R0,
            "dr": self.dr,
            "lambda": self.lam,
            "T_max": self.T_max,
            "r_max": self.resolved_r_max(),
        }


@dataclass(frozen=True)
class WaveState:
    """Two time levels of w = r u; ``w_next`` is attached to recorded snapshots."""

    t: float
    n: int
    r_grid: Grid1D
    w_curr: np.ndarray
    w_prev: np.ndarray
    params: ModelParams
    R0: float
    lam: float
    w_next: np.ndarray | None = field(default=None, repr=False)

    @property
    def r(self) -> np.ndarray:
        return self.r_grid.nodes

    @property
    def dr(self) -> float:
        return float(self.r[1] - self.r[0])

    @property
    def dt(self) -> float:
        return self.lam * self.dr

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    def u(self) -> np.ndarray:
        """u = w / r with u(0) taken from the slope of w at the origin."""
        r, w = self.r, self.w_curr
        out = np.empty_like(w)
        out[1:] = w[1:] / r[1:]
        out[0] = (4 * w[1] - w[2]) / (2 * r[1])
        return out

    def w_r(self) -> np.ndarray:
        return np.gradient(self.w_curr, self.dr, edge_order=2)

    def w_t(self) -> np.ndarray:
        """Centred difference when the next level is attached, backward otherwise."""
        if self.w_next is not None:
            return (self.w_next - self.w_prev) / (2 * self.dt)
        return (self.w_curr - self.w_prev) / self.dt

    def u_t(self) -> np.ndarray:
        out = np.empty_like(self.w_curr)
        out[1:] = self.w_t()[1:] / self.r[1:]
        out[0] = out[1]
        return out

    def u_r(self) -> np.ndarray:
        return np.gradient(self.u(), self.dr, edge_order=2)

    def valid_limit(self) -> float:
        """Largest radius not yet reached by information from the outer boundary."""
        return self.r_max - self.t - self.dr


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    snapshots: tuple
    config: dict

    def checksum(self) -> str:
        h = hashlib.sha256()
        for s in self.snapshots:
            h.update(np.float64(s.t).tobytes())
            h.update(np.ascontiguousarray(s.w_curr).tobytes())
            h.update(np.ascontiguousarray(s.w_prev).tobytes())
        return h.hexdigest()

    def at(self, t: float) -> WaveState:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"no snapshot at t={t}")
        return self.snapshots[i]

    def manifest(self, data_descriptor: dict | None = None) -> dict:
        out = dict(self.config)
        out["T"] = float(self.times[-1]) if self.times.size else 0.0
        out["data_descriptor"] = data_descriptor or {}
        out["checksum"] = self.checksum()
        return out


def _sample(fn: Sampler, r: np.ndarray, name: str) -> np.ndarray:
    vals = np.asarray(fn(r), dtype=float)
    vals = np.broadcast_to(vals, r.shape).astype(float)
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"{name} returned non-finite values")
    return vals


def _forcing(w: np.ndarray, r: np.ndarray, t: float, R0: float, params: ModelParams) -> np.ndarray:
    out = np.zeros_like(w)
    j0 = int(np.searchsorted(r, t + R0, side="right"))
    if j0 < r.size:
        ws = w[j0:]
        # overflow is caught by the finiteness check in step()
        with np.errstate(over="ignore", invalid="ignore"):
            out[j0:] = params.zeta * np.abs(ws) ** (params.p - 1) * ws / r[j0:] ** (params.p - 1)
    return out


def _second_difference(y: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(y)
    out[1:-1] = (y[2:] - 2 * y[1:-1] + y[:-2]) / (h * h)
    out[-1] = out[-2]
    return out


def make_initial_state(
    u0: Sampler, u1: Sampler, cfg: WaveConfig, *, u1_primitive: Sampler | None = None
) -> WaveState:
    """Sample the data, extend them inside r < R0 and build the start levels.

    The default extension clamps u0 and u1 to their values at R0; any choice
    leaves the solution outside the shifted cone unchanged.

    The stored previous level is w(-Δt) from the Taylor start
    w(-Δt) = w - I + Δt²/2 (w_rr + F), where I approximates half the integral
    of v = r u1 over [r - Δt, r + Δt] by Δt v + Δt³/6 v_rr. Given a primitive
    of v (``u1_primitive``, in w units) and λ = 1, I is evaluated exactly,
    which makes homogeneous runs reproduce d'Alembert transport to rounding.
    """
    grid = cfg.grid()
    r = grid.nodes
    outer = (r > 0) if cfg.extension == "none" else (r >= cfg.R0)
    u0v = np.zeros_like(r)
    u1v = np.zeros_like(r)
    u0v[outer] = _sample(u0, r[outer], "u0")
    u1v[outer] = _sample(u1, r[outer], "u1")
    if cfg.extension == "clamp":
        edge = np.array([cfg.R0])
        u0v[~outer] = _sample(u0, edge, "u0")[0]
        u1v[~outer] = _sample(u1, edge, "u1")[0]
    w = r * u0v
    v = r * u1v
    w[0] = v[0] = 0.0
    dt = cfg.dt
    F = _forcing(w, r, 0.0, cfg.R0, cfg.params)
    w_prev = w + 0.5 * dt * dt * (_second_difference(w, cfg.dr) + F)
    if u1_primitive is not None and cfg.lam == 1.0:
        lo = _sample(u1_primitive, np.maximum(r - dt, 0.0), "u1_primitive")
        hi = _sample(u1_primitive, r + dt, "u1_primitive")
        w_prev -= 0.5 * (hi - lo)
    else:
        w_prev -= dt * v + dt**3 / 6.0 * _second_difference(v, cfg.dr)
    w_prev[0] = 0.0
    return WaveState(t=0.0, n=0, r_grid=grid, w_curr=w, w_prev=w_prev, params=cfg.params, R0=cfg.R0, lam=cfg.lam)


def _advance(state: WaveState) -> np.ndarray:
    w, wp, r = state.w_curr, state.w_prev, state.r
    lam2 = state.lam**2
    dt = state.dt
    wn = np.empty_like(w)
    wn[1:-1] = 2 * w[1:-1] - wp[1:-1] + lam2 * (w[2:] - 2 * w[1:-1] + w[:-2])
    wn[1:-1] += dt * dt * _forcing(w, r, state.t, state.R0, state.params)[1:-1]
    wn[0] = 0.0
    # first-order absorbing condition; exact outgoing transport when lam = 1
    lam = state.lam
    wn[-1] = w[-2] + (lam - 1.0) / (lam + 1.0) * (wn[-2] - w[-1])
    return wn


def step(state: WaveState) -> WaveState:
    """One leapfrog step; raises :class:`WaveBlowup` on non-finite values."""
    wn = _advance(state)
    if not np.all(np.isfinite(wn)):
        raise WaveBlowup(f"non-finite field after t={state.t:.6g}", state)
    n = state.n + 1
    return replace(state, t=n * state.dt, n=n, w_prev=state.w_curr, w_curr=wn, w_next=None)


def evolve(state: WaveState, T: float, record_every: int = 1) -> Trajectory:
    """Advance by ``T`` and record snapshots every ``record_every`` steps.

    Recorded snapshots carry the following level in ``w_next`` so that w_t
    is a centred difference. The final time is always recorded.
    """
    if record_every < 1:
        raise ValueError("record_every must be a positive integer")
    if T < 0:
        raise ValueError("T must be non-negative")
    dt = state.dt
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"T={T} is not a multiple of the time step {dt}")
    snaps = []
    cur = state
    nxt = step(cur)
    for k in range(n_steps + 1):
        if k % record_every == 0 or k == n_steps:
            snaps.append(replace(cur, w_next=nxt.w_curr))
        if k == n_steps:
            break
        cur = nxt
        nxt = step(cur)
    config = {
        "p": state.params.p,
        "zeta": state.params.zeta,
        "R0": state.R0,
        "dr": state.dr,
        "lambda": state.lam,
        "r_max": state.r_max,
    }
    return Trajectory(times=np.array([s.t for s in snaps]), snapshots=tuple(snaps), config=config)


# -- exact reference fields ------------------------------------------------


def self_similar_field(profile: ProfileSolution, r, t: float):
    """(u, u_t, u_r) of u = r^{-β} f(t/r) at radii ``r`` with |t| < r."""
    r = np.asarray(r, dtype=float)
    if np.any(np.abs(t) >= r):
        raise ValueError("self-similar field needs |t| < r")
    b = profile.params.beta
    x = t / r
    f, fp = profile.evaluate(x)
    rb = r**-b
    u = rb * f
    u_t = rb / r * fp
    u_r = -b * rb / r * f - t * rb / r**2 * fp
    return u, u_t, u_r


def self_similar_data(a: float, params: ModelParams):
    """Data (0, a r^{-β-1}) generating the self-similar solution with f'(0) = a."""
    b = params.beta

    def u0(r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def u1(r):
        return a * np.asarray(r, dtype=float) ** (-b - 1.0)

    return u0, u1


def stationary_data(profile, C: float):
    """Static data (U_C, 0) from a stationary profile."""
    from .stationary import evaluate_rescaled

    def u0(r):
        return evaluate_rescaled(profile, C, r)

    def u1(r):
        return np.zeros_like(np.asarray(r, dtype=float))

    return u0, u1


def bump_profile(r, center: float, width: float, amplitude: float):
    """Smooth compactly supported bump φ and its derivative, in w = r u units."""
    r = np.asarray(r, dtype=float)
    s = (r - center) / width
    inside = np.abs(s) < 1.0
    phi = np.zeros_like(r)
    dphi = np.zeros_like(r)
    si = s[inside]
    e = np.exp(1.0 - 1.0 / (1.0 - si**2))
    phi[inside] = amplitude * e
    dphi[inside] = amplitude * e * (-2.0 * si / (1.0 - si**2) ** 2) / width
    return phi, dphi


def bump_data(center: float, width: float, amplitude: float):
    """Outgoing bump: w(r, 0) = φ(r), w_t(r, 0) = -φ'(r)."""
    if width <= 0 or center - width <= 0:
        raise ValueError("bump must have positive width and lie in r > 0")

    def u0(r):
        return bump_profile(r, center, width, amplitude)[0] / np.asarray(r, dtype=float)

    def u1(r):
        return -bump_profile(r, center, width, amplitude)[1] / np.asarray(r, dtype=float)

    return u0, u1


def bump_velocity_primitive(center: float, width: float, amplitude: float) -> Sampler:
    """Primitive of r u1 = -φ' for :func:`bump_data`, i.e. -φ."""

    def prim(r):
        return -bump_profile(r, center, width, amplitude)[0]

    return prim


def tabulated_data(r_tab, u0_tab, u1_tab):
    """Linear interpolation of tabulated data; zero beyond the last radius."""
    r_tab = np.asarray(r_tab, dtype=float)
    if r_tab.ndim != 1 or r_tab.size < 2 or not np.all(np.diff(r_tab) > 0):
        raise ValueError("tabulated radii must be strictly increasing")

    def u0(r):
        return np.interp(r, r_tab, u0_tab, right=0.0)

    def u1(r):
        return np.interp(r, r_tab, u1_tab, right=0.0)

    return u0, u1
