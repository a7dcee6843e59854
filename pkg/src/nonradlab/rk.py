"""Adaptive Dormand-Prince 5(4) integrator for two-component systems.

Every ODE in the package is a scalar second-order equation, so the kernel
works on plain float pairs; this keeps a step at a few microseconds in
pure Python. Accepted steps (or forced landing points) are returned with
their derivatives, which is enough for cubic Hermite dense output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

Rhs = Callable[[float, float, float], tuple]

# Dormand & Prince (1980) tableau, FSAL.
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


class IntegrationError(RuntimeError):
    """Raised on step-size collapse or non-finite state."""


@dataclass
class RKResult:
    t: np.ndarray
    y: np.ndarray  # shape (2, n)
    dy: np.ndarray  # shape (2, n)
    stopped: bool
    nfev: int

    def hermite(self, tq, component: int = 0):
        """Cubic Hermite interpolant of ``y[component]`` at ``tq``."""
        return hermite(self.t, self.y[component], self.dy[component], tq)


def hermite(t, y, dy, tq):
    """Piecewise cubic Hermite evaluation; ``t`` may be increasing or decreasing."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    dy = np.asarray(dy, dtype=float)
    if t[0] > t[-1]:
        t, y, dy = t[::-1], y[::-1], dy[::-1]
    tq_arr = np.atleast_1d(np.asarray(tq, dtype=float))
    i = np.clip(np.searchsorted(t, tq_arr) - 1, 0, t.size - 2)
    h = t[i + 1] - t[i]
    s = (tq_arr - t[i]) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    out = h00 * y[i] + h10 * h * dy[i] + h01 * y[i + 1] + h11 * h * dy[i + 1]
    return out if np.ndim(tq) else float(out[0])


def integrate(
    rhs: Rhs,
    t0: float,
    y0: tuple,
    t_end: float,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    h0: float | None = None,
    h_max: float | None = None,
    t_eval=None,
    stop: Callable[[float, float, float], bool] | None = None,
    max_steps: int = 2_000_000,
) -> RKResult:
    """Integrate ``(u, v)' = rhs(t, u, v)`` from ``t0`` towards ``t_end``.

    With ``t_eval`` (monotone, inside the span) steps are clipped to land on
    each requested point and only those points are returned; otherwise every
    accepted step is returned. ``stop(t, u, v)`` is checked after each
    accepted step and ends the run early when true.
    """
    direction = 1.0 if t_end >= t0 else -1.0
    span = abs(t_end - t0)
    h_max = span if h_max is None else min(abs(h_max), span)
    u, v = float(y0[0]), float(y0[1])
    t = float(t0)
    k1u, k1v = rhs(t, u, v)
    nfev = 1
    if h0 is None:
        scale = atol + rtol * max(abs(u), abs(v))
        dnorm = max(abs(k1u), abs(k1v))
        h = 0.01 * span if dnorm == 0 else min(0.01 * span, 1e-2 * max(abs(u), abs(v), scale) / dnorm)
        h = max(h, 1e-12 * max(1.0, abs(t)))
    else:
        h = abs(h0)
    h = min(h, h_max)

    targets = None
    if t_eval is not None:
        targets = [float(x) for x in t_eval]
        if targets and targets[0] == t:
            targets = targets[1:]
    ts, us, vs, dus, dvs = [t], [u], [v], [k1u], [k1v]
    stopped = False
    steps = 0
    next_target = 0
    while direction * (t_end - t) > 0:
        steps += 1
        if steps > max_steps:
            raise IntegrationError(f"exceeded {max_steps} steps at t={t!r}")
        h_step = min(h, abs(t_end - t))
        landing = False
        if targets is not None and next_target < len(targets):
            gap = abs(targets[next_target] - t)
            if h_step >= gap:
                h_step = gap
                landing = True
        elif abs(t_end - t) <= h_step:
            landing = True
        if h_step < 1e-14 * max(1.0, abs(t)):
            raise IntegrationError(f"step size collapsed to {h_step:.3e} at t={t!r}")
        hs = direction * h_step

        k2u, k2v = rhs(t + C2 * hs, u + hs * A21 * k1u, v + hs * A21 * k1v)
        k3u, k3v = rhs(t + C3 * hs, u + hs * (A31 * k1u + A32 * k2u), v + hs * (A31 * k1v + A32 * k2v))
        k4u, k4v = rhs(
            t + C4 * hs,
            u + hs * (A41 * k1u + A42 * k2u + A43 * k3u),
            v + hs * (A41 * k1v + A42 * k2v + A43 * k3v),
        )
        k5u, k5v = rhs(
            t + C5 * hs,
            u + hs * (A51 * k1u + A52 * k2u + A53 * k3u + A54 * k4u),
            v + hs * (A51 * k1v + A52 * k2v + A53 * k3v + A54 * k4v),
        )
        k6u, k6v = rhs(
            t + hs,
            u + hs * (A61 * k1u + A62 * k2u + A63 * k3u + A64 * k4u + A65 * k5u),
            v + hs * (A61 * k1v + A62 * k2v + A63 * k3v + A64 * k4v + A65 * k5v),
        )
        un = u + hs * (B1 * k1u + B3 * k3u + B4 * k4u + B5 * k5u + B6 * k6u)
        vn = v + hs * (B1 * k1v + B3 * k3v + B4 * k4v + B5 * k5v + B6 * k6v)
        t_new = targets[next_target] if (landing and targets is not None and next_target < len(targets)) else (
            t_end if landing else t + hs
        )
        k7u, k7v = rhs(t_new, un, vn)
        nfev += 6
        eu = hs * (E1 * k1u + E3 * k3u + E4 * k4u + E5 * k5u + E6 * k6u + E7 * k7u)
        ev = hs * (E1 * k1v + E3 * k3v + E4 * k4v + E5 * k5v + E6 * k6v + E7 * k7v)
        su = atol + rtol * max(abs(u), abs(un))
        sv = atol + rtol * max(abs(v), abs(vn))
        err = math.sqrt(0.5 * ((eu / su) ** 2 + (ev / sv) ** 2))
        if not math.isfinite(err):
            if not (math.isfinite(u) and math.isfinite(v)):
                raise IntegrationError(f"non-finite state at t={t!r}")
            h = 0.2 * h_step
            continue
        if err <= 1.0:
            t, u, v = t_new, un, vn
            k1u, k1v = k7u, k7v
            if targets is None or landing:
                ts.append(t)
                us.append(u)
                vs.append(v)
                dus.append(k1u)
                dvs.append(k1v)
                if targets is not None:
                    next_target += 1
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err**-0.2))
            if not landing or h_step >= h:
                h = min(h_max, h_step * fac)
            if stop is not None and stop(t, u, v):
                stopped = True
                if ts[-1] != t:
                    ts.append(t)
                    us.append(u)
                    vs.append(v)
                    dus.append(k1u)
                    dvs.append(k1v)
                break
        else:
            h = h_step * max(0.2, 0.9 * err**-0.2)
    return RKResult(
        t=np.array(ts),
        y=np.array([us, vs]),
        dy=np.array([dus, dvs]),
        stopped=stopped,
        nfev=nfev,
    )
