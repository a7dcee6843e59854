"""Shared model parameters, grids, quadrature and power-law fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Exponents of the 3D equation u_tt - Δu = ζ|u|^{p-1}u, 3 < p < 5.

    ``beta`` is the self-similar decay exponent 2/(p-1), ``gamma`` the
    linear coefficient beta*(1-beta) of the profile equation, ``s_p`` the
    scaling-critical Sobolev exponent and ``c_p`` the amplitude of the
    focusing singular steady state c_p*|x|^{-beta}.
    """

    p: float
    zeta: int
    beta: float
    gamma: float
    s_p: float
    c_p: float

    @property
    def focusing(self) -> bool:
        return self.zeta == 1

    def nonlinearity(self, u):
        """Return ζ|u|^{p-1}u (works on scalars and arrays)."""
        return self.zeta * np.abs(u) ** (self.p - 1.0) * u


def _root_to_nearest_float(y: float, k: float) -> float:
    """Return the float c near y**(1/k) whose computed c**k is closest to y.

    Taking the k-th root amplifies rounding when k is near 2, so the
    identity c**k == y can miss by several ulps; scanning a few
    neighbouring floats restores it.
    """
    c = y ** (1.0 / k)
    best, err = c, abs(c**k - y)
    lo = hi = c
    for _ in range(16):
        lo, hi = math.nextafter(lo, 0.0), math.nextafter(hi, math.inf)
        for cand in (lo, hi):
            e = abs(cand**k - y)
            if e < err:
                best, err = cand, e
    return best


def derive_params(p: float, zeta: int = -1) -> ModelParams:
    """Build :class:`ModelParams` for exponent ``p`` and sign ``zeta``.

    Raises ``ValueError`` unless 3 < p < 5 and zeta is +1 or -1.
    """
    p = float(p)
    if not (math.isfinite(p) and 3.0 < p < 5.0):
        raise ValueError(f"p={p!r} outside the admissible interval (3, 5)")
    if zeta not in (1, -1):
        raise ValueError(f"zeta must be +1 (focusing) or -1 (defocusing), got {zeta!r}")
    beta = 2.0 / (p - 1.0)
    gamma = beta * (1.0 - beta)
    s_p = 1.5 - beta
    c_p = _root_to_nearest_float(gamma, p - 1.0)
    return ModelParams(p=p, zeta=int(zeta), beta=beta, gamma=gamma, s_p=s_p, c_p=c_p)


@dataclass(frozen=True)
class Grid1D:
    nodes: np.ndarray
    spacing: str = "uniform"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("a grid needs at least 2 nodes")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("grid nodes must be strictly increasing")
        if self.spacing not in ("uniform", "logarithmic", "adaptive"):
            raise ValueError(f"unknown spacing {self.spacing!r}")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, lo: float, hi: float, n: int) -> "Grid1D":
        return cls(np.linspace(lo, hi, n), "uniform")

    @classmethod
    def logarithmic(cls, lo: float, hi: float, n: int) -> "Grid1D":
        return cls(np.geomspace(lo, hi, n), "logarithmic")

    def __len__(self) -> int:
        return self.nodes.size


def integrate_grid(values, grid) -> float:
    """Composite trapezoid rule of ``values`` sampled on ``grid``.

    ``grid`` may be a :class:`Grid1D` or a plain increasing array.
    """
    x = grid.nodes if isinstance(grid, Grid1D) else np.asarray(grid, dtype=float)
    y = np.asarray(values, dtype=float)
    if y.shape != x.shape:
        raise ValueError(f"length mismatch: {y.size} values on {x.size} nodes")
    dx = np.diff(x)
    return float(np.sum(0.5 * dx * (y[1:] + y[:-1])))


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    amplitude: float
    rms_residual: float

    def __iter__(self):
        return iter((self.exponent, self.amplitude, self.rms_residual))

    def __call__(self, x):
        return self.amplitude * np.asarray(x, dtype=float) ** self.exponent


def fit_power_law(x, y=None) -> PowerLawFit:
    """Least-squares line through (log x, log y): y ≈ amplitude * x**exponent.

    Accepts either two arrays or a single sequence of (x, y) pairs. The
    residual is the RMS of the log-space residuals.
    """
    if y is None:
        pairs = np.asarray(x, dtype=float).reshape(-1, 2)
        x, y = pairs[:, 0], pairs[:, 1]
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if x.size < 3:
        raise ValueError("need at least 3 samples for a power-law fit")
    if not (np.all(x > 0) and np.all(y > 0)):
        raise ValueError("power-law fit needs strictly positive samples")
    lx, ly = np.log(x), np.log(y)
    design = np.column_stack([lx, np.ones_like(lx)])
    (slope, icpt), *_ = np.linalg.lstsq(design, ly, rcond=None)
    resid = ly - (slope * lx + icpt)
    # very steep fits (e.g. the edge of a compact bump) may overflow to inf
    amplitude = math.exp(icpt) if icpt < 709.0 else math.inf
    return PowerLawFit(float(slope), amplitude, float(np.sqrt(np.mean(resid**2))))
