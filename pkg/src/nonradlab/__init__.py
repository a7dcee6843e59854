"""Numerical laboratory for exterior (non-radiative) solutions of the radial
3D semilinear wave equation u_tt - Δu = ζ|u|^{p-1}u with 3 < p < 5."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .core import Grid1D, ModelParams, PowerLawFit, derive_params, fit_power_law, integrate_grid

__all__ = [
    "Grid1D",
    "ModelParams",
    "PowerLawFit",
    "derive_params",
    "fit_power_law",
    "integrate_grid",
    "__version__",
]
