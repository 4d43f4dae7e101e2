"""Anisotropic fractional conductivity calculus on a discretized periodic box."""

from fraccond.grid import Grid, build_grid

__version__ = "0.1.0"

__all__ = ["Grid", "build_grid", "__version__"]
