"""Numerical laboratory for Schatten-class Fourier restriction and
orthonormal Strichartz estimates."""

__version__ = "0.1.0"

from .grid import INF, Field, GridSpec, SpaceTimeField, make_grid

__all__ = ["INF", "Field", "GridSpec", "SpaceTimeField", "make_grid", "__version__"]
