"""Restriction / extension operators and the weighted operator ``W1 T_S W2``.

Conventions on a grid with cell volume ``h^dim``::

    restriction:  (R f)_k   = h^dim sum_x f(x) exp(-i x.xi_k)
    extension:    (R* g)(x) = sum_k w_k g_k exp(i x.xi_k)

These are exact adjoints for the inner products weighted by ``w_k`` on the
surface and ``h^dim`` on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, GridSpec
from .surface import SurfaceQuadrature


def _check_resolvable(grid: GridSpec, quad: SurfaceQuadrature):
    if grid.dim != quad.ambient_dim:
        raise ValueError(f"grid dimension {grid.dim} differs from surface ambient dimension {quad.ambient_dim}")
    if quad.max_frequency >= grid.aliasing_radius():
        raise ValueError(
            f"surface nodes reach frequency {quad.max_frequency:g}, beyond the grid's "
            f"resolvable band {grid.aliasing_radius():g}"
        )


def plane_wave_matrix(grid: GridSpec, quad: SurfaceQuadrature) -> np.ndarray:
    """``E[x, k] = exp(i x.xi_k)`` for all grid nodes x (C order) and surface nodes k."""
    return np.exp(1j * (grid.points() @ quad.nodes.T))


def restriction_apply(f: Field, quad: SurfaceQuadrature) -> np.ndarray:
    _check_resolvable(f.grid, quad)
    E = plane_wave_matrix(f.grid, quad)
    return f.grid.cell_volume * (E.conj().T @ f.flat())


def extension_at(g, quad: SurfaceQuadrature, points) -> np.ndarray:
    """Evaluate ``sum_k w_k g_k exp(i x.xi_k)`` at arbitrary points ``(M, N)``.

    ``g`` may carry extra trailing columns, one extension per column.
    """
    g = np.asarray(g, dtype=complex)
    if g.shape[:1] != (len(quad),) or g.ndim > 2:
        raise ValueError(f"expected {len(quad)} surface values, got shape {g.shape}")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    coef = quad.weights.reshape((-1,) + (1,) * (g.ndim - 1)) * g
    out = np.empty((len(points),) + g.shape[1:], dtype=complex)
    chunk = max(1, 4_000_000 // len(quad))
    for s in range(0, len(points), chunk):
        out[s:s + chunk] = np.exp(1j * (points[s:s + chunk] @ quad.nodes.T)) @ coef
    return out


def extension_apply(g, quad: SurfaceQuadrature, grid: GridSpec) -> Field:
    if grid.dim != quad.ambient_dim:
        raise ValueError(f"grid dimension {grid.dim} differs from surface ambient dimension {quad.ambient_dim}")
    return Field(grid, extension_at(g, quad, grid.points()))


def ts_apply(f: Field, quad: SurfaceQuadrature) -> Field:
    """``T_S f = R*(R f)``, i.e. the convolution of f with ``dsigma^``."""
    return extension_apply(restriction_apply(f, quad), quad, f.grid)


@dataclass(frozen=True, eq=False)
class FactoredOperator:
    """The grid matrix ``M = A C^*`` of ``W1 T_S W2``.

    ``A[x, k] = W1(x) sqrt(w_k h^dim) exp(i x.xi_k)`` and
    ``C[x, k] = conj(W2(x)) sqrt(w_k h^dim) exp(i x.xi_k)``. M acts on
    vectors of node values and its singular values are those of the
    discretised operator on L^2 of the grid.
    """

    grid: GridSpec
    left_factor: np.ndarray
    right_factor: np.ndarray

    @property
    def rank_bound(self) -> int:
        return self.left_factor.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.left_factor.shape[0], self.right_factor.shape[0])

    def dense(self) -> np.ndarray:
        return self.left_factor @ self.right_factor.conj().T

    def apply(self, f: Field) -> Field:
        return Field(self.grid, self.left_factor @ (self.right_factor.conj().T @ f.flat()))

    def reduced(self) -> np.ndarray:
        """The K x K matrix ``C^* A``; it shares the nonzero spectrum of M."""
        return self.right_factor.conj().T @ self.left_factor


def build_weighted_operator(W1: Field, W2: Field, quad: SurfaceQuadrature) -> FactoredOperator:
    if W1.grid != W2.grid:
        raise ValueError(f"weights live on different grids: {W1.grid} vs {W2.grid}")
    grid = W1.grid
    _check_resolvable(grid, quad)
    E = plane_wave_matrix(grid, quad) * np.sqrt(quad.weights * grid.cell_volume)[None, :]
    A = W1.flat()[:, None] * E
    C = np.conj(W2.flat())[:, None] * E
    return FactoredOperator(grid, A, C)
