"""Free Schroedinger evolution on the torus, the conjugated-potential operator,
orthonormal-system densities and a Littlewood-Paley projector bank.

``U(t) = exp(i t Delta)`` is the Fourier multiplier ``exp(-i t |xi|^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import INF, Field, GridSpec, SpaceTimeField, mixed_norm

MAX_DENSE_NODES = 4096


def _fft(values, dim):
    return np.fft.fftn(values, axes=tuple(range(-dim, 0)), norm="ortho")


def _ifft(values, dim):
    return np.fft.ifftn(values, axes=tuple(range(-dim, 0)), norm="ortho")


def free_evolve(u: Field, t: float) -> Field:
    g = u.grid
    mult = np.exp(-1j * t * g.frequency_norm_squared())
    return Field(g, _ifft(mult * _fft(u.values, g.dim), g.dim))


def evolve_many(u: Field, times) -> np.ndarray:
    """``U(t) u`` for every t; returns shape ``(len(times), *grid.shape)``."""
    g = u.grid
    uhat = _fft(u.values, g.dim)
    k2 = g.frequency_norm_squared()
    times = np.asarray(times, dtype=float)
    out = np.empty((len(times),) + g.shape, dtype=complex)
    for i, t in enumerate(times):
        out[i] = _ifft(np.exp(-1j * t * k2) * uhat, g.dim)
    return out


def recurrence_period(grid: GridSpec) -> float:
    """Smallest T > 0 with ``U(T) = identity`` on the torus: ``2 L^2 / pi``."""
    return 2.0 * grid.box_halfwidth**2 / math.pi


# ---------------------------------------------------------------------------
# Gamma_V = dt sum_t U(-t) V(t) U(t)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GammaOperator:
    """Dense matrix of ``dt sum_t U(-t) V(t,.) U(t)``.

    ``basis='node'`` means the matrix acts on vectors of grid values;
    ``basis='fourier'`` is the same operator conjugated by the unitary DFT
    (numpy FFT ordering). Spectra and traces agree between the two.
    """

    grid: GridSpec
    matrix: np.ndarray
    basis: str = "node"

    def to_node_basis(self) -> "GammaOperator":
        if self.basis == "node":
            return self
        return GammaOperator(self.grid, _fourier_to_node(self.matrix, self.grid), "node")

    def apply(self, f: Field) -> Field:
        op = self.to_node_basis()
        return Field(self.grid, op.matrix @ f.flat())

    def conjugate_by_evolution(self, t: float) -> "GammaOperator":
        """``U(-t) Gamma U(t)``."""
        if self.basis != "fourier":
            raise ValueError("conjugation is implemented in the Fourier basis")
        ph = np.exp(1j * t * self.grid.frequency_norm_squared().ravel())
        return GammaOperator(self.grid, ph[:, None] * self.matrix * ph.conj()[None, :], "fourier")


def _fourier_to_node(mat, grid):
    n, d = grid.points_per_axis, grid.dim
    shape = (n,) * d
    # node = F^* Fourier F, F the unitary DFT; F is symmetric
    X = mat.reshape(shape + (-1,))
    X = np.fft.ifftn(X, axes=tuple(range(d)), norm="ortho").reshape(grid.size, grid.size)
    Y = X.T.reshape(shape + (-1,))
    Y = np.fft.fftn(Y, axes=tuple(range(d)), norm="ortho").reshape(grid.size, grid.size)
    return Y.T


def _difference_index(grid: GridSpec) -> np.ndarray:
    n, d = grid.points_per_axis, grid.dim
    idx = np.indices((n,) * d).reshape(d, -1)
    flat = np.zeros((grid.size, grid.size), dtype=np.int64)
    for a in range(d):
        diff = (idx[a][:, None] - idx[a][None, :]) % n
        flat = flat * n + diff
    return flat


def gamma_operator(V: SpaceTimeField, basis: str = "node") -> GammaOperator:
    """Assemble ``Gamma_V`` with the rectangle rule over ``V.times``.

    In the Fourier basis ``Gamma[k, l] = dt sum_t exp(i t (|xi_k|^2 - |xi_l|^2))
    c_t[k - l]`` with ``c_t = fftn(V(t)) / n^dim``; slices with ``V(t) = 0``
    are skipped.
    """
    if basis not in ("node", "fourier"):
        raise ValueError(f"unknown basis {basis!r}")
    g = V.grid
    if g.size > MAX_DENSE_NODES:
        raise ValueError(f"grid has {g.size} nodes; dense Gamma is capped at {MAX_DENSE_NODES}")
    diff = _difference_index(g)
    k2 = g.frequency_norm_squared().ravel()
    out = np.zeros((g.size, g.size), dtype=complex)
    for t, s in zip(V.times, V.slices):
        if not np.any(s.values):
            continue
        c = np.fft.fftn(s.values).ravel() / g.size
        ph = np.exp(1j * t * k2)
        out += ph[:, None] * c[diff] * ph.conj()[None, :]
    out *= V.dt
    op = GammaOperator(g, out, "fourier")
    return op.to_node_basis() if basis == "node" else op


def gamma_quadratic_form(V: SpaceTimeField, phi: Field) -> float:
    """``<phi, Gamma_V phi> = dt sum_t <U(t) phi, V(t) U(t) phi>`` without assembling Gamma."""
    if phi.grid != V.grid:
        raise ValueError("phi and V live on different grids")
    evolved = evolve_many(phi, V.times)
    dens = np.abs(evolved) ** 2
    return float(np.real(np.sum(V.array() * dens)) * V.dt * phi.grid.cell_volume)


# ---------------------------------------------------------------------------
# orthonormal systems and densities
# ---------------------------------------------------------------------------


@dataclass
class OrthonormalSystem:
    functions: list[Field]
    coefficients: np.ndarray
    tolerance: float = 1e-10

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        if len(self.functions) != len(self.coefficients):
            raise ValueError("one coefficient per function is required")
        if not self.functions:
            raise ValueError("system must contain at least one function")
        gram = self.gram()
        err = np.max(np.abs(gram - np.eye(len(gram))))
        if err > self.tolerance:
            raise ValueError(f"functions deviate from orthonormality by {err:.3g} > {self.tolerance:g}")

    def gram(self) -> np.ndarray:
        g = self.functions[0].grid
        X = np.stack([f.flat() for f in self.functions])
        return X.conj() @ X.T * g.cell_volume


def density(system: OrthonormalSystem, times) -> SpaceTimeField:
    """``rho(t, x) = sum_j nu_j |U(t) u_j(x)|^2`` per time slice."""
    times = np.asarray(times, dtype=float)
    grid = system.functions[0].grid
    total = np.zeros((len(times),) + grid.shape, dtype=complex)
    for u, nu in zip(system.functions, system.coefficients):
        total += nu * np.abs(evolve_many(u, times)) ** 2
    return SpaceTimeField.from_array(times, grid, total)


# ---------------------------------------------------------------------------
# Littlewood-Paley
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LittlewoodPaleyBank:
    """Dyadic multipliers ``psi_j`` on the dual lattice (numpy FFT ordering).

    ``psi_j(xi) = cos^2(pi/2 (log2|xi| - j))`` for ``|log2|xi| - j| <= 1``,
    so each block lives in ``[2^{j-1}, 2^{j+1}]``, only neighbours overlap
    and the profiles sum to one. The lowest index ``j_min - 1`` is the
    low-frequency block, equal to one on ``|xi| <= 2^{j_min - 1}``.
    """

    grid: GridSpec
    indices: tuple[int, ...]
    profiles: np.ndarray

    def profile(self, j: int) -> np.ndarray:
        if j not in self.indices:
            raise IndexError(f"block {j} outside bank range {self.indices[0]}..{self.indices[-1]}")
        return self.profiles[self.indices.index(j)]


def littlewood_paley_bank(grid: GridSpec, j_min: int | None = None) -> LittlewoodPaleyBank:
    """Bank covering every frequency of the grid.

    ``j_min`` defaults to the first dyadic scale above the lattice spacing.
    """
    knorm = np.sqrt(grid.frequency_norm_squared())
    kmax = float(knorm.max())
    dk = math.pi / grid.box_halfwidth
    if j_min is None:
        j_min = math.ceil(math.log2(dk)) + 1
    j_max = max(j_min, math.ceil(math.log2(kmax)))
    with np.errstate(divide="ignore"):
        s = np.log2(knorm)
    profiles = []
    for j in range(j_min, j_max + 1):
        x = s - j
        prof = np.where(np.abs(x) <= 1.0, np.cos(0.5 * np.pi * np.clip(x, -1.0, 1.0)) ** 2, 0.0)
        if j == j_max:
            prof = np.where(x > 0, 1.0, prof)
        profiles.append(prof)
    ramp = np.sin(0.5 * np.pi * np.clip(s - j_min, -1.0, 0.0)) ** 2
    low = np.where(s <= j_min - 1, 1.0, np.where(s < j_min, ramp, 0.0))
    profiles.insert(0, low)
    indices = tuple(range(j_min - 1, j_max + 1))
    return LittlewoodPaleyBank(grid, indices, np.array(profiles))


def littlewood_paley_apply(bank: LittlewoodPaleyBank, u: Field, j: int) -> Field:
    if u.grid != bank.grid:
        raise ValueError("field and bank live on different grids")
    prof = bank.profile(j)
    return Field(u.grid, _ifft(prof * _fft(u.values, u.grid.dim), u.grid.dim))


def block_norms(bank: LittlewoodPaleyBank, u: Field) -> np.ndarray:
    """``||P_j u||_2`` for every block, computed on the Fourier side."""
    uhat2 = np.abs(_fft(u.values, u.grid.dim)) ** 2
    return np.sqrt(np.array([np.sum(p**2 * uhat2) for p in bank.profiles]) * u.grid.cell_volume)


def strichartz_lhs(u: Field, p, q, times) -> float:
    """``|| U(t) u ||_{L^p_t L^q_x}`` over the given uniform time window."""
    times = np.asarray(times, dtype=float)
    stf = SpaceTimeField.from_array(times, u.grid, evolve_many(u, times))
    return mixed_norm(stf, p, q)


__all__ = [
    "INF",
    "GammaOperator",
    "LittlewoodPaleyBank",
    "MAX_DENSE_NODES",
    "OrthonormalSystem",
    "block_norms",
    "density",
    "evolve_many",
    "free_evolve",
    "gamma_operator",
    "gamma_quadratic_form",
    "littlewood_paley_apply",
    "littlewood_paley_bank",
    "recurrence_period",
    "strichartz_lhs",
]
