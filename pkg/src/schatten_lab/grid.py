"""Uniform periodic grids, unitary DFT, and Lebesgue / mixed space-time norms.

Grids cover the box ``[-L, L)^dim`` with ``points_per_axis`` nodes per axis.
Node ``j`` on each axis sits at ``-L + j * spacing``; the origin is therefore
the node with index ``points_per_axis // 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

INF = math.inf
"""Sentinel for the exponent infinity (max / sup semantics)."""


def _check_exponent(q, name="q"):
    if isinstance(q, str):
        raise TypeError(f"{name} must be numeric, got {q!r}")
    if q != INF and not (q >= 1):
        raise ValueError(f"{name} must lie in [1, inf], got {q!r}")


@dataclass(frozen=True)
class GridSpec:
    dim: int
    points_per_axis: int
    box_halfwidth: float

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        if int(self.points_per_axis) != self.points_per_axis or self.points_per_axis < 2:
            raise ValueError(f"points_per_axis must be an integer >= 2, got {self.points_per_axis!r}")
        if self.points_per_axis % 2:
            # the centred DFT convention needs the origin on the grid
            raise ValueError(f"points_per_axis must be even, got {self.points_per_axis!r}")
        if not (self.box_halfwidth > 0) or not math.isfinite(self.box_halfwidth):
            raise ValueError(f"box_halfwidth must be positive and finite, got {self.box_halfwidth!r}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.box_halfwidth / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def volume(self) -> float:
        return (2.0 * self.box_halfwidth) ** self.dim

    def axis(self) -> np.ndarray:
        """Node coordinates along one axis."""
        return -self.box_halfwidth + self.spacing * np.arange(self.points_per_axis)

    def coordinates(self) -> list[np.ndarray]:
        """Meshgrid (``indexing='ij'``) of node coordinates, one array per axis."""
        ax = self.axis()
        return list(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def points(self) -> np.ndarray:
        """All nodes as an array of shape ``(size, dim)`` in C order."""
        return np.stack([c.ravel() for c in self.coordinates()], axis=-1)

    def dual(self) -> "GridSpec":
        """Frequency lattice of the DFT: spacing ``pi / L``, centred at 0."""
        return GridSpec(self.dim, self.points_per_axis, math.pi / self.spacing)

    def frequencies(self) -> list[np.ndarray]:
        """Angular frequencies in numpy FFT ordering (meshgrid, ``indexing='ij'``)."""
        k = 2.0 * np.pi * np.fft.fftfreq(self.points_per_axis, d=self.spacing)
        return list(np.meshgrid(*([k] * self.dim), indexing="ij"))

    def frequency_norm_squared(self) -> np.ndarray:
        """``|xi|^2`` on the dual lattice in numpy FFT ordering."""
        return sum(k**2 for k in self.frequencies())

    def aliasing_radius(self) -> float:
        """Largest per-coordinate frequency resolved by the grid."""
        return math.pi / self.spacing


def make_grid(dim: int, points_per_axis: int, box_halfwidth: float) -> GridSpec:
    return GridSpec(dim, points_per_axis, float(box_halfwidth))


@dataclass
class Field:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.size != self.grid.size:
            raise ValueError(f"field has {values.size} values, grid has {self.grid.size} nodes")
        self.values = values.reshape(self.grid.shape)

    @classmethod
    def from_function(cls, grid: GridSpec, func) -> "Field":
        """Sample ``func(*coords)`` on the grid nodes."""
        return cls(grid, np.broadcast_to(func(*grid.coordinates()), grid.shape))

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def inner(self, other: "Field") -> complex:
        """L^2 inner product, antilinear in the first slot."""
        _same_grid(self.grid, other.grid)
        return complex(np.vdot(self.values, other.values) * self.grid.cell_volume)

    def norm(self) -> float:
        return lq_norm(self, 2)

    def __add__(self, other: "Field") -> "Field":
        _same_grid(self.grid, other.grid)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _same_grid(self.grid, other.grid)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar) -> "Field":
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__


def _same_grid(a: GridSpec, b: GridSpec):
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


def dft(f: Field) -> Field:
    """Unitary DFT onto the dual lattice.

    Approximates ``(2 pi)^{-dim/2} \\int f(x) e^{-i x.xi} dx`` at the dual
    nodes, with the dual grid carrying cell volume ``(pi/L)^dim`` so that
    ``lq_norm(dft(f), 2) == lq_norm(f, 2)`` up to rounding.
    """
    g = f.grid
    axes = tuple(range(g.dim))
    spec = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(f.values, axes=axes), axes=axes, norm="ortho"), axes=axes)
    # ortho fft is unitary on plain sums; rescale to the two cell volumes
    scale = math.sqrt(g.cell_volume / g.dual().cell_volume)
    return Field(g.dual(), spec * scale)


def idft(fhat: Field, grid: GridSpec | None = None) -> Field:
    """Inverse of :func:`dft`. ``grid`` defaults to the dual of ``fhat.grid``."""
    target = grid if grid is not None else fhat.grid.dual()
    if target.dual().points_per_axis != fhat.grid.points_per_axis or not math.isclose(
        target.dual().box_halfwidth, fhat.grid.box_halfwidth, rel_tol=1e-12
    ):
        raise ValueError("spectral field does not live on the dual of the target grid")
    axes = tuple(range(target.dim))
    vals = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(fhat.values, axes=axes), axes=axes, norm="ortho"), axes=axes)
    scale = math.sqrt(fhat.grid.cell_volume / target.cell_volume)
    return Field(target, vals * scale)


def lq_norm(f: Field, q) -> float:
    """``(sum |f|^q h^dim)^{1/q}``; ``q = INF`` gives the max modulus."""
    _check_exponent(q)
    a = np.abs(f.values)
    if q == INF:
        return float(a.max(initial=0.0))
    return float((np.sum(a**q) * f.grid.cell_volume) ** (1.0 / q))


@dataclass
class SpaceTimeField:
    times: np.ndarray
    slices: list[Field] = field(default_factory=list)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or len(self.times) == 0:
            raise ValueError("times must be a nonempty 1-d sequence")
        if len(self.slices) != len(self.times):
            raise ValueError(f"{len(self.times)} times but {len(self.slices)} slices")
        grid = self.slices[0].grid
        for s in self.slices:
            _same_grid(grid, s.grid)
        if len(self.times) > 1:
            steps = np.diff(self.times)
            if np.any(steps <= 0):
                raise ValueError("times must be strictly increasing")
            if np.max(np.abs(steps - steps[0])) > 1e-9 * max(abs(steps[0]), 1.0):
                raise ValueError("time step must be uniform")

    @property
    def grid(self) -> GridSpec:
        return self.slices[0].grid

    @property
    def dt(self) -> float:
        # a single slice is read as one unit-length time cell
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 1.0

    def array(self) -> np.ndarray:
        """Stacked slice values, shape ``(n_times, *grid.shape)``."""
        return np.stack([s.values for s in self.slices])

    @classmethod
    def from_array(cls, times: Sequence[float], grid: GridSpec, values: np.ndarray) -> "SpaceTimeField":
        values = np.asarray(values)
        return cls(np.asarray(times, dtype=float), [Field(grid, v) for v in values])

    @classmethod
    def from_function(cls, times: Sequence[float], grid: GridSpec, func) -> "SpaceTimeField":
        """Sample ``func(t, *coords)`` at each time."""
        coords = grid.coordinates()
        return cls(
            np.asarray(times, dtype=float),
            [Field(grid, np.broadcast_to(func(t, *coords), grid.shape)) for t in times],
        )


def mixed_norm(stf: SpaceTimeField, p, q) -> float:
    """Time-outer, space-inner norm ``L^p_t L^q_x`` with rectangle-rule time weights."""
    _check_exponent(p, "p")
    _check_exponent(q, "q")
    inner = np.array([lq_norm(s, q) for s in stf.slices])
    if p == INF:
        return float(inner.max())
    return float((np.sum(inner**p) * stf.dt) ** (1.0 / p))
