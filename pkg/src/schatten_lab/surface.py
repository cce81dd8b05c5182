"""Quadratures for hypersurfaces and the Fourier transform of surface measure.

Every quadrature is a set of nodes ``xi_k`` with positive weights ``w_k``
such that ``sum_k w_k g(xi_k)`` approximates ``\\int_S g d(sigma)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class SurfaceKind(enum.Enum):
    CIRCLE = "circle"
    SPHERE = "sphere"
    FLAT_SEGMENT = "flat_segment"
    PARABOLOID = "paraboloid"


@dataclass(frozen=True, eq=False)
class SurfaceQuadrature:
    ambient_dim: int
    nodes: np.ndarray
    weights: np.ndarray
    kind: SurfaceKind
    curvature_nonvanishing: bool
    node_spacing: float

    def __post_init__(self):
        nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape[1] != self.ambient_dim:
            raise ValueError(f"nodes have dimension {nodes.shape[1]}, expected {self.ambient_dim}")
        if len(weights) != len(nodes) or len(nodes) < 1:
            raise ValueError("need at least one node and one weight per node")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be strictly positive")
        if self.kind is SurfaceKind.FLAT_SEGMENT and self.curvature_nonvanishing:
            raise ValueError("a flat segment has vanishing curvature")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.weights)

    @property
    def total_measure(self) -> float:
        return float(self.weights.sum())

    @property
    def aliasing_radius(self) -> float:
        """Radius beyond which plane waves are no longer resolved by the nodes."""
        return math.pi / self.node_spacing

    @property
    def max_frequency(self) -> float:
        """Largest coordinate magnitude among the nodes."""
        return float(np.abs(self.nodes).max())


def circle_quadrature(K: int) -> SurfaceQuadrature:
    """``K`` equispaced nodes on the unit circle, node 0 at ``(1, 0)``."""
    if K < 8:
        raise ValueError(f"circle quadrature needs K >= 8, got {K}")
    theta = 2.0 * np.pi * np.arange(K) / K
    nodes = np.column_stack([np.cos(theta), np.sin(theta)])
    return SurfaceQuadrature(2, nodes, np.full(K, 2.0 * np.pi / K), SurfaceKind.CIRCLE, True, 2.0 * np.pi / K)


def sphere_quadrature(K: int) -> SurfaceQuadrature:
    """Fibonacci lattice on the unit 2-sphere with equal weights ``4 pi / K``."""
    if K < 64:
        raise ValueError(f"sphere quadrature needs K >= 64, got {K}")
    i = np.arange(K) + 0.5
    polar = np.arccos(1.0 - 2.0 * i / K)
    golden = (1.0 + 5.0**0.5) / 2.0
    azim = 2.0 * np.pi * i / golden
    nodes = np.column_stack([np.cos(azim) * np.sin(polar), np.sin(azim) * np.sin(polar), np.cos(polar)])
    return SurfaceQuadrature(
        3, nodes, np.full(K, 4.0 * np.pi / K), SurfaceKind.SPHERE, True, math.sqrt(4.0 * np.pi / K)
    )


def flat_segment_quadrature(K: int, half_length: float = 1.0) -> SurfaceQuadrature:
    """Equispaced nodes on ``{xi_1 = 0} x [-l, l]`` in R^2 (midpoint rule)."""
    if K < 8:
        raise ValueError(f"flat segment quadrature needs K >= 8, got {K}")
    if not half_length > 0:
        raise ValueError(f"half_length must be positive, got {half_length}")
    step = 2.0 * half_length / K
    s = -half_length + step * (np.arange(K) + 0.5)
    nodes = np.column_stack([np.zeros(K), s])
    return SurfaceQuadrature(2, nodes, np.full(K, step), SurfaceKind.FLAT_SEGMENT, False, step)


def paraboloid_quadrature(d: int, xi_max: float, nodes_per_axis: int) -> SurfaceQuadrature:
    """Nodes ``(xi, -|xi|^2)`` over a uniform grid of ``[-xi_max, xi_max)^d``.

    Weights are the d-dimensional cell volume: the push-forward of Lebesgue
    measure on R^d, not the induced surface area.
    """
    if d not in (1, 2):
        raise ValueError(f"paraboloid quadrature supports d in {{1, 2}}, got {d}")
    if not xi_max > 0:
        raise ValueError(f"xi_max must be positive, got {xi_max}")
    if nodes_per_axis < 8:
        raise ValueError(f"nodes_per_axis must be >= 8, got {nodes_per_axis}")
    step = 2.0 * xi_max / nodes_per_axis
    ax = -xi_max + step * np.arange(nodes_per_axis)
    xi = np.stack([c.ravel() for c in np.meshgrid(*([ax] * d), indexing="ij")], axis=-1)
    nodes = np.column_stack([xi, -np.sum(xi**2, axis=1)])
    return SurfaceQuadrature(
        d + 1, nodes, np.full(len(xi), step**d), SurfaceKind.PARABOLOID, True, step
    )


def fourier_transform_of_measure(quad: SurfaceQuadrature, x) -> complex | np.ndarray:
    """``sum_k w_k exp(i x . xi_k)`` at one point or an array of points ``(..., N)``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != quad.ambient_dim:
        raise ValueError(f"point dimension {x.shape[-1]} does not match ambient dimension {quad.ambient_dim}")
    pts = x.reshape(-1, quad.ambient_dim)
    out = np.empty(len(pts), dtype=complex)
    chunk = max(1, 2_000_000 // len(quad))
    for start in range(0, len(pts), chunk):
        phase = pts[start:start + chunk] @ quad.nodes.T
        out[start:start + chunk] = np.exp(1j * phase) @ quad.weights
    if x.ndim == 1:
        return complex(out[0])
    return out.reshape(x.shape[:-1])


@dataclass
class DecayFit:
    slope: float
    stderr: float
    radii: np.ndarray
    rms_values: np.ndarray


def default_directions(ambient_dim: int, count: int = 8) -> np.ndarray:
    """Quasi-uniform unit vectors: equispaced angles in 2-d, a Fibonacci set in 3-d."""
    if ambient_dim == 2:
        phi = 2.0 * np.pi * (np.arange(count) + 0.5) / count
        return np.column_stack([np.cos(phi), np.sin(phi)])
    if ambient_dim == 3:
        i = np.arange(count) + 0.5
        polar = np.arccos(1.0 - 2.0 * i / count)
        azim = 2.0 * np.pi * i / ((1.0 + 5.0**0.5) / 2.0)
        return np.column_stack([np.cos(azim) * np.sin(polar), np.sin(azim) * np.sin(polar), np.cos(polar)])
    raise ValueError("default directions are provided for ambient dimension 2 or 3")


def decay_fit(
    quad: SurfaceQuadrature,
    radii,
    directions=None,
    shell_samples: int = 16,
) -> DecayFit:
    """Fit the power-law decay exponent of ``|dsigma^|`` along rays.

    For each radius the modulus is averaged in the root-mean-square sense over
    the given directions and over ``shell_samples`` radial offsets spread
    across one oscillation period ``[r - pi/2, r + pi/2)``; the slope of
    ``log(rms)`` against ``log(r)`` is returned with its standard error.
    The shell average is what removes Bessel zeros from rotation-invariant
    surfaces, where averaging over directions alone does nothing.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or len(radii) < 3 or np.any(np.diff(radii) <= 0) or radii[0] <= 0:
        raise ValueError("radii must be at least 3 strictly increasing positive values")
    if radii[-1] / radii[0] < 10.0 - 1e-9:
        raise ValueError("radii must span at least one decade")
    if directions is None:
        directions = default_directions(quad.ambient_dim)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    directions = directions / np.linalg.norm(directions, axis=1, keepdims=True)
    if quad.curvature_nonvanishing and len(directions) < 8:
        raise ValueError("curved surfaces need at least 8 directions")
    offsets = math.pi * ((np.arange(shell_samples) + 0.5) / shell_samples - 0.5) if shell_samples > 1 else np.zeros(1)
    if radii[-1] + offsets.max() >= quad.aliasing_radius:
        raise ValueError(
            f"largest radius {radii[-1]:g} exceeds the quadrature's resolvable range {quad.aliasing_radius:g}"
        )
    if radii[0] + offsets.min() <= 0:
        raise ValueError("smallest radius too small for the radial shell average")
    rms = np.empty(len(radii))
    for i, r in enumerate(radii):
        rr = r + offsets
        pts = (rr[:, None, None] * directions[None, :, :]).reshape(-1, quad.ambient_dim)
        vals = fourier_transform_of_measure(quad, pts)
        rms[i] = math.sqrt(np.mean(np.abs(vals) ** 2))
    slope, stderr = fit_loglog(radii, rms)
    return DecayFit(slope, stderr, radii, rms)


def fit_loglog(x, y) -> tuple[float, float]:
    """Least-squares slope of ``log y`` on ``log x`` and its standard error."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    A = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    n = len(lx)
    if n > 2:
        s2 = float(resid @ resid) / (n - 2)
        cov = s2 * np.linalg.inv(A.T @ A)
        stderr = math.sqrt(max(cov[0, 0], 0.0))
    else:
        stderr = float("nan")
    return float(coef[0]), stderr
