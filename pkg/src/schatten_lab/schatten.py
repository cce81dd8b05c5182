"""Singular spectra, Schatten norms, weak-Schatten quasinorms and trace powers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .extension import FactoredOperator
from .grid import INF, Field

ZERO_CUTOFF = 1e-10
"""Singular values below ``ZERO_CUTOFF * mu_1`` count as numerically zero."""


class SpectrumError(ArithmeticError):
    """Raised when a spectral computation breaks down numerically."""


@dataclass(frozen=True, eq=False)
class SingularSpectrum:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("spectrum must be one-dimensional")
        if np.any(v < 0):
            raise ValueError("singular values must be nonnegative")
        if np.any(np.diff(v) > 0):
            raise ValueError("singular values must be sorted nonincreasing")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    @property
    def top(self) -> float:
        return float(self.values[0]) if len(self.values) else 0.0

    def significant(self) -> np.ndarray:
        """Values above the numerical-zero cutoff relative to the largest one."""
        return self.values[self.values > ZERO_CUTOFF * self.top]


def _as_spectrum(values) -> SingularSpectrum:
    v = np.clip(np.asarray(values, dtype=float), 0.0, None)
    return SingularSpectrum(np.sort(v)[::-1])


def singular_values(op) -> SingularSpectrum:
    """Descending singular values of a factored operator or a dense matrix.

    For ``M = A C^*`` both factors are QR-reduced, ``A = Q_A R_A`` and
    ``C = Q_C R_C``, so the nonzero singular values of M are those of the
    K x K matrix ``R_A R_C^*``; grid size never enters the SVD.
    """
    if isinstance(op, FactoredOperator):
        _, RA = np.linalg.qr(op.left_factor, mode="reduced")
        _, RC = np.linalg.qr(op.right_factor, mode="reduced")
        mat = RA @ RC.conj().T
    else:
        mat = getattr(op, "matrix", op)
        mat = np.asarray(mat)
        if mat.ndim != 2:
            raise ValueError("dense operator must be a 2-d array")
    if not np.all(np.isfinite(mat)):
        raise SpectrumError("operator contains non-finite entries")
    try:
        s = np.linalg.svd(mat, compute_uv=False)
    except np.linalg.LinAlgError:
        try:
            s = scipy.linalg.svd(mat, compute_uv=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as exc:
            raise SpectrumError(f"SVD did not converge: {exc}") from exc
    return _as_spectrum(s)


def schatten_norm(spec: SingularSpectrum, alpha) -> float:
    if alpha != INF and not alpha >= 1:
        raise ValueError(f"Schatten exponent must lie in [1, inf], got {alpha!r}")
    v = spec.values
    if len(v) == 0:
        return 0.0
    if alpha == INF:
        return float(v[0])
    top = v[0]
    if top == 0:
        return 0.0
    # scale out the top value to keep large alpha from overflowing
    return float(top * np.sum((v / top) ** alpha) ** (1.0 / alpha))


def weak_schatten_quasinorm(spec: SingularSpectrum, alpha) -> float:
    """``sup_n n^{1/alpha} mu_n`` over the numerically nonzero values."""
    if alpha == INF or not alpha >= 1:
        raise ValueError(f"weak Schatten exponent must lie in [1, inf), got {alpha!r}")
    v = spec.significant()
    if len(v) == 0:
        return 0.0
    n = np.arange(1, len(v) + 1)
    return float(np.max(n ** (1.0 / alpha) * v))


def trace_power(op, m: int) -> complex:
    """``tr(M^m)``; factored operators use the cyclic reduction ``tr (C^* A)^m``."""
    if int(m) != m or m < 1:
        raise ValueError(f"power must be a positive integer, got {m!r}")
    if isinstance(op, FactoredOperator):
        mat = op.reduced()
    else:
        mat = np.asarray(getattr(op, "matrix", op))
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("trace power needs a square operator")
    return complex(np.trace(np.linalg.matrix_power(mat, int(m))))


def hs_norm_from_kernel(W1: Field, kernel, W2: Field) -> float:
    """Hilbert-Schmidt norm of ``W1 G W2`` from the integral kernel ``G(x, y)``.

    ``kernel`` takes point arrays ``x`` of shape ``(n, 1, dim)`` and ``y`` of
    shape ``(1, n, dim)`` and returns the broadcast kernel values.
    """
    if W1.grid != W2.grid:
        raise ValueError("weights live on different grids")
    g = W1.grid
    pts = g.points()
    total = 0.0
    a = np.abs(W1.flat()) ** 2
    b = np.abs(W2.flat()) ** 2
    chunk = max(1, 4_000_000 // len(pts))
    for s in range(0, len(pts), chunk):
        kv = np.broadcast_to(kernel(pts[s:s + chunk, None, :], pts[None, :, :]), (len(pts[s:s + chunk]), len(pts)))
        total += float(a[s:s + chunk] @ (np.abs(kv) ** 2) @ b)
    return math.sqrt(total * g.cell_volume**2)
