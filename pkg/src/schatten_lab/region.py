"""Exponent arithmetic for Schatten-class restriction and Strichartz bounds.

Classifies triples ``(d, q, alpha)`` for the inequality
``|| conj(W) T_S W ||_{S^alpha} <= C || W ||^2_{L^p_t L^q_x}`` on the
paraboloid, where ``2/p + d/q = 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .grid import INF


class Verdict(enum.Enum):
    VALID = "VALID"
    FAIL = "FAIL"
    OPEN = "OPEN"


# short explanations attached to verdicts
THM_MIXED = "mixed Schatten-Strichartz range (q>d+1, alpha>=q)"
PROP_NECESSARY = "necessary condition violated (alpha>=q, alpha>d+1)"
PROP_NEW = "necessary condition violated (alpha>=q/(q-d))"
INTERPOLATION = "interpolation between endpoint and mixed range (alpha>q/(q-d))"
ENDPOINT = "endpoint Strichartz (q=d, alpha=inf)"
BELOW_ENDPOINT = "below the endpoint Strichartz exponent (q<d): cannot hold"
ENDPOINT_NOT_SCHATTEN = "q=d+1, alpha=d+1: estimate does not hold"
DASHED_LINE = "line alpha=q/(q-d): open (weak-Schatten bound conjectured)"
D1_ENDPOINT = "endpoint q=2 (d=1): improvement expected but unresolved"
D2_ENDPOINT_FAILS = "endpoint Strichartz estimate is known to fail (d=2)"
D2_NO_INTERPOLATION = "d=2 endpoint region: no interpolation leg available"


@dataclass(frozen=True)
class ExponentQuery:
    d: int
    q: float | Fraction
    alpha: float | Fraction

    def __post_init__(self):
        if isinstance(self.d, bool) or int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        for name in ("q", "alpha"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float, Fraction)):
                raise TypeError(f"{name} must be a real number, got {v!r}")
            if v != INF and not (math.isfinite(v) and v >= 1):
                raise ValueError(f"{name} must be a real >= 1 or inf, got {v!r}")
        if self.q == INF:
            raise ValueError("q must be finite")


@dataclass(frozen=True)
class RegionVerdict:
    verdict: Verdict
    reason: str


def _exact(x):
    """Exact rational image of a finite real (floats are taken at face value)."""
    if isinstance(x, Rational):
        return Fraction(x)
    return Fraction(x)


def _num(x):
    return float(x) if isinstance(x, Fraction) else x


# ---------------------------------------------------------------------------
# compact-surface Schatten exponent
# ---------------------------------------------------------------------------


def stein_tomas_endpoint(N: int) -> Fraction:
    """Largest admissible Lebesgue exponent ``2(N+1)/(N+3)``."""
    return Fraction(2 * (N + 1), N + 3)


def compact_alpha(N: int, p) -> float | Fraction:
    """Optimal Schatten exponent ``(N-1) p / (2N - (N+1) p)`` for a compact curved surface.

    Rational inputs give an exact :class:`~fractions.Fraction`; float inputs
    give a float, snapped to exactly ``N + 1`` at the endpoint.
    """
    if int(N) != N or N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N!r}")
    end = stein_tomas_endpoint(N)
    if isinstance(p, Rational):
        pe = Fraction(p)
        if not (1 <= pe <= end):
            raise ValueError(f"p must lie in [1, {end}], got {p}")
        return Fraction(N - 1) * pe / (2 * N - (N + 1) * pe)
    p = float(p)
    if math.isclose(p, float(end), rel_tol=1e-12):
        return float(N + 1)
    if not (1.0 <= p <= float(end)):
        raise ValueError(f"p must lie in [1, {float(end):.6g}], got {p}")
    return (N - 1) * p / (2 * N - (N + 1) * p)


def lebesgue_exponent_for_alpha(N: int, alpha):
    """Inverse of :func:`compact_alpha`: ``p = 2 N alpha / ((N-1) + (N+1) alpha)``."""
    if alpha == INF:
        raise ValueError("alpha must be finite")
    if not 1 <= alpha <= N + 1:
        raise ValueError(f"alpha must lie in [1, {N + 1}], got {alpha}")
    return 2 * N * alpha / ((N - 1) + (N + 1) * alpha)


# ---------------------------------------------------------------------------
# duality helpers
# ---------------------------------------------------------------------------


def dual_exponent(p):
    """Hoelder conjugate ``p / (p - 1)``; ``1 <-> inf``."""
    if p == INF:
        return 1
    if p == 1:
        return INF
    if not p > 1:
        raise ValueError(f"dual exponent needs p >= 1, got {p!r}")
    return p / (p - 1)


def scaling_partner(d: int, q):
    """``p`` with ``2/p = 1 - d/q``; ``q = d`` gives ``p = inf``."""
    if not q > 0:
        raise ValueError(f"q must be positive, got {q!r}")
    if q < d:
        raise ValueError(f"scaling relation 2/p = 1 - d/q needs q >= d (got d={d}, q={q})")
    if q == d:
        return INF
    two_over_p = 1 - Fraction(d) / _exact(q) if isinstance(q, Rational) else 1 - d / q
    return 2 / two_over_p


# ---------------------------------------------------------------------------
# mixed Schatten-Strichartz classifier
# ---------------------------------------------------------------------------


def classify_mixed(query: ExponentQuery) -> RegionVerdict:
    d = int(query.d)
    q = _exact(query.q)
    a_inf = query.alpha == INF
    a = None if a_inf else _exact(query.alpha)

    def ge(x):  # alpha >= x, with x possibly infinite
        return a_inf or (x is not None and a >= x)

    def gt(x):
        return a_inf or (x is not None and a > x)

    if d == 1:
        if q < 2:
            return RegionVerdict(Verdict.FAIL, BELOW_ENDPOINT)
        if not ge(q):
            return RegionVerdict(Verdict.FAIL, PROP_NECESSARY)
        if q > 2:
            return RegionVerdict(Verdict.VALID, THM_MIXED)
        # q == 2: endpoint Strichartz for d = 1
        if not gt(Fraction(2)):
            return RegionVerdict(Verdict.FAIL, PROP_NECESSARY)
        if a_inf:
            return RegionVerdict(Verdict.VALID, D1_ENDPOINT)
        return RegionVerdict(Verdict.OPEN, D1_ENDPOINT)

    if q < d:
        return RegionVerdict(Verdict.FAIL, BELOW_ENDPOINT)
    if not ge(q):
        return RegionVerdict(Verdict.FAIL, PROP_NECESSARY)
    if q > d + 1:
        return RegionVerdict(Verdict.VALID, THM_MIXED)

    # d <= q <= d + 1
    threshold = None if q == d else q / (q - d)  # None encodes +inf
    if threshold is None:
        if not a_inf:
            return RegionVerdict(Verdict.FAIL, PROP_NEW)
    elif not ge(threshold):
        return RegionVerdict(Verdict.FAIL, PROP_NEW)
    if q == d + 1 and not a_inf and a == d + 1:
        return RegionVerdict(Verdict.FAIL, ENDPOINT_NOT_SCHATTEN)

    if d == 2:
        if q == d:
            return RegionVerdict(Verdict.FAIL, D2_ENDPOINT_FAILS)
        return RegionVerdict(Verdict.OPEN, D2_NO_INTERPOLATION)

    if q == d:
        return RegionVerdict(Verdict.VALID, ENDPOINT)
    if gt(threshold):
        return RegionVerdict(Verdict.VALID, INTERPOLATION)
    return RegionVerdict(Verdict.OPEN, DASHED_LINE)


# ---------------------------------------------------------------------------
# region geometry in the (1/q, 1/alpha) plane
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryEdge:
    start: tuple[Fraction, Fraction]
    end: tuple[Fraction, Fraction]
    status: str
    description: str


@dataclass(frozen=True)
class RegionBoundary:
    d: int
    vertices: tuple[tuple[Fraction, Fraction], ...]
    edges: tuple[BoundaryEdge, ...]
    excluded_vertices: tuple[tuple[Fraction, Fraction], ...]

    def polyline(self) -> list[tuple[float, float]]:
        """Closed vertex list (first vertex repeated) as floats."""
        pts = [(float(x), float(y)) for x, y in self.vertices]
        return pts + [pts[0]]


def region_boundary(d: int) -> RegionBoundary:
    if int(d) != d or d < 3:
        raise ValueError(f"region boundary is drawn for d >= 3, got {d!r}")
    o = (Fraction(0), Fraction(0))
    corner = (Fraction(1, d + 1), Fraction(1, d + 1))
    kt = (Fraction(1, d), Fraction(0))
    edges = (
        BoundaryEdge(o, corner, "VALID-closed", "1/alpha = 1/q, valid for 1/q < 1/(d+1)"),
        BoundaryEdge(corner, kt, "OPEN-dashed", "1/alpha = 1 - d/q, conjectured (weak Schatten)"),
        BoundaryEdge(kt, o, "VALID-closed", "1/alpha = 0, operator-norm bounds up to the endpoint Strichartz exponent"),
    )
    return RegionBoundary(d, (o, corner, kt), edges, (corner,))


def write_gnuplot_polyline(boundary: RegionBoundary, path) -> None:
    """Write the closed polygon as whitespace-separated ``1/q 1/alpha`` rows."""
    lines = [
        f"# region boundary d={boundary.d}: columns 1/q 1/alpha",
        *(f"# edge {e.status}: {e.description}" for e in boundary.edges),
        *(f"# excluded vertex {float(x):.12g} {float(y):.12g}" for x, y in boundary.excluded_vertices),
    ]
    lines += [f"{x:.12g} {y:.12g}" for x, y in boundary.polyline()]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
