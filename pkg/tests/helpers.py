"""Shared builders for the test-suite."""

import math

import numpy as np

from schatten_lab.grid import Field, make_grid
from schatten_lab.surface import SurfaceKind, SurfaceQuadrature, circle_quadrature

# criterion number -> one-line verdict, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def report_criterion(number, title, checks):
    """Record and print one PASS/FAIL line; ``checks`` maps a label to (ok, detail)."""
    ok = all(c[0] for c in checks.values())
    detail = "; ".join(f"{k}={c[1]}" + ("" if c[0] else " (FAILED)") for k, c in checks.items())
    line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def scaled_circle(K, radius):
    q = circle_quadrature(K)
    return SurfaceQuadrature(2, q.nodes * radius, q.weights * radius, SurfaceKind.CIRCLE, True, q.node_spacing * radius)


def gaussian(grid, width=1.0, centre=0.0):
    return Field.from_function(grid, lambda *xs: np.exp(-sum((x - centre) ** 2 for x in xs) / (2 * width**2)))


def random_weight(grid, rng, width=None):
    """Gaussian envelope times a random complex factor."""
    width = width if width is not None else grid.box_halfwidth / 4
    env = gaussian(grid, width).values
    z = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    return Field(grid, env * z)


def random_instance(seed):
    """A weighted-operator instance with well separated circle nodes.

    The circle radius is at least K / L, so neighbouring nodes are at least
    one dual-lattice spacing apart and the plane-wave factor is well
    conditioned; it stays inside 90% of the grid's resolvable band.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.choice([16, 32]))
    L = float(rng.uniform(4.0, 8.0))
    grid = make_grid(2, n, L)
    kmax = 0.9 * math.pi * n / (2 * L)
    K = int(rng.integers(8, min(64, int(kmax * L)) + 1))
    radius = float(rng.uniform(K / L, kmax))
    quad = scaled_circle(K, radius)
    return grid, quad, random_weight(grid, rng), random_weight(grid, rng)
