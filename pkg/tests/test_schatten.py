import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import unitary_group

from helpers import gaussian, random_instance, random_weight, scaled_circle
from schatten_lab.extension import build_weighted_operator
from schatten_lab.grid import INF, Field, make_grid
from schatten_lab.schatten import (
    ZERO_CUTOFF,
    SingularSpectrum,
    SpectrumError,
    hs_norm_from_kernel,
    schatten_norm,
    singular_values,
    trace_power,
    weak_schatten_quasinorm,
)

spectra = st.lists(st.floats(0, 1e3), min_size=1, max_size=30).map(lambda v: SingularSpectrum(np.sort(v)[::-1]))


def factored_matches_dense(op, rtol=1e-8):
    fac = singular_values(op).values
    den = np.linalg.svd(op.dense(), compute_uv=False)
    keep = den > ZERO_CUTOFF * den[0]
    k = int(keep.sum())
    return np.max(np.abs(fac[:k] - den[:k]) / den[:k]) <= rtol and np.all(fac[k:] <= 1e-8 * den[0])


class TestSingularValues:
    def test_diagonal(self):
        np.testing.assert_allclose(singular_values(np.diag([3.0, 4.0])).values, [4, 3])

    def test_rank_one_projection(self):
        v = np.ones(5) / math.sqrt(5)
        np.testing.assert_allclose(singular_values(np.outer(v, v)).values, [1, 0, 0, 0, 0], atol=1e-14)

    @pytest.mark.parametrize("seed", range(20))
    def test_factored_path_matches_dense_svd(self, seed):
        grid, quad, W1, W2 = random_instance(seed)
        assert grid.points_per_axis <= 64 and len(quad) <= 64
        assert factored_matches_dense(build_weighted_operator(W1, W2, quad))

    def test_non_finite_reported(self):
        with pytest.raises(SpectrumError):
            singular_values(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    def test_spectrum_invariants(self):
        with pytest.raises(ValueError):
            SingularSpectrum(np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            SingularSpectrum(np.array([1.0, -0.5]))

    @pytest.mark.parametrize("seed", range(4))
    def test_unitary_invariance(self, seed):
        rng = np.random.default_rng(seed)
        M = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
        U = unitary_group.rvs(12, random_state=seed)
        a = singular_values(M).values
        b = singular_values(U @ M @ U.conj().T).values
        np.testing.assert_allclose(a, b, rtol=1e-10)


class TestSchattenNorm:
    @pytest.mark.parametrize("alpha, expected", [(2, 5.0), (1, 7.0), (INF, 4.0)])
    def test_three_four(self, alpha, expected):
        assert schatten_norm(singular_values(np.diag([3.0, 4.0])), alpha) == pytest.approx(expected)

    def test_rejects_small_alpha(self):
        with pytest.raises(ValueError):
            schatten_norm(SingularSpectrum(np.array([1.0])), 0.5)

    def test_large_alpha_does_not_overflow(self):
        s = SingularSpectrum(np.array([1e200, 1e200]))
        assert schatten_norm(s, 50) == pytest.approx(1e200 * 2 ** (1 / 50))

    @settings(max_examples=60, deadline=None)
    @given(spec=spectra, a=st.floats(1, 20), b=st.floats(1, 20))
    def test_monotone_in_alpha(self, spec, a, b):
        lo, hi = sorted((a, b))
        assert schatten_norm(spec, lo) >= schatten_norm(spec, hi) * (1 - 1e-12)
        assert schatten_norm(spec, hi) >= schatten_norm(spec, INF) * (1 - 1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_holder(self, seed):
        rng = np.random.default_rng(seed)
        A = rng.normal(size=(10, 10)) + 1j * rng.normal(size=(10, 10))
        B = rng.normal(size=(10, 10))
        s1 = schatten_norm(singular_values(A @ B), 1)
        assert s1 <= schatten_norm(singular_values(A), 2) * schatten_norm(singular_values(B), 2) * (1 + 1e-10)


class TestWeakQuasinorm:
    def test_power_law(self):
        n = np.arange(1, 101)
        assert weak_schatten_quasinorm(SingularSpectrum(n**-0.5), 2) == pytest.approx(1.0, rel=1e-14)

    @pytest.mark.parametrize("alpha", [1, 2, 7.5])
    def test_rank_one(self, alpha):
        assert weak_schatten_quasinorm(SingularSpectrum(np.array([1.0, 0, 0])), alpha) == 1.0

    def test_rejects_infinite_alpha(self):
        with pytest.raises(ValueError):
            weak_schatten_quasinorm(SingularSpectrum(np.array([1.0])), INF)

    @settings(max_examples=60, deadline=None)
    @given(spec=spectra, a=st.floats(1, 10))
    def test_below_strong_norm(self, spec, a):
        assert weak_schatten_quasinorm(spec, a) <= schatten_norm(spec, a) * (1 + 1e-12)

    def test_random_psd(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(20, 20))
        s = singular_values(X @ X.T)
        for a in (1, 2, 3):
            assert weak_schatten_quasinorm(s, a) <= schatten_norm(s, a)


class TestTracePower:
    def test_diagonal(self):
        assert trace_power(np.diag([1.0, 2.0]), 3) == pytest.approx(9.0)

    @pytest.mark.parametrize("m", [1, 2, 5])
    def test_projection(self, m):
        Q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(8, 3)))
        assert trace_power(Q @ Q.T, m) == pytest.approx(3.0, rel=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_reduced_matches_dense(self, seed):
        grid, quad, W1, W2 = random_instance(seed)
        op = build_weighted_operator(W1, W2, quad)
        red = trace_power(op, 3)
        den = complex(np.trace(np.linalg.matrix_power(op.dense(), 3)))
        assert abs(red - den) <= 1e-10 * abs(den)

    def test_rejects_bad_power(self):
        with pytest.raises(ValueError):
            trace_power(np.eye(2), 0)
        with pytest.raises(ValueError):
            trace_power(np.ones((2, 3)), 2)

    @pytest.mark.parametrize("seed", range(3))
    def test_trace_is_eigenvalue_sum(self, seed):
        X = np.random.default_rng(seed).normal(size=(9, 9))
        H = X + X.T
        assert trace_power(H, 1).real == pytest.approx(np.linalg.eigvalsh(H).sum(), rel=1e-10, abs=1e-12)


class TestHilbertSchmidt:
    def test_unit_kernel_unit_box(self):
        g = make_grid(2, 8, 0.5)
        one = Field(g, np.ones(g.shape))
        assert hs_norm_from_kernel(one, lambda x, y: 1.0, one) == pytest.approx(1.0, rel=1e-14)

    def test_zero_weight(self):
        g = make_grid(1, 8, 1.0)
        assert hs_norm_from_kernel(gaussian(g), lambda x, y: 1.0, Field(g, np.zeros(g.shape))) == 0.0

    def test_matches_spectral_path(self):
        g = make_grid(2, 24, 6.0)
        q = scaled_circle(24, 2.0)
        rng = np.random.default_rng(3)
        W1, W2 = random_weight(g, rng, 1.5), random_weight(g, rng, 1.5)

        def kernel(x, y):
            d = x - y
            return np.exp(1j * (d @ q.nodes.T)) @ q.weights

        hs = hs_norm_from_kernel(W1, kernel, W2)
        spec = schatten_norm(singular_values(build_weighted_operator(W1, W2, q)), 2)
        assert hs == pytest.approx(spec, rel=1e-8)
