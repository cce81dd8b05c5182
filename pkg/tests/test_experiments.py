import math

import numpy as np
import pytest
from scipy import integrate, special

from helpers import gaussian, scaled_circle
from schatten_lab import experiments as ex
from schatten_lab import propagator as prop
from schatten_lab.grid import Field, SpaceTimeField, make_grid
from schatten_lab.surface import circle_quadrature, flat_segment_quadrature, sphere_quadrature


def small_translation(L=64.0, n=128, dt=0.125):
    g = make_grid(1, n, L)
    return ex.TranslationExperiment(ex.default_bump(g, dt))


class TestReport:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            ex.ExperimentReport("x", ["a"], [])

    def test_rejects_ragged_rows(self):
        with pytest.raises(ValueError):
            ex.ExperimentReport("x", ["a", "b"], [(1, 2), (3,)])

    def test_column(self):
        r = ex.ExperimentReport("x", ["a", "b"], [(1, 2), (3, 4)])
        np.testing.assert_array_equal(r.column("b"), [2, 4])


class TestDecayReport:
    def test_schema_and_slope(self):
        rep = ex.decay_report(circle_quadrature(1024), np.geomspace(10, 100, 6))
        assert rep.columns == ["r", "rms_value", "fit_slope", "fit_stderr"]
        assert abs(rep.fitted_exponents["decay"][0] + 0.5) < 0.05


class TestSchattenScan:
    def test_trace_equals_trace_class_bound(self):
        # conj(W) T_S W is positive, so its trace norm is its trace
        rep = ex.schatten_scan(scaled_circle(24, 2.0), make_grid(2, 24, 6.0), [1, 2, 3])
        row = rep.rows[0]
        assert row[2] == pytest.approx(row[-1], rel=1e-10)
        norms = rep.column("schatten_norm")
        assert np.all(np.diff(norms) <= 0)
        assert np.all(rep.column("weak_quasinorm") <= norms * (1 + 1e-12))

    def test_seeded(self):
        args = (scaled_circle(16, 2.0), make_grid(2, 16, 4.0), [1, 2])
        assert ex.schatten_scan(*args, seed=3).rows == ex.schatten_scan(*args, seed=3).rows


class TestSemiclassicalKernel:
    def test_diagonal_is_ball_volume(self):
        for h in (0.5, 0.1):
            k = ex.semiclassical_kernel(circle_quadrature(64), h)
            np.testing.assert_allclose(np.diag(k.matrix).real, math.pi / h**2, rtol=1e-15)
            k3 = ex.semiclassical_kernel(sphere_quadrature(64), h)
            np.testing.assert_allclose(np.diag(k3.matrix).real, 4 * math.pi / (3 * h**3), rtol=1e-15)

    def test_hermitian_psd(self):
        for quad in (circle_quadrature(128), sphere_quadrature(200)):
            W = ex.semiclassical_kernel(quad, 0.25).weighted()
            assert np.max(np.abs(W - W.conj().T)) == 0
            ev = np.linalg.eigvalsh(W)
            assert ev.min() >= -1e-10 * ev.max()

    def test_off_diagonal_against_radial_integral(self):
        quad = circle_quadrature(16)
        h = 0.5
        k = ex.semiclassical_kernel(quad, h)
        v = np.linalg.norm(quad.nodes[0] - quad.nodes[3])
        ref = integrate.quad(lambda r: 2 * math.pi * r * special.j0(r * v), 0, 1 / h)[0]
        assert k.matrix[0, 3].real == pytest.approx(ref, rel=1e-10)

    def test_sphere_kernel_small_argument_continuity(self):
        from schatten_lab.surface import SurfaceKind, SurfaceQuadrature

        eps = np.array([1e-4, 0.05 * 0.999, 0.05 * 1.001, 0.5, 3.0])
        nodes = np.column_stack([np.r_[0.0, eps], np.zeros(6), np.zeros(6)])
        q = SurfaceQuadrature(3, nodes, np.ones(6), SurfaceKind.SPHERE, True, 1.0)
        row = ex.semiclassical_kernel(q, 1.0).matrix[0].real
        # (sin z - z cos z) / z^3 = j_1(z) / z
        exact = np.r_[4 * math.pi / 3, 4 * math.pi * special.spherical_jn(1, eps) / eps]
        np.testing.assert_allclose(row, exact, rtol=1e-12)

    def test_unsupported_dimension(self):
        from schatten_lab.surface import SurfaceKind, SurfaceQuadrature

        q4 = SurfaceQuadrature(4, np.eye(4), np.ones(4), SurfaceKind.SPHERE, True, 1.0)
        with pytest.raises(ValueError):
            ex.semiclassical_kernel(q4, 0.5)
        with pytest.raises(ValueError):
            ex.semiclassical_kernel(circle_quadrature(8), 0.0)


class TestSemiclassicalScan:
    def test_small_scan(self):
        rep = ex.semiclassical_scan(circle_quadrature(512), [1 / 2, 1 / 4, 1 / 8, 1 / 16, 1 / 32], 1.2)
        np.testing.assert_allclose(rep.column("diagonal"), math.pi * rep.column("inv_h") ** 2, rtol=1e-15)
        assert "schatten_3" in rep.columns
        slope, err = rep.fitted_exponents["count_above_half"]
        assert abs(slope - 1) < 0.3

    def test_needs_a_decade(self):
        with pytest.raises(ValueError):
            ex.semiclassical_scan(circle_quadrature(512), [1 / 2, 1 / 4, 1 / 8], 1.2)

    def test_needs_fine_nodes(self):
        with pytest.raises(ValueError):
            ex.semiclassical_scan(circle_quadrature(64), [1, 1 / 4, 1 / 16], 1.2)

    def test_needs_curved_surface(self):
        with pytest.raises(ValueError):
            ex.semiclassical_scan(flat_segment_quadrature(512), [1, 1 / 16], 1.2)


class TestNoncompactness:
    def setup_method(self):
        self.g = make_grid(1, 64, 12.0)
        phi = gaussian(self.g)
        self.phi = phi * (1 / phi.norm())

    def test_constant_in_time_probe(self):
        rep = ex.noncompactness_probe(gaussian(self.g), self.phi, range(9), 0.5, 512)
        assert rep.metadata["relative_variation"] <= 1e-8
        assert rep.column("constant_in_time").min() > 0
        assert rep.metadata["contrast_decay"] > 0.5

    def test_zero_weight(self):
        rep = ex.noncompactness_probe(Field(self.g, np.zeros(64)), self.phi, range(4), 0.5, 256)
        assert np.all(rep.column("constant_in_time") == 0)
        assert np.all(rep.column("time_localized") == 0)

    def test_window_too_short(self):
        with pytest.raises(ValueError):
            ex.noncompactness_probe(gaussian(self.g), self.phi, range(9), 20.0, 64)


class TestTranslationExperiment:
    def test_bump_validation(self):
        g = make_grid(1, 16, 4.0)
        t = np.arange(-3, 4) * 0.125
        neg = SpaceTimeField.from_function(t, g, lambda s, x: -np.exp(-x**2) + 0 * s)
        with pytest.raises(ValueError):
            ex.TranslationExperiment(neg)
        wide = SpaceTimeField.from_function(np.arange(-4, 5) * 0.125, g, lambda s, x: np.exp(-x**2) + 0 * s)
        with pytest.raises(ValueError):
            ex.TranslationExperiment(wide)

    def test_default_power(self):
        assert small_translation().power == 3

    def test_single_copy_has_no_remainder(self):
        rep = ex.translation_scaling(small_translation(), [2.0, 4.0], [1])
        assert np.all(rep.column("remainder") == 0)
        np.testing.assert_allclose(rep.column("trace_total"), rep.column("diagonal"), rtol=1e-12)

    def test_expansion_closes(self):
        rep = ex.translation_scaling(small_translation(), [1.0, 3.0], [2, 3])
        scale = np.abs(rep.column("trace_total")).max()
        assert np.max(np.abs(rep.column("closure_residual"))) <= 1e-12 * scale

    def test_overlapping_copies_rejected(self):
        with pytest.raises(ValueError):
            ex.translation_scaling(small_translation(), [0.5], [2])

    def test_periodic_cap(self):
        exp = small_translation(L=16.0, n=64)
        cap = prop.recurrence_period(exp.grid) / 3
        with pytest.raises(ValueError):
            ex.translation_scaling(exp, [math.ceil(cap) + 1.0], [2])

    def test_off_grid_separation(self):
        with pytest.raises(ValueError):
            ex.translation_scaling(small_translation(), [2.1], [2])

    def test_potential_layout(self):
        exp = small_translation()
        V = exp.potential(3, 2.0)
        arr = V.array().real
        assert V.dt == exp.dt
        assert arr.sum() == pytest.approx(3 * exp.v.array().real.sum())
        assert np.all(np.abs(V.times[np.any(arr > 0, axis=1)] - np.round(V.times[np.any(arr > 0, axis=1)] / 2) * 2) < 0.5)

    def test_remainder_nonincreasing_in_separation(self):
        rep = ex.translation_scaling(small_translation(), [2.0, 4.0, 8.0, 16.0], [2, 4])
        for N in (2, 4):
            rem = np.abs([r[4] for r in rep.rows if r[0] == N])
            assert np.all(np.diff(rem[1:]) <= 1e-14)

    def test_norm_growth(self):
        rep = ex.translation_scaling(small_translation(), [4.0], [1, 2, 4])
        slope, _ = rep.fitted_exponents["v_norm_vs_N"]
        assert slope == pytest.approx(0.5, abs=1e-10)  # N^{2/p} with p = 4


class TestDecoupling:
    def test_baseline_and_decay(self):
        exp = small_translation()
        rep = ex.decoupling_decay(exp, [0.0, 8.0, 32.0])
        A = exp.single_bump().matrix
        from schatten_lab.schatten import schatten_norm, singular_values

        assert rep.rows[0][1] == pytest.approx(schatten_norm(singular_values(A @ A), 1.5), rel=1e-12)
        assert rep.rows[0][1] > 0
        assert rep.rows[-1][2] < rep.rows[1][2] < 1

    def test_zero_bump(self):
        g = make_grid(1, 32, 8.0)
        t = np.arange(-3, 4) * 0.125
        exp = ex.TranslationExperiment(SpaceTimeField.from_array(t, g, np.zeros((7, 32))))
        rep = ex.decoupling_decay(exp, [0.0, 1.0])
        assert np.all(rep.column("schatten_norm") == 0)


class TestOrthonormalRatio:
    quad = circle_quadrature(512)

    def run(self, M_list, **kw):
        kw.setdefault("radius", 300.0)
        kw.setdefault("boundary_tolerance", 0.2)
        return ex.orthonormal_ratio(self.quad, M_list, 1.2, **kw)

    def test_nondecreasing_in_M(self):
        rep = self.run([1, 2, 4, 8, 16])
        assert np.all(np.diff(rep.column("lhs")) >= 0)
        assert np.all(rep.column("lhs") <= rep.column("triangle_bound") * (1 + 1e-12))

    def test_single_function(self):
        rep = self.run([1])
        r = (np.arange(int(300 / 0.25)) + 0.5) * 0.25
        single = (2 * math.pi) ** 0.5 * special.j0(r)  # R* e_0 = sqrt(2 pi) J_0(|x|)
        direct = (np.sum(2 * math.pi * r * 0.25 * np.abs(single) ** 6)) ** (1 / 3)
        assert rep.rows[0][1] == pytest.approx(direct, rel=1e-9)

    def test_single_nonzero_coefficient(self):
        nu = np.zeros(8)
        nu[0] = 1.0
        a = self.run([8], nu=nu).rows[0][1]
        assert a == pytest.approx(self.run([1]).rows[0][1], rel=1e-14)

    def test_boundary_flag(self):
        with pytest.raises(ex.FlaggedRunError) as info:
            ex.orthonormal_ratio(self.quad, [1, 32], 1.2, radius=20.0)
        assert info.value.report is not None and info.value.report.flags

    def test_preconditions(self):
        with pytest.raises(ValueError):
            ex.orthonormal_ratio(self.quad, [1], 1.5)
        with pytest.raises(ValueError):
            ex.orthonormal_ratio(sphere_quadrature(64), [1], 1.2)
        with pytest.raises(ValueError):
            ex.orthonormal_ratio(self.quad, [1], 1.2, radius=1000.0)


class TestRefined:
    g = make_grid(1, 128, 16.0)
    times = np.arange(64) / 64

    def test_exponent_relation(self):
        u = ex.dyadic_harmonic(self.g, 1)
        with pytest.raises(ValueError):
            ex.refined_strichartz_check(u, 4, 4, self.times)
        with pytest.raises(ValueError):
            ex.check_refined_exponents(3, 2, 6)
        ex.check_refined_exponents(2, 4, 4)

    def test_single_block(self):
        u = ex.dyadic_harmonic(self.g, 1)
        c = ex.refined_strichartz_check(u, 6, 6, self.times)
        bank = prop.littlewood_paley_bank(self.g)
        assert prop.block_norms(bank, u).max() >= u.norm() / math.sqrt(3)
        assert c.rhs2 == pytest.approx(u.norm(), rel=0.2)

    def test_two_blocks(self):
        u = ex.two_block_datum(self.g, -1, 3)
        assert u.norm() == pytest.approx(1.0, rel=1e-12)
        bank = prop.littlewood_paley_bank(self.g)
        assert prop.block_norms(bank, u).max() == pytest.approx(2**-0.5, rel=1e-3)
        c = ex.refined_strichartz_check(u, 6, 6, self.times)
        assert c.rhs2 == pytest.approx(2 ** (-(6 - 2) / (4 * 6)), rel=1e-3)

    def test_two_blocks_need_separation(self):
        with pytest.raises(ValueError):
            ex.two_block_datum(self.g, 0, 2)

    def test_chain_on_random_data(self):
        rng = np.random.default_rng(0)
        bank = prop.littlewood_paley_bank(self.g)
        for _ in range(20):
            u = ex.random_band_limited(self.g, rng, 8.0)
            c = ex.refined_strichartz_check(u, 6, 6, self.times, bank)
            assert c.rhs1 <= c.rhs2 * (1 + 1e-12)
            assert 0 < c.lhs / c.rhs1 < 10

    def test_embedding_preserves_norm_and_values(self):
        u = ex.random_band_limited(self.g, np.random.default_rng(1), 8.0)
        fine = ex.embed_field(u, make_grid(1, 256, 16.0))
        assert fine.norm() == pytest.approx(u.norm(), rel=1e-12)
        np.testing.assert_allclose(fine.values[::2], u.values, atol=1e-13)

    def test_embedding_rejects_nyquist(self):
        u = Field(self.g, np.cos(math.pi / self.g.spacing * self.g.axis()) + 0j)
        with pytest.raises(ValueError):
            ex.embed_field(u, make_grid(1, 256, 16.0))

    def test_family_is_seeded(self):
        a = ex.refined_family(self.g, 5, seed=4, band=8.0, dt=1 / 64)
        b = ex.refined_family(self.g, 5, seed=4, band=8.0, dt=1 / 64)
        assert a.rows == b.rows
