import numpy as np
import pytest
from scipy import optimize

from libs.vare.covariate import ShiftedField, builtin, constant, homogeneous, linear, model_theta
from libs.vare.errors import Degenerate, Nonconvergence, SingularSystem
from libs.vare.estimate import (
    DIV_Z,
    ETA_DIV_Z,
    Quadrature,
    TestFunction,
    build_A,
    build_b,
    check_condition_ii,
    check_condition_iii,
    check_condition_vi_poisson,
    make_test_function,
    mcle,
    mcle_berman_turner,
    model2_closed_form,
    normalise_test_kind,
    poisson_covariance,
    vare,
)
from libs.vare.geometry import regular_grid, volume
from libs.vare.simulate import calibrate_beta, process_preset, replication_rng, simulate

K = 4 * np.pi


@pytest.fixture
def div_z_model2(model2):
    return make_test_function(DIV_Z, model2)


class TestTestFunctions:
    def test_aliases(self):
        assert normalise_test_kind("divz") == DIV_Z
        assert normalise_test_kind(" ETA_DIV_Z ") == ETA_DIV_Z
        with pytest.raises(ValueError):
            normalise_test_kind("grad-z")

    def test_zero_epsilon_falls_back(self, model2):
        h = make_test_function("eta-div-z", model2, epsilon=0.0)
        assert h.kind == DIV_Z and h.mollifier is None and h.epsilon == 0.0

    def test_mollified_needs_window(self, model2):
        with pytest.raises(ValueError):
            make_test_function("eta-z", model2, epsilon=0.1)
        with pytest.raises(ValueError):
            TestFunction(ETA_DIV_Z, model2)

    def test_deep_points_match_plain(self, model2, w1, rng):
        pts = rng.uniform(-0.7, 0.7, size=(50, 2))
        plain = make_test_function(DIV_Z, model2).evaluate(pts)
        mollified = make_test_function(ETA_DIV_Z, model2, w1, epsilon=0.1, resolution=21).evaluate(pts)
        np.testing.assert_allclose(mollified[0], plain[0])
        np.testing.assert_allclose(mollified[1], plain[1])

    def test_mollified_vanishes_on_boundary(self, model2, w1):
        h = make_test_function(ETA_DIV_Z, model2, w1, epsilon=0.1, resolution=21)
        hv, div_h = h.evaluate(np.array([[1.0, 0.0], [-1.0, 0.5], [1.2, 0.0]]))
        assert np.all(hv == 0.0) and np.all(div_h == 0.0)


class TestAssembly:
    def test_empty_pattern(self, model2, div_z_model2):
        empty = np.zeros((0, 2))
        assert np.array_equal(build_A(empty, model2, div_z_model2), np.zeros((2, 2)))
        assert np.array_equal(build_b(empty, model2, div_z_model2), np.zeros(2))

    def test_A_is_gram_matrix(self, model2, div_z_model2, model2_pattern):
        A = build_A(model2_pattern, model2, div_z_model2)
        np.testing.assert_allclose(A, A.T)
        assert np.min(np.linalg.eigvalsh(A)) >= -1e-9

    def test_single_point_model3(self):
        z = builtin("3")
        h = make_test_function(DIV_Z, z)
        u1, u2 = 0.1, 0.2
        a = K * u1 * u2
        dz = K * (u1 + u2) * np.cos(a)
        ddz = -(K ** 2) * (u1 + u2) ** 2 * np.sin(a) + 2 * K * np.cos(a)
        x = np.array([[u1, u2]])
        assert build_A(x, z, h)[0, 0] == pytest.approx(dz ** 2)
        assert build_b(x, z, h)[0] == pytest.approx(ddz)

    def test_b_model2(self, model2, div_z_model2, model2_pattern):
        expected = -(K ** 2) * np.sin(K * model2_pattern.points).sum(axis=0)
        np.testing.assert_allclose(build_b(model2_pattern, model2, div_z_model2), expected)


class TestVare:
    def test_matches_closed_form(self, model2, div_z_model2, model2_pattern):
        result = vare(model2_pattern, model2, div_z_model2)
        np.testing.assert_allclose(result.theta_hat, model2_closed_form(model2_pattern), rtol=1e-10)
        assert result.n == model2_pattern.n
        assert result.condition_number >= 1.0

    def test_solves_estimating_equation(self, model2, div_z_model2, model2_pattern):
        result = vare(model2_pattern, model2, div_z_model2)
        np.testing.assert_allclose(result.A @ result.theta_hat + result.b, 0.0, atol=1e-8 * np.abs(result.b).max())

    def test_too_few_points(self, model2, div_z_model2):
        with pytest.raises(SingularSystem):
            vare(np.array([[0.1, 0.2]]), model2, div_z_model2)

    def test_degenerate_configuration(self, model2, div_z_model2):
        x = np.tile([[0.1, 0.2]], (5, 1))
        with pytest.raises(SingularSystem):
            vare(x, model2, div_z_model2)

    def test_constant_covariate_is_singular(self, rng):
        z = constant([1.0])
        with pytest.raises(SingularSystem):
            vare(rng.uniform(-1, 1, size=(20, 2)), z, make_test_function(DIV_Z, z))

    def test_needs_parameters(self, rng):
        z = homogeneous()
        with pytest.raises(ValueError):
            vare(rng.uniform(-1, 1, size=(20, 2)), z, make_test_function(DIV_Z, z))

    def test_order_invariance(self, model2, div_z_model2, model2_pattern):
        pts = model2_pattern.points
        shuffled = pts[np.random.default_rng(0).permutation(pts.shape[0])]
        np.testing.assert_allclose(
            vare(shuffled, model2, div_z_model2).theta_hat,
            vare(pts, model2, div_z_model2).theta_hat,
            rtol=1e-12,
        )

    def test_translation_invariance(self, model2, div_z_model2, model2_pattern):
        offset = np.array([3.0, -1.5])
        shifted = ShiftedField(model2, offset)
        moved = vare(model2_pattern.points + offset, shifted, make_test_function(DIV_Z, shifted))
        np.testing.assert_allclose(moved.theta_hat, vare(model2_pattern, model2, div_z_model2).theta_hat, rtol=1e-9)

    def test_zero_covariance_for_linear_field(self, rng):
        z = linear([1.0, 1.0])
        result = vare(rng.uniform(-1, 1, size=(30, 2)), z, make_test_function(DIV_Z, z), covariance=True)
        assert result.theta_hat[0] == pytest.approx(0.0, abs=1e-14)
        np.testing.assert_allclose(result.covariance, 0.0, atol=1e-20)

    def test_wald_intervals(self, model2, div_z_model2, model2_pattern):
        result = vare(model2_pattern, model2, div_z_model2, covariance=True)
        se = result.standard_errors()
        ci = result.wald_intervals(0.95)
        assert ci.shape == (2, 2)
        np.testing.assert_allclose(ci[:, 1] - ci[:, 0], 2 * 1.959964 * se, rtol=1e-6)
        assert np.all(ci[:, 0] < result.theta_hat) and np.all(result.theta_hat < ci[:, 1])
        np.testing.assert_allclose(
            poisson_covariance(model2_pattern, model2, div_z_model2, result.theta_hat), result.covariance
        )
        with pytest.raises(ValueError):
            result.wald_intervals(1.5)

    def test_standard_errors_need_covariance(self, model2, div_z_model2, model2_pattern):
        with pytest.raises(ValueError):
            vare(model2_pattern, model2, div_z_model2).standard_errors()

    def test_estimating_equation_is_unbiased(self, model2, div_z_model2, poisson_model2, w1):
        theta = np.asarray(model_theta("2"))
        reps = 200
        residuals = np.array(
            [
                build_A(x, model2, div_z_model2) @ theta + build_b(x, model2, div_z_model2)
                for x in (simulate(poisson_model2, w1, replication_rng(101, r)) for r in range(reps))
            ]
        )
        se = residuals.std(axis=0, ddof=1) / np.sqrt(reps)
        assert np.all(np.abs(residuals.mean(axis=0)) <= 4 * se)


class TestMcle:
    def test_homogeneous_closed_form(self, w1, rng):
        x = rng.uniform(-1, 1, size=(57, 2))
        result = mcle(x, homogeneous(), regular_grid(w1, 10))
        assert result.beta_hat == pytest.approx(np.log(57 / 4.0), abs=1e-12)
        assert result.theta_hat.shape == (0,)
        assert result.iterations == 0

    def test_empty_pattern(self, model2, w1):
        with pytest.raises(Degenerate):
            mcle(np.zeros((0, 2)), model2, regular_grid(w1, 20))

    def test_matches_profile_likelihood(self, w1):
        z = builtin("3")
        spec = process_preset("poisson", z, model_theta("3"))
        spec = spec.with_beta(calibrate_beta(spec, w1, 400.0))
        x = simulate(spec, w1, replication_rng(17))
        grid = regular_grid(w1, 40)
        zx = z.value(x.points)[:, 0].sum()
        zq = z.value(grid.nodes)[:, 0]

        def neg_profile(theta):
            mass = grid.cell_volume * np.exp(theta * zq).sum()
            return -(x.n * np.log(x.n / mass) + theta * zx)

        best = optimize.minimize_scalar(neg_profile, bounds=(-10, 10), method="bounded", options={"xatol": 1e-10})
        result = mcle(x, z, grid)
        assert result.theta_hat[0] == pytest.approx(best.x, abs=2e-3)
        mass = grid.cell_volume * np.exp(best.x * zq).sum()
        assert result.beta_hat == pytest.approx(np.log(x.n / mass), abs=2e-3)

    def test_trace_is_monotone(self, model2, w1, model2_pattern):
        result = mcle(model2_pattern, model2, regular_grid(w1, 40))
        trace = np.asarray(result.trace)
        assert result.iterations == len(trace) - 1
        assert np.all(np.diff(trace) >= -1e-12 * np.abs(trace[:-1]))
        assert result.grid is not None and result.grid.counts == (40, 40)

    def test_iteration_cap(self, model2, w1, model2_pattern):
        with pytest.raises(Nonconvergence):
            mcle(model2_pattern, model2, regular_grid(w1, 40), max_iter=0)

    def test_quadrature_equivalent_to_grid(self, model2, w1, model2_pattern):
        grid = regular_grid(w1, 30)
        a = mcle(model2_pattern, model2, grid)
        b = mcle(model2_pattern, model2, Quadrature.from_grid(grid))
        np.testing.assert_allclose(a.theta_hat, b.theta_hat)

    def test_berman_turner_fit_matches_newton(self, model2, w1, model2_pattern):
        grid = regular_grid(w1, 20)
        irls = mcle_berman_turner(model2_pattern, model2, grid)
        newton = mcle(model2_pattern, model2, Quadrature.berman_turner(grid, model2_pattern.points))
        np.testing.assert_allclose(irls.theta_hat, newton.theta_hat, atol=1e-5)
        assert irls.beta_hat == pytest.approx(newton.beta_hat, abs=1e-5)
        assert irls.loglik == pytest.approx(newton.loglik, rel=1e-8)
        assert irls.grid is grid

    def test_berman_turner_homogeneous(self, w1, rng):
        x = rng.uniform(-1, 1, size=(57, 2))
        result = mcle_berman_turner(x, homogeneous(), regular_grid(w1, 10))
        assert result.beta_hat == pytest.approx(np.log(57 / 4.0), abs=1e-6)

    def test_berman_turner_estimate_depends_on_dummy_count(self, model2, w1, model2_pattern):
        coarse = mcle_berman_turner(model2_pattern, model2, regular_grid(w1, 8)).theta_hat
        fine = mcle_berman_turner(model2_pattern, model2, regular_grid(w1, 120)).theta_hat
        midpoint = mcle(model2_pattern, model2, regular_grid(w1, 120)).theta_hat
        assert np.max(np.abs(fine - midpoint)) < np.max(np.abs(coarse - midpoint))

    def test_berman_turner_errors(self, model2, w1, model2_pattern):
        with pytest.raises(Degenerate):
            mcle_berman_turner(np.zeros((0, 2)), model2, regular_grid(w1, 10))
        with pytest.raises(Nonconvergence):
            mcle_berman_turner(model2_pattern, model2, regular_grid(w1, 10), max_iter=0)


class TestQuadrature:
    def test_from_grid(self, w1):
        q = Quadrature.from_grid(regular_grid(w1, 8))
        assert q.size == 64
        assert q.total_weight == pytest.approx(volume(w1))

    def test_subset_keeps_full_weight(self, w1):
        grid = regular_grid(w1, 10)
        q = Quadrature.subset(grid, [0, 5, 99])
        assert q.size == 3
        np.testing.assert_allclose(q.weights, grid.cell_volume)
        np.testing.assert_array_equal(q.nodes, grid.nodes[[0, 5, 99]])

    def test_validation(self):
        with pytest.raises(ValueError):
            Quadrature(np.zeros((3, 2)), np.ones(2))
        with pytest.raises(ValueError):
            Quadrature(np.zeros((2, 2)), np.array([1.0, -1.0]))

    def test_berman_turner_counting_weights(self, w1):
        grid = regular_grid(w1, 2)
        points = np.array([[-0.5, -0.5], [-0.6, -0.4], [0.5, 0.5]])
        q = Quadrature.berman_turner(grid, points)
        assert q.n_data == 3
        np.testing.assert_array_equal(q.nodes[:3], points)
        np.testing.assert_allclose(q.weights, [1 / 3, 1 / 3, 1 / 2, 1 / 3, 1.0, 1.0, 1 / 2])
        assert q.total_weight == pytest.approx(volume(w1))

    def test_berman_turner_without_points(self, w1):
        grid = regular_grid(w1, 6)
        q = Quadrature.berman_turner(grid, np.zeros((0, 2)))
        assert q.n_data == 0
        np.testing.assert_allclose(q.weights, Quadrature.from_grid(grid).weights)


class TestConditionChecks:
    def test_sup_norms_model2(self, model2, div_z_model2, w1):
        norms = check_condition_ii(model2, div_z_model2, w1)
        assert norms["z"] == pytest.approx(1.0, rel=5e-3)
        assert norms["div_z"] == pytest.approx(K, rel=5e-3)
        assert norms["h"] == pytest.approx(K, rel=5e-3)
        assert norms["div_h"] == pytest.approx(K ** 2, rel=5e-3)

    def test_sensitivity_positive_and_stable(self, model2, div_z_model2, w2):
        spec = process_preset("poisson", model2, model_theta("2"))
        beta = calibrate_beta(spec, w2, 800.0)
        coarse = check_condition_iii(model2, div_z_model2, w2, beta, spec.theta, resolution=256)
        fine = check_condition_iii(model2, div_z_model2, w2, beta, spec.theta, resolution=512)
        assert coarse > 0
        assert coarse == pytest.approx(fine, rel=0.01)

    def test_sensitivity_vanishes_for_constant_field(self, w1):
        z = constant([1.0])
        h = make_test_function(DIV_Z, z)
        assert check_condition_iii(z, h, w1, 0.0, [1.0], resolution=32) == 0.0

    def test_poisson_variance_positive(self, model2, div_z_model2, poisson_model2, w1):
        value = check_condition_vi_poisson(
            model2, div_z_model2, w1, poisson_model2.beta, poisson_model2.theta, resolution=128
        )
        assert value > 0
