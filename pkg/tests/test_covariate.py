import numpy as np
import pytest

from libs.vare.covariate import (
    GridCovariate,
    ShiftedField,
    builtin,
    constant,
    homogeneous,
    linear,
    model_theta,
)
from libs.vare.errors import OutOfStencil, UnknownModel
from libs.vare.geometry import Window, regular_grid

K = 4 * np.pi
ANALYTIC = [builtin("1"), builtin("2"), builtin("3"), builtin("4"), builtin("sine", 2), builtin("sine", 3)]


def _directional(field, pts, h, order):
    """Derivatives of t -> z(u + t*(1,..,1)); they equal div z and div div z."""
    e = np.ones(field.d)
    if order == 1:
        return (field.value(pts + h * e) - field.value(pts - h * e)) / (2 * h)
    return (field.value(pts + h * e) - 2 * field.value(pts) + field.value(pts - h * e)) / h ** 2


class TestValue:
    def test_model2_origin(self):
        np.testing.assert_allclose(builtin("2").value([0.0, 0.0]), [0.0, 0.0])

    def test_model1(self):
        np.testing.assert_allclose(builtin("1").value([1.0, 1.0]), [1.0])

    def test_model4(self):
        np.testing.assert_allclose(builtin("4").value([2.0, 0.3]), [2.0, 4.0, 8.0])

    def test_batch_shape(self):
        pts = np.zeros((7, 2))
        assert builtin("4").value(pts).shape == (7, 3)
        assert builtin("4").value(pts[0]).shape == (3,)

    def test_sine_scaling(self):
        z = builtin("sine", 4)
        u = np.full(4, 0.125)
        np.testing.assert_allclose(z.value(u), np.full(4, 0.25))


class TestDiv:
    def test_model2_origin(self):
        np.testing.assert_allclose(builtin("2").div([0.0, 0.0]), [K, K])

    def test_model4(self):
        np.testing.assert_allclose(builtin("4").div([0.0, 0.5]), [1.0, 0.0, 0.0])

    def test_constant_field(self):
        np.testing.assert_array_equal(constant([3.0, -1.0]).div([0.2, 0.4]), [0.0, 0.0])

    def test_linear_field(self):
        np.testing.assert_allclose(linear([1.0, 0.0]).div([0.3, 0.1]), [1.0])
        np.testing.assert_allclose(linear([[1.0, 2.0], [0.5, 0.5]]).div([0.3, 0.1]), [3.0, 1.0])


class TestDivDiv:
    def test_model2_origin(self):
        np.testing.assert_allclose(builtin("2").div_div([0.0, 0.0]), [0.0, 0.0], atol=1e-12)

    def test_model1(self):
        np.testing.assert_allclose(builtin("1").div_div([1.0, 1.0]), [12.0])

    def test_linear(self):
        np.testing.assert_array_equal(linear([1.0, 0.0]).div_div([0.7, -0.2]), [0.0])


class TestAnalyticOperators:
    @pytest.mark.parametrize("field", ANALYTIC, ids=lambda f: f"{f.name}-d{f.d}")
    def test_div_matches_finite_differences(self, field):
        pts = np.random.default_rng(3).uniform(-0.5, 0.5, size=(100, field.d))
        h = 1e-4
        np.testing.assert_allclose(field.div(pts), _directional(field, pts, h, 1), atol=1e3 * h ** 2)

    @pytest.mark.parametrize("field", ANALYTIC, ids=lambda f: f"{f.name}-d{f.d}")
    def test_div_div_matches_finite_differences(self, field):
        pts = np.random.default_rng(4).uniform(-0.5, 0.5, size=(100, field.d))
        np.testing.assert_allclose(
            field.div_div(pts), _directional(field, pts, 1e-4, 2), rtol=1e-5, atol=1e-4
        )

    def test_deterministic(self):
        pts = np.random.default_rng(5).uniform(-1, 1, size=(50, 2))
        for model in ("1", "2", "3", "4"):
            assert np.array_equal(builtin(model).div_div(pts), builtin(model).div_div(pts))


class TestBuiltin:
    def test_dimensions(self):
        assert builtin("2", 2).p == 2
        assert builtin(4, 2).p == 3
        assert builtin("sine", 5).p == 5
        assert builtin("sine_d", 5).d == 5

    def test_unknown(self):
        with pytest.raises(UnknownModel):
            builtin("7")

    def test_planar_only(self):
        with pytest.raises(ValueError):
            builtin("2", 3)

    def test_true_theta(self):
        np.testing.assert_array_equal(model_theta("2"), [1.0, 4.0])
        np.testing.assert_array_equal(model_theta("4"), [-1.0, -1.0, -0.5])
        np.testing.assert_array_equal(model_theta("sine", 3), [1.0, 1.0, 1.0])

    def test_homogeneous(self):
        z = homogeneous(2)
        assert z.p == 0
        assert z.value(np.zeros((4, 2))).shape == (4, 0)

    def test_shifted(self):
        base = builtin("3")
        shifted = ShiftedField(base, [0.3, -0.2])
        u = np.array([0.1, 0.4])
        np.testing.assert_allclose(shifted.div_div(u + [0.3, -0.2]), base.div_div(u))


class TestGridCovariate:
    def grid(self, n=20):
        return regular_grid(Window.square(-1.0, 1.0), n)

    def test_linear_samples(self):
        grid = self.grid()
        gc = GridCovariate(grid, grid.nodes[:, 0])
        pts = np.random.default_rng(1).uniform(-0.85, 0.85, size=(30, 2))
        np.testing.assert_allclose(gc.fd_div(pts), 1.0, atol=1e-12)
        np.testing.assert_allclose(gc.fd_div_div(pts), 0.0, atol=1e-9)

    def test_quadratic_samples(self):
        grid = self.grid()
        gc = GridCovariate(grid, grid.nodes[:, 0] ** 2)
        pts = np.random.default_rng(2).uniform(-0.85, 0.85, size=(30, 2))
        np.testing.assert_allclose(gc.fd_div_div(pts), 2.0, atol=1e-9)

    def test_mixed_partial(self):
        grid = self.grid()
        gc = GridCovariate(grid, grid.nodes[:, 0] * grid.nodes[:, 1])
        np.testing.assert_allclose(gc.fd_div_div([[0.2, -0.3]]), [[2.0]], atol=1e-9)

    def test_out_of_stencil(self):
        gc = GridCovariate.sample(builtin("2"), regular_grid(Window.square(-1.0, 1.0), 80))
        with pytest.raises(OutOfStencil):
            gc.fd_div([-0.99, 0.0])
        with pytest.raises(OutOfStencil):
            gc.fd_div_div([[0.0, 0.0], [0.0, 0.999]])

    def test_clamped_interface_near_boundary(self):
        grid = regular_grid(Window.square(-1.0, 1.0), 80)
        gc = GridCovariate.sample(builtin("2"), grid)
        shifted = gc.stencil_centres([-0.99, 0.0])[0]
        np.testing.assert_allclose(shifted[0], grid.axis_centers(0)[1])
        np.testing.assert_allclose(gc.div([-0.99, 0.0]), gc.fd_div(shifted))

    def test_model2_matches_exact_central_difference(self):
        grid = regular_grid(Window.square(-1.0, 1.0), 80)
        h = grid.spacing[0]
        gc = GridCovariate.sample(builtin("2"), grid)
        pts = np.random.default_rng(8).uniform(-0.9, 0.9, size=(200, 2))
        centres = gc.stencil_centres(pts)
        expected_div = np.cos(K * centres) * np.sin(K * h) / h
        expected_div_div = np.sin(K * centres) * (2 * np.cos(K * h) - 2) / h ** 2
        np.testing.assert_allclose(gc.fd_div(pts), expected_div, atol=1e-9)
        np.testing.assert_allclose(gc.fd_div_div(pts), expected_div_div, atol=1e-6)
        # against the analytic operator at the subgrid midpoint
        np.testing.assert_allclose(gc.fd_div(pts), builtin("2").div(centres), atol=0.25)

    def test_value_is_midpoint_sample(self):
        grid = self.grid()
        gc = GridCovariate.sample(builtin("1"), grid)
        u = np.array([0.33, -0.41])
        np.testing.assert_allclose(gc.value(u), builtin("1").value(gc.stencil_centres(u)[0]))

    def test_stencil_nodes(self):
        gc = GridCovariate.sample(builtin("2"), self.grid())
        assert gc.stencil_nodes([[0.01, 0.01]]).size == 9
        assert gc.stencil_nodes([[0.01, 0.01], [0.02, 0.02]]).size == 9
        assert gc.stencil_nodes([[0.01, 0.01], [0.5, 0.5]]).size == 18
        assert gc.stencil_nodes(np.zeros((0, 2))).size == 0

    def test_sample_count_mismatch(self):
        with pytest.raises(ValueError):
            GridCovariate(self.grid(), np.zeros(5))
