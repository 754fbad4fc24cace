import numpy as np
import pytest

from libs.vare.errors import EmptyErosion
from libs.vare.geometry import (
    Window,
    contains,
    dilate,
    erode,
    format_window,
    midpoint_integral,
    regular_grid,
    uniform_sample,
    volume,
)


class TestWindow:
    def test_rejects_inverted_axis(self):
        with pytest.raises(ValueError):
            Window((0.0, 1.0), (1.0, 0.5))

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            Window((0.0,), (1.0, 1.0))

    def test_dict_round_trip(self):
        w = Window((-1.0, 0.0), (1.0, 3.0))
        assert Window.from_dict(w.to_dict()) == w
        assert w.to_dict() == {"lower": [-1.0, 0.0], "upper": [1.0, 3.0]}

    def test_properties(self):
        w = Window((-1.0, 0.0), (1.0, 3.0))
        assert w.d == 2
        np.testing.assert_allclose(w.sides, [2.0, 3.0])
        np.testing.assert_allclose(w.center, [0.0, 1.5])

    def test_format(self):
        assert format_window(Window.square(-1, 1)) == "[-1,1]^2"
        assert format_window(Window((0.0, 0.0), (1.0, 2.0))) == "[0,1]x[0,2]"


class TestVolume:
    @pytest.mark.parametrize(
        "w, expected",
        [
            (Window.square(-1, 1, 2), 4.0),
            (Window.square(-2, 2, 2), 16.0),
            (Window.square(-1, 1, 3), 8.0),
        ],
    )
    def test_side_length_product(self, w, expected):
        assert volume(w) == expected


class TestErodeDilate:
    def test_erode(self, w1):
        np.testing.assert_allclose(erode(w1, 0.2).lower, [-0.8, -0.8])
        np.testing.assert_allclose(erode(w1, 0.2).upper, [0.8, 0.8])

    def test_erode_zero_is_identity(self, w1):
        assert erode(w1, 0.0) == w1

    def test_erode_to_nothing(self, w1):
        with pytest.raises(EmptyErosion):
            erode(w1, 1.0)

    def test_negative_radius(self, w1):
        with pytest.raises(ValueError):
            erode(w1, -0.1)

    def test_dilate(self, w1):
        np.testing.assert_allclose(dilate(w1, 0.2).upper, [1.2, 1.2])
        line = dilate(Window((0.0,), (1.0,)), 0.5)
        assert line.lower == (-0.5,) and line.upper == (1.5,)
        assert dilate(w1, 0.0) == w1

    @pytest.mark.parametrize("r", [0.25, 0.5, 0.125])
    def test_erode_undoes_dilate(self, w1, r):
        assert erode(dilate(w1, r), r) == w1

    def test_erode_undoes_dilate_inexact_radius(self, w2):
        back = erode(dilate(w2, 0.2), 0.2)
        np.testing.assert_allclose(back.lower, w2.lower, atol=1e-15)
        np.testing.assert_allclose(back.upper, w2.upper, atol=1e-15)


class TestContainsAndSampling:
    def test_contains(self, w1):
        assert contains(w1, (0.0, 0.0))
        assert not contains(w1, (1.5, 0.0))
        assert contains(w1, (1.0, 1.0))

    def test_contains_batch(self, w1):
        mask = contains(w1, np.array([[0.0, 0.0], [1.5, 0.0], [-1.0, 1.0]]))
        assert mask.tolist() == [True, False, True]

    def test_uniform_sample_shapes(self, w1, rng):
        assert uniform_sample(w1, rng).shape == (2,)
        pts = uniform_sample(w1, rng, size=50)
        assert pts.shape == (50, 2)
        assert np.all(contains(w1, pts))

    def test_eroded_fraction(self, w1, rng):
        n = 100_000
        inner = erode(w1, 0.2)
        frac = np.mean(contains(inner, uniform_sample(w1, rng, size=n)))
        expected = volume(inner) / volume(w1)
        se = np.sqrt(expected * (1 - expected) / n)
        assert abs(frac - expected) <= 3 * se


class TestGrid:
    def test_nodes(self, w1):
        grid = regular_grid(w1, (4, 5))
        assert grid.size == 20
        assert grid.nodes.shape == (20, 2)
        assert np.all(grid.nodes > w1.lower_array) and np.all(grid.nodes < w1.upper_array)
        np.testing.assert_allclose(grid.spacing, [0.5, 0.4])
        assert grid.cell_volume == pytest.approx(0.2)

    def test_node_mean_is_center(self):
        w = Window((-1.0, 0.5), (3.0, 2.0))
        grid = regular_grid(w, 37)
        np.testing.assert_allclose(grid.nodes.mean(axis=0), w.center, atol=1e-12)

    def test_row_major_order(self, w1):
        grid = regular_grid(w1, 3)
        np.testing.assert_allclose(grid.nodes[1], [grid.axis_centers(0)[0], grid.axis_centers(1)[1]])
        assert grid.flat_index([1, 2]) == 5

    def test_nearest_index(self, w1):
        grid = regular_grid(w1, 4)
        np.testing.assert_array_equal(grid.nearest_index([-0.9, 0.99]), [0, 3])
        np.testing.assert_array_equal(grid.nearest_index([1.0, -1.0]), [3, 0])

    def test_rejects_bad_counts(self, w1):
        with pytest.raises(ValueError):
            regular_grid(w1, (3,))
        with pytest.raises(ValueError):
            regular_grid(w1, 0)


class TestMidpointIntegral:
    def test_constant_is_volume(self, w2):
        assert midpoint_integral(lambda x: np.ones(len(x)), w2, 64) == pytest.approx(16.0)

    def test_polynomial(self):
        val = midpoint_integral(lambda x: x[:, 0] ** 2, Window((-1.0,), (1.0,)), 4096)
        assert val == pytest.approx(2.0 / 3.0, abs=1e-6)

    def test_chunking_does_not_change_result(self, w1):
        fn = lambda x: np.exp(x[:, 0] - x[:, 1])
        a = midpoint_integral(fn, w1, 100, chunk_size=97)
        b = midpoint_integral(fn, w1, 100)
        assert a == pytest.approx(b, rel=1e-12)

    def test_vector_valued(self, w1):
        val = midpoint_integral(lambda x: np.stack([np.ones(len(x)), x[:, 0]], axis=-1), w1, 16)
        np.testing.assert_allclose(val, [4.0, 0.0], atol=1e-12)
