"""
Tests for B-spline bases, spline functions, KAN layers/stacks and the MLP baseline
"""
import numpy as np
import pytest
from scipy.interpolate import BSpline

from core.autodiff import ops
from core.autodiff.gradcheck import finite_diff_check
from core.autodiff.node import backward, constant, forward, leaf
from core.spline_kan.bspline import base_interval, basis_count, bspline_basis, uniform_grid, validate_knots
from core.spline_kan.kan_layer import (
    KanLayer, KanStack, SplineFunction, kan1d_apply, kan2d_apply, kan_forward, kan_layer_forward, phi_eval
)
from core.spline_kan.mlp import MlpStack, kan_param_count, matched_mlp_widths, mlp_param_count
from core.training.optimizer import Adam, AdamConfig, step_decay_lr
from core.validation.error_handler import KnotError, ShapeError


def silu(x):
    return x / (1.0 + np.exp(-x))


def scipy_bases(x, knots, degree):
    """Independent basis oracle: one scipy BSpline per unit coefficient vector"""
    n = basis_count(knots, degree)
    return np.stack([BSpline(knots, np.eye(n)[i], degree, extrapolate=False)(x) for i in range(n)], axis=-1)


def off_knot_points(rng, knots, count):
    """Points at least a tenth of a grid step from every knot"""
    step = knots[1] - knots[0]
    lo, hi = knots[3], knots[-4]
    cells = rng.integers(0, int(round((hi - lo) / step)), size=count)
    return lo + step * (cells + rng.uniform(0.1, 0.9, size=count))


class TestBSplineBasis:

    @pytest.mark.parametrize("degree", [1, 2, 3])
    def test_partition_of_unity(self, rng, degree):
        knots = uniform_grid(-1.0, 1.0, 7, degree)
        x = rng.uniform(-1.0, 1.0, size=1000)
        bases = bspline_basis(x, knots, degree)
        assert bases.shape == (1000, 7 + degree)
        assert np.all(bases >= 0)
        np.testing.assert_allclose(bases.sum(axis=-1), 1.0, atol=1e-9)

    def test_degree_zero_is_indicator(self):
        knots = uniform_grid(0.0, 4.0, 4, 0)
        np.testing.assert_array_equal(bspline_basis(2.5, knots, 0), [0.0, 0.0, 1.0, 0.0])

    def test_cardinal_cubic_at_a_knot(self):
        knots = uniform_grid(0.0, 6.0, 6, 3)
        values = bspline_basis(3.0, knots, 3)
        nonzero = values[values > 1e-14]
        np.testing.assert_allclose(nonzero, [1 / 6, 4 / 6, 1 / 6], atol=1e-12)

    def test_matches_scipy(self, rng):
        knots = uniform_grid(-1.0, 1.0, 5, 3)
        x = rng.uniform(-0.999, 0.999, size=200)
        np.testing.assert_allclose(bspline_basis(x, knots, 3), scipy_bases(x, knots, 3), atol=1e-12)

    def test_clamps_outside_base_interval(self):
        knots = uniform_grid(-1.0, 1.0, 5, 3)
        np.testing.assert_allclose(bspline_basis(5.0, knots, 3), bspline_basis(1.0, knots, 3))
        np.testing.assert_allclose(bspline_basis(-5.0, knots, 3), bspline_basis(-1.0, knots, 3))

    def test_knot_validation(self):
        with pytest.raises(KnotError):
            validate_knots(np.array([0.0, 1.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]), 3)
        with pytest.raises(KnotError):
            validate_knots(np.array([0.0, 1.0, 2.0]), 3)
        with pytest.raises(KnotError):
            uniform_grid(1.0, 1.0, 5, 3)

    def test_grid_layout(self):
        knots = uniform_grid(-1.0, 1.0, 5, 3)
        assert len(knots) == 5 + 2 * 3 + 1
        assert base_interval(knots, 3) == pytest.approx((-1.0, 1.0))
        assert basis_count(knots, 3) == 8


class TestPhiEval:

    def test_pure_silu_at_zero(self):
        f = SplineFunction.uniform(np.ones(8), w_b=1.0, w_s=0.0)
        assert phi_eval(0.0, f) == pytest.approx(0.0)

    def test_unit_coefficients_give_one(self, rng):
        f = SplineFunction.uniform(np.ones(8), w_b=0.0, w_s=1.0)
        x = rng.uniform(-1.0, 1.0, size=50)
        np.testing.assert_allclose(phi_eval(x, f), 1.0, atol=1e-12)

    def test_matches_brute_force(self, rng):
        coefficients = rng.normal(size=8)
        f = SplineFunction.uniform(coefficients, grid_size=5, degree=3, w_b=0.7, w_s=-1.3)
        x = rng.uniform(-1.5, 1.5, size=(4, 5))
        expected = 0.7 * silu(x) - 1.3 * scipy_bases(np.clip(x, -1.0, 0.999999999999), f.knots, 3) @ coefficients
        np.testing.assert_allclose(phi_eval(x, f), expected, atol=1e-10)

    def test_returns_node_for_node_input(self):
        f = SplineFunction.uniform(np.zeros(8))
        out = phi_eval(leaf(np.array([0.1, 0.2])), f)
        assert out.shape == (2,)
        assert hasattr(out, 'op')

    def test_rejects_bad_parameters(self):
        with pytest.raises(KnotError):
            SplineFunction.uniform(np.zeros(5))
        with pytest.raises(KnotError):
            SplineFunction.uniform(np.zeros(6), degree=0)

    def test_gradients_away_from_knots(self, rng):
        knots = uniform_grid(-1.0, 1.0, 5, 3)
        x = leaf(off_knot_points(rng, knots, 12))
        c = leaf(rng.normal(size=8))
        w_b, w_s = leaf(0.8), leaf(1.2)
        f = SplineFunction(knots, 3, c, w_b, w_s)
        assert finite_diff_check(lambda: ops.total(ops.square(phi_eval(x, f))), [x, c, w_b, w_s]) <= 1e-4


class TestKanLayer:

    def test_single_edge_reduces_to_phi_eval(self, rng):
        layer = KanLayer(1, 1, rng=rng)
        x = np.array([0.37])
        np.testing.assert_allclose(kan_layer_forward(x, layer), phi_eval(x, layer.edge(0, 0)), atol=1e-12)

    def test_zero_weights_give_zero(self, rng):
        layer = KanLayer(2, 3, rng=rng, init_scale=0.0)
        np.testing.assert_array_equal(kan_layer_forward(rng.normal(size=2), layer), np.zeros(3))

    def test_matches_naive_double_loop(self, rng):
        layer = KanLayer(2, 3, rng=rng)
        layer.base_weight.value[...] = rng.normal(size=(2, 3))
        layer.spline_weight.value[...] = rng.normal(size=(2, 3))
        x = rng.uniform(-1.2, 1.2, size=2)
        expected = np.array([sum(phi_eval(x[i], layer.edge(i, j)) for i in range(2)) for j in range(3)])
        np.testing.assert_allclose(kan_layer_forward(x, layer), expected, atol=1e-12)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ShapeError):
            kan_layer_forward(np.zeros(3), KanLayer(2, 2, rng=rng))

    def test_param_count(self, rng):
        layer = KanLayer(4, 5, rng=rng, grid_size=5, degree=3)
        assert layer.param_count() == 4 * 5 * (5 + 3 + 2)
        assert sum(node.value.size for node in layer.parameters().values()) == layer.param_count()

    def test_gradients(self, rng):
        layer = KanLayer(2, 3, rng=rng)
        x = leaf(off_knot_points(rng, layer.knots, 2))
        leaves = [x] + list(layer.parameters().values())
        assert finite_diff_check(lambda: ops.total(ops.square(kan_layer_forward(x, layer))), leaves) <= 1e-4


class TestKanStack:

    def test_single_layer_stack(self, rng):
        stack = KanStack.from_widths([3, 2], rng)
        x = rng.normal(size=3)
        np.testing.assert_allclose(kan_forward(x, stack), kan_layer_forward(x, stack.layers[0]), atol=1e-12)

    def test_identity_like_second_layer(self, rng):
        stack = KanStack.from_widths([2, 2, 2], rng)
        second = stack.layers[1]
        second.base_weight.value[...] = np.eye(2)
        second.spline_weight.value[...] = 0.0
        x = rng.normal(size=2)
        hidden = kan_layer_forward(x, stack.layers[0])
        np.testing.assert_allclose(kan_forward(x, stack), silu(hidden), atol=1e-12)

    def test_sequential_oracle(self, rng):
        stack = KanStack.from_widths([3, 4, 4, 2], rng)
        x = rng.normal(size=3)
        expected = x
        for layer in stack.layers:
            expected = kan_layer_forward(expected, layer)
        np.testing.assert_allclose(kan_forward(x, stack), expected, atol=1e-12)

    def test_zero_last_layer(self, rng):
        stack = KanStack.from_widths([3, 6, 3], rng, fan_in_scaling=True, last_init_scale=0.0)
        np.testing.assert_array_equal(kan_forward(rng.normal(size=3), stack), np.zeros(3))

    def test_incompatible_layers(self, rng):
        with pytest.raises(ShapeError):
            KanStack([KanLayer(2, 3, rng=rng), KanLayer(2, 3, rng=rng)])


class TestCubeApplication:

    def test_single_pixel_equals_kan_forward(self, rng):
        stack = KanStack.from_widths([3, 6, 3], rng)
        vector = rng.normal(size=3)
        out = kan1d_apply(vector.reshape(3, 1, 1), stack)
        np.testing.assert_allclose(out[:, 0, 0], kan_forward(vector, stack), atol=1e-12)

    def test_constant_cube_stays_constant(self, rng):
        stack = KanStack.from_widths([3, 3], rng)
        cube = np.broadcast_to(rng.normal(size=(3, 1, 1)), (3, 4, 5)).copy()
        out = kan1d_apply(cube, stack)
        np.testing.assert_allclose(out, np.broadcast_to(out[:, :1, :1], out.shape), atol=1e-14)

    def test_per_pixel_oracle(self, rng):
        stack = KanStack.from_widths([3, 6, 2], rng)
        cube = rng.normal(size=(3, 4, 4))
        out = kan1d_apply(cube, stack)
        assert out.shape == (2, 4, 4)
        for h in range(4):
            for w in range(4):
                np.testing.assert_allclose(out[:, h, w], kan_forward(cube[:, h, w], stack), atol=1e-12)

    def test_pixel_permutation_equivariance(self, rng):
        layer = KanLayer(3, 3, rng=rng)
        cube = rng.normal(size=(3, 4, 4))
        perm = rng.permutation(16)
        shuffled = cube.reshape(3, 16)[:, perm].reshape(3, 4, 4)
        expected = kan2d_apply(cube, layer).reshape(3, 16)[:, perm].reshape(3, 4, 4)
        np.testing.assert_allclose(kan2d_apply(shuffled, layer), expected, atol=1e-12)

    def test_identity_configured_set_is_silu(self, rng):
        layer = KanLayer(1, 1, rng=rng, init_scale=1.0)
        layer.spline_weight.value[...] = 0.0
        plane = rng.normal(size=(1, 3, 3))
        np.testing.assert_allclose(kan2d_apply(plane, layer), silu(plane), atol=1e-12)

    def test_channel_mismatch(self, rng):
        with pytest.raises(ShapeError):
            kan2d_apply(np.zeros((2, 3, 3)), KanLayer(3, 3, rng=rng))


class TestMlpBaseline:

    def test_param_counts(self, rng):
        mlp = MlpStack([4, 8, 2], rng)
        assert mlp.param_count() == 4 * 8 + 8 + 8 * 2 + 2
        assert sum(node.value.size for node in mlp.parameters().values()) == mlp.param_count()

    @pytest.mark.parametrize("kernel_size", [3, 11])
    def test_matched_widths_within_ten_percent(self, kernel_size):
        dim = kernel_size * kernel_size
        kan_widths = [dim, dim, dim]
        widths = matched_mlp_widths(kan_widths, grid_size=5, degree=3)
        assert widths[0] == dim and widths[-1] == dim and len(widths) == 3
        ratio = mlp_param_count(widths) / kan_param_count(kan_widths, 5, 3)
        assert abs(ratio - 1.0) <= 0.10

    def test_zero_last_layer(self, rng):
        mlp = MlpStack([3, 5, 3], rng, last_init_scale=0.0)
        out = mlp.forward_batch(constant(rng.normal(size=(4, 3))))
        np.testing.assert_array_equal(out.value, np.zeros((4, 3)))

    def test_gradients(self, rng):
        mlp = MlpStack([2, 4, 2], rng)
        x = leaf(rng.normal(size=(3, 2)))
        leaves = [x] + list(mlp.parameters().values())
        assert finite_diff_check(lambda: ops.total(ops.square(mlp.forward_batch(x))), leaves) <= 1e-4


class TestExpressivity:

    def test_fits_sine(self):
        rng = np.random.default_rng(0)
        layer = KanLayer(1, 1, rng=rng, grid_size=8, degree=3)
        samples = np.linspace(-1.0, 1.0, 256).reshape(256, 1)
        target = constant(np.sin(np.pi * samples))
        x = constant(samples)
        params = layer.parameters()
        names = list(params)
        optimizer = Adam(params, AdamConfig(learning_rate=0.05))
        steps = 500
        for step in range(1, steps + 1):
            root = ops.mean(ops.square(ops.sub(layer.forward_batch(x), target)))
            forward(root)
            grads = backward(root, [params[name] for name in names])
            optimizer.step(dict(zip(names, grads)), learning_rate=step_decay_lr(0.05, step, steps))
        rmse = np.sqrt(np.mean((layer.forward_batch(x).value - target.value) ** 2))
        assert rmse < 0.05
