"""
Tests for the reverse-mode differentiation engine
"""
import numpy as np
import pytest

from core.autodiff import ops
from core.autodiff.gradcheck import finite_diff_check
from core.autodiff.node import Tape, backward, compute_dtype, constant, default_dtype, forward, leaf
from core.config.config_manager import config
from core.validation.error_handler import GraphError, NonFiniteError


class _Projector:
    """Fixed random weights per shape, so sum(w * out) exercises every output entry"""

    def __init__(self, seed: int = 7):
        self._rng = np.random.default_rng(seed)
        self._weights = {}

    def __call__(self, node):
        if node.shape not in self._weights:
            self._weights[node.shape] = self._rng.normal(size=node.shape)
        return ops.total(ops.mul(node, constant(self._weights[node.shape])))


class TestForward:

    def test_square_of_constant_leaf(self):
        x = leaf(3.0)
        assert forward(ops.square(x)) == 9.0

    def test_sum_of_zero_tensor(self):
        assert forward(ops.total(leaf(np.zeros((4, 5))))) == 0.0

    def test_five_op_chain_matches_direct_evaluation(self, rng):
        a = rng.normal(size=(3, 4))
        b = rng.normal(size=(4, 2))
        x, w = leaf(a), leaf(b)
        root = ops.total(ops.softplus(ops.silu(ops.scale(ops.matmul(x, w), 0.5))))
        silu = lambda v: v / (1.0 + np.exp(-v))
        expected = np.sum(np.log1p(np.exp(silu(0.5 * (a @ b)))))
        np.testing.assert_allclose(forward(root), expected, rtol=1e-13)

    def test_non_scalar_root_rejected(self):
        with pytest.raises(GraphError):
            forward(leaf(np.ones(3)))

    def test_non_finite_value_names_the_op(self):
        with np.errstate(divide='ignore'):
            with pytest.raises(NonFiniteError) as excinfo:
                ops.reciprocal(leaf(0.0))
        assert excinfo.value.op == 'reciprocal'
        assert 'reciprocal' in str(excinfo.value)

    def test_recompute_after_leaf_edit(self):
        x = leaf(2.0)
        root = ops.square(x)
        assert forward(root) == 4.0
        x.value[...] = 5.0
        assert forward(root) == 4.0
        assert forward(root, recompute=True) == 25.0


class TestBackward:

    def test_square_gradient(self):
        x = leaf(3.0)
        root = ops.square(x)
        forward(root)
        (grad,) = backward(root, [x])
        assert float(grad) == 6.0

    def test_shared_leaf_accumulates(self):
        x = leaf(1.5)
        root = ops.add(x, x)
        forward(root)
        (grad,) = backward(root, [x])
        assert float(grad) == 2.0

    def test_unused_leaf_gets_zero(self):
        x, unused = leaf(2.0), leaf(np.ones((2, 2)))
        root = ops.square(x)
        forward(root)
        grad_x, grad_unused = backward(root, [x, unused])
        assert float(grad_x) == 4.0
        np.testing.assert_array_equal(grad_unused, np.zeros((2, 2)))

    def test_backward_before_forward_raises(self):
        root = ops.square(leaf(3.0))
        with pytest.raises(GraphError):
            backward(root, [])

    def test_operator_sugar(self):
        x = leaf(np.array([1.0, 2.0]))
        y = leaf(np.array([3.0, -1.0]))
        root = ops.total((x * y) - (x * 2.0) + y)
        assert forward(root) == pytest.approx((3.0 - 2.0) - 2.0 - 4.0 + 2.0)
        gx, gy = backward(root, [x, y])
        np.testing.assert_allclose(gx, [1.0, -3.0])
        np.testing.assert_allclose(gy, [2.0, 3.0])


class TestTape:

    def test_records_and_replays_bit_for_bit(self, rng):
        value = rng.normal(size=(4, 4))
        with Tape(seed=3) as tape:
            x = leaf(value)
            out = ops.total(ops.silu(ops.matmul(x, x)))
        first = out.value.copy()
        tape.replay()
        np.testing.assert_array_equal(out.value, first)
        assert tape.leaves() == [x]
        assert tape.stats()['matmul'] == 1

    def test_replay_tracks_leaf_edits(self):
        with Tape() as tape:
            x = leaf(2.0)
            out = ops.square(x)
        x.value[...] = 3.0
        tape.replay()
        assert float(out.value) == 9.0

    def test_inactive_after_exit(self):
        with Tape() as tape:
            leaf(1.0)
        leaf(2.0)
        assert len(tape.nodes) == 1

    def test_seeded_generator(self):
        a = Tape(seed=11).rng.normal(size=5)
        b = Tape(seed=11).rng.normal(size=5)
        np.testing.assert_array_equal(a, b)


class TestFiniteDiffCheck:

    def test_quadratic_is_exact(self, rng):
        x = leaf(rng.normal(size=6))
        error = finite_diff_check(lambda: ops.total(ops.square(x)), [x], h=1e-4)
        assert error <= 1e-9

    def test_constant_loss_has_zero_error(self):
        x = leaf(np.ones(3))
        error = finite_diff_check(lambda: ops.total(constant(np.ones(3))), [x])
        assert error == 0.0

    def test_rejects_non_positive_step(self):
        x = leaf(1.0)
        with pytest.raises(ValueError):
            finite_diff_check(lambda: ops.square(x), [x], h=0.0)

    def test_non_leaf_rejected(self):
        x = leaf(1.0)
        with pytest.raises(GraphError):
            finite_diff_check(lambda: ops.square(x), [ops.square(x)])

    def test_report_and_coordinate_subset(self, rng):
        x = leaf(rng.normal(size=20))
        report = []
        finite_diff_check(lambda: ops.total(ops.square(x)), [x], coords_per_leaf=5, report=report)
        assert len(report) == 5
        assert {'leaf', 'coord', 'analytic', 'numeric', 'error'} <= set(report[0])

    def test_leaves_restored(self, rng):
        value = rng.normal(size=(3, 3))
        x = leaf(value.copy())
        finite_diff_check(lambda: ops.total(ops.silu(x)), [x])
        np.testing.assert_array_equal(x.value, value)


class TestComputeDtype:

    def test_follows_config(self):
        assert leaf(1.0).value.dtype == np.float64
        with config.overridden({'compute': {'dtype': 'float32'}}):
            assert default_dtype() is np.float32
            assert leaf(1.0).value.dtype == np.float32
            assert constant(np.ones(3)).value.dtype == np.float32
        assert leaf(1.0).value.dtype == np.float64

    def test_block_overrides_config(self):
        with compute_dtype('float32'):
            x = leaf(np.ones((2, 2)))
            assert ops.square(x).value.dtype == np.float32
            assert forward(ops.total(ops.square(x))) == 4.0
        assert leaf(1.0).value.dtype == np.float64
        with compute_dtype(None):
            assert default_dtype() is np.float64

    def test_unknown_dtype(self):
        with pytest.raises(ValueError):
            with compute_dtype('float16'):
                pass


class TestOpGradients:
    """Every differentiable op against central differences on 100 random instances"""

    INSTANCES = 100

    @pytest.fixture
    def project(self):
        return _Projector()

    @staticmethod
    def away_from_kinks(rng, shape):
        # |a| in [0.2, 1] and clear of the clamp bounds at +-0.5
        magnitude = rng.uniform(0.2, 1.0, size=shape)
        magnitude[np.abs(magnitude - 0.5) < 1e-3] = 0.7
        return magnitude * rng.choice([-1.0, 1.0], size=shape)

    @pytest.mark.parametrize("op", [
        lambda a, b: ops.add(a, b),
        lambda a, b: ops.sub(a, b),
        lambda a, b: ops.mul(a, b),
        lambda a, b: ops.silu(a),
        lambda a, b: ops.softplus(a),
        lambda a, b: ops.reciprocal(a),
        lambda a, b: ops.absolute(a),
        lambda a, b: ops.relu(a),
        lambda a, b: ops.clamp(a, -0.5, 0.5),
        lambda a, b: ops.square(a),
    ], ids=['add', 'sub', 'mul', 'silu', 'softplus', 'reciprocal', 'abs', 'relu', 'clamp', 'square'])
    def test_elementwise_ops(self, rng, project, op):
        for _ in range(self.INSTANCES):
            a = leaf(self.away_from_kinks(rng, (2, 3)))
            b = leaf(self.away_from_kinks(rng, (2, 3)))
            assert finite_diff_check(lambda: project(op(a, b)), [a, b]) <= 1e-4

    def test_scale_by_scalar_node(self, rng, project):
        for _ in range(self.INSTANCES):
            x = leaf(rng.normal(size=(2, 3)))
            s = leaf(rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0]))
            assert finite_diff_check(lambda: project(ops.scale(x, s)), [x, s]) <= 1e-4

    @pytest.mark.parametrize("op", [
        lambda a, b: ops.matmul(a, b),
        lambda a, b: ops.reshape(a, (2, 6)),
        lambda a, b: ops.transpose(a),
        lambda a, b: ops.total(a, axis=0),
        lambda a, b: ops.mean(a, axis=1),
    ], ids=['matmul', 'reshape', 'transpose', 'total', 'mean'])
    def test_structural_ops(self, rng, project, op):
        for _ in range(self.INSTANCES):
            a = leaf(rng.normal(size=(3, 4)))
            b = leaf(rng.normal(size=(4, 2)))
            assert finite_diff_check(lambda: project(op(a, b)), [a, b]) <= 1e-4

    def test_mean_of_squares(self, rng):
        for _ in range(self.INSTANCES):
            a = leaf(rng.normal(size=(3, 4)))
            assert finite_diff_check(lambda: ops.mean(ops.square(a)), [a]) <= 1e-4

    @pytest.mark.parametrize("op", [
        lambda x, w, b, wt: ops.conv2d(x, w, b, stride=1, padding=1),
        lambda x, w, b, wt: ops.conv2d(x, w, b, stride=2, padding=0),
        lambda x, w, b, wt: ops.conv_transpose2d(x, wt, stride=2),
        lambda x, w, b, wt: ops.avg_pool2(x),
        lambda x, w, b, wt: ops.upsample_nearest2(x),
    ], ids=['conv_same', 'conv_strided', 'conv_transpose', 'avg_pool', 'upsample'])
    def test_convolutions(self, rng, project, op):
        for trial in range(self.INSTANCES):
            x = leaf(rng.normal(size=(2, 6, 6)))
            w = leaf(rng.normal(size=(3, 2, 3, 3)))
            b = leaf(rng.normal(size=3))
            wt = leaf(rng.normal(size=(2, 3, 2, 2)))
            error = finite_diff_check(lambda: project(op(x, w, b, wt)), [x, w, b, wt],
                                      coords_per_leaf=4, seed=trial)
            assert error <= 1e-4

    @pytest.mark.parametrize("op", [
        lambda x, kernel, r: ops.blur_down(x, kernel, 2),
        lambda x, kernel, r: ops.blur_transpose(r, kernel, 2),
        lambda x, kernel, r: ops.kernel_correlate(x, r, 3, 2),
    ], ids=['blur_down', 'blur_transpose', 'kernel_correlate'])
    def test_degradation_ops(self, rng, project, op):
        for trial in range(self.INSTANCES):
            x = leaf(rng.normal(size=(2, 8, 8)))
            kernel = leaf(rng.uniform(0.1, 1.0, size=(3, 3)))
            r = leaf(rng.normal(size=(2, 4, 4)))
            error = finite_diff_check(lambda: project(op(x, kernel, r)), [x, kernel, r],
                                      coords_per_leaf=6, seed=trial)
            assert error <= 1e-4

    def test_upsample_nearest_values(self):
        x = leaf(np.arange(4.0).reshape(1, 2, 2))
        up = ops.upsample_nearest2(x).value
        np.testing.assert_array_equal(up[0], np.repeat(np.repeat(x.value[0], 2, axis=0), 2, axis=1))
        np.testing.assert_allclose(ops.avg_pool2(constant(up)).value, x.value)
