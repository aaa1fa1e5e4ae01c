"""
Tests for the loss, optimizer, procedural data and the training loop
"""
import math

import numpy as np
import pytest

from core.autodiff.node import backward, constant, forward, leaf
from core.config.config_manager import config
from core.config.config_schema import validate_config
from core.degradation.degrade import DegradationSpec, degrade
from core.degradation.operators import conv_down
from core.degradation.presets import PresetLibrary
from core.training.loss import default_weights, loss_terms, total_loss
from core.training.optimizer import Adam, AdamConfig, AdamMoments, adam_step, step_decay_lr
from core.training.patches import sample_batch, sample_patches
from core.training.synthetic import SamplePair, procedural_image, synth_dataset
import core.training.trainer as trainer_module
from core.training.trainer import (
    LOG_COLUMNS, TrainConfig, build_corpus, compare_backbones, evaluate_model, train
)
from core.unfolding.model import KanoModel, ModelSettings
from core.validation.error_handler import ShapeError, TrainingAborted


def tiny_config(**training):
    """A validated config small enough for a few-second training run"""
    section = {
        'channels': 3, 'image_size': 16, 'corpus_size': 4, 'holdout_size': 2, 'patch_size': 8,
        'batch_size': 2, 'steps': 3, 'scale': 2, 'seed': 0, 'preset': 'natural_images',
    }
    section.update(training)
    return validate_config(config.merged_with({
        'model': {'stages': 2, 'onet_2d_sets': 1},
        'kan': {'grid_size': 4},
        'training': section,
    }))


def without_timing(log):
    return [{key: value for key, value in row.items() if key != 'seconds'} for row in log]


class TestLoss:

    def test_single_stage_kernel_offset(self):
        k_gt = np.full((3, 3), 1.0 / 9.0)
        x_gt = np.ones((1, 4, 4))
        stage = (constant(k_gt + 0.01), constant(x_gt.copy()))
        loss = total_loss([stage], k_gt, x_gt, alpha=[1.0], beta=[1.0])
        assert forward(loss) == pytest.approx(0.09, abs=1e-12)

    def test_matches_double_sum(self, rng):
        stages_np = [(rng.random((3, 3)), rng.random((2, 4, 4))) for _ in range(3)]
        k_gt, x_gt = rng.random((3, 3)), rng.random((2, 4, 4))
        alpha, beta = [0.2, 0.5, 1.0], [0.3, 0.7, 1.5]
        expected = 0.0
        for t, (k, x) in enumerate(stages_np):
            for value in (k_gt - k).ravel():
                expected += alpha[t] * abs(value)
            for value in (x_gt - x).ravel():
                expected += beta[t] * abs(value)
        stages = [(constant(k), constant(x)) for k, x in stages_np]
        assert forward(total_loss(stages, k_gt, x_gt, alpha, beta)) == pytest.approx(expected, rel=1e-12)

    def test_uniform_weights_ignore_stage_order(self, rng):
        stages_np = [(rng.random((3, 3)), rng.random((1, 4, 4))) for _ in range(4)]
        k_gt, x_gt = rng.random((3, 3)), rng.random((1, 4, 4))
        weights = [1.0] * 4
        forward_order = [(constant(k), constant(x)) for k, x in stages_np]
        reverse_order = [(constant(k), constant(x)) for k, x in reversed(stages_np)]
        a = forward(total_loss(forward_order, k_gt, x_gt, weights, weights))
        b = forward(total_loss(reverse_order, k_gt, x_gt, weights, weights))
        assert a == pytest.approx(b, rel=1e-12)

    def test_parts_add_up(self, rng):
        stages = [(constant(rng.random((3, 3))), constant(rng.random((1, 4, 4)))) for _ in range(2)]
        total, kernel_part, image_part = loss_terms(stages, np.zeros((3, 3)), np.zeros((1, 4, 4)))
        assert forward(total) == pytest.approx(kernel_part.item() + image_part.item(), rel=1e-12)

    def test_default_weights(self):
        assert default_weights(1) == [1.0]
        assert default_weights(4) == [0.5, 0.5, 0.5, 1.0]

    def test_weight_length_mismatch(self):
        stage = (constant(np.zeros((3, 3))), constant(np.zeros((1, 2, 2))))
        with pytest.raises(ShapeError):
            total_loss([stage], np.zeros((3, 3)), np.zeros((1, 2, 2)), alpha=[1.0, 1.0])
        with pytest.raises(ShapeError):
            total_loss([], np.zeros((3, 3)), np.zeros((1, 2, 2)))

    def test_gradient_is_sign_of_error(self):
        k = leaf(np.array([[0.2, 0.3, 0.1], [0.0, 0.1, 0.1], [0.05, 0.05, 0.1]]))
        k_gt = np.full((3, 3), 0.15)
        x = leaf(np.zeros((1, 2, 2)))
        root = total_loss([(k, x)], k_gt, np.full((1, 2, 2), 0.5), alpha=[2.0], beta=[1.0])
        forward(root)
        grad_k, grad_x = backward(root, [k, x])
        np.testing.assert_allclose(grad_k, 2.0 * np.sign(k.value - k_gt))
        np.testing.assert_allclose(grad_x, -np.ones((1, 2, 2)))


class TestAdam:

    def test_zero_gradient_decays_moments(self):
        cfg = AdamConfig(learning_rate=0.1)
        params = {'w': np.ones(3)}
        moments = AdamMoments({'w': np.full(3, 2.0)}, {'w': np.full(3, 4.0)})
        updated, new = adam_step(params, {'w': np.zeros(3)}, moments, 5, cfg)
        np.testing.assert_allclose(new.first['w'], 0.9 * 2.0)
        np.testing.assert_allclose(new.second['w'], 0.999 * 4.0)
        assert np.all(updated['w'] < 1.0)
        np.testing.assert_array_equal(params['w'], np.ones(3))

    def test_first_step_moves_by_learning_rate(self):
        cfg = AdamConfig(learning_rate=0.01)
        grads = {'w': np.array([3.0, -0.5, 1e-3])}
        updated, _ = adam_step({'w': np.zeros(3)}, grads, AdamMoments(), 1, cfg)
        np.testing.assert_allclose(updated['w'], -0.01 * np.sign(grads['w']), rtol=1e-4)

    def test_step_index_starts_at_one(self):
        with pytest.raises(ValueError):
            adam_step({'w': np.zeros(1)}, {'w': np.zeros(1)}, AdamMoments(), 0, AdamConfig())

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            adam_step({'w': np.zeros(2)}, {'w': np.zeros(3)}, AdamMoments(), 1, AdamConfig())

    def test_trajectory_on_quadratic(self):
        cfg = AdamConfig(learning_rate=0.05, beta1=0.8, beta2=0.99, eps=1e-8)
        target = np.array([1.0, -2.0, 0.5])
        w = leaf(np.zeros(3))
        optimizer = Adam({'w': w}, cfg)

        reference = np.zeros(3)
        m = np.zeros(3)
        v = np.zeros(3)
        for step in range(1, 11):
            optimizer.step({'w': 2.0 * (w.value - target)})
            g = 2.0 * (reference - target)
            m = cfg.beta1 * m + (1 - cfg.beta1) * g
            v = cfg.beta2 * v + (1 - cfg.beta2) * g * g
            m_hat = m / (1 - cfg.beta1 ** step)
            v_hat = v / (1 - cfg.beta2 ** step)
            reference = reference - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)
        np.testing.assert_allclose(w.value, reference, atol=1e-12)
        assert optimizer.step_count == 10

    def test_learning_rate_override(self):
        w = leaf(np.zeros(2))
        optimizer = Adam({'w': w}, AdamConfig(learning_rate=1.0))
        optimizer.step({'w': np.ones(2)}, learning_rate=0.001)
        np.testing.assert_allclose(w.value, -0.001, rtol=1e-4)


class TestStepDecay:

    @pytest.mark.parametrize("step, expected", [(1, 1.0), (6, 1.0), (7, 0.5), (8, 0.5), (9, 0.25), (10, 0.25)])
    def test_milestones(self, step, expected):
        assert step_decay_lr(1.0, step, 10, (0.6, 0.8), 0.5) == pytest.approx(expected)

    def test_no_steps(self):
        assert step_decay_lr(0.3, 5, 0) == 0.3


class TestSyntheticData:

    @pytest.fixture
    def distribution(self):
        return PresetLibrary().get('natural_images')

    def test_procedural_image_range(self, rng):
        image = procedural_image(rng, channels=3, size=24)
        assert image.shape == (3, 24, 24)
        assert image.min() >= 0.0 and image.max() <= 1.0
        assert np.ptp(image) > 0

    def test_deterministic_per_seed(self, distribution):
        a = synth_dataset(3, distribution, seed=5, channels=2, size=16)
        b = synth_dataset(3, distribution, seed=5, channels=2, size=16)
        for pa, pb in zip(a, b):
            np.testing.assert_array_equal(pa.x_gt, pb.x_gt)
            np.testing.assert_array_equal(pa.y, pb.y)
            assert pa.spec == pb.spec
        c = synth_dataset(3, distribution, seed=6, channels=2, size=16)
        assert not np.array_equal(a[0].x_gt, c[0].x_gt)

    def test_pairs_are_consistent(self, distribution):
        for pair in synth_dataset(6, distribution, seed=1, channels=2, size=24):
            s = pair.scale
            assert pair.x_gt.shape[1] % s == 0
            assert pair.y.shape == (2, pair.x_gt.shape[1] // s, pair.x_gt.shape[2] // s)
            assert pair.k_gt.min() >= 0
            assert abs(pair.k_gt.sum() - 1.0) <= 1e-9
            assert pair.k_gt.shape == (distribution.kernel_size(s),) * 2

    def test_fixed_scale_and_noise(self, distribution):
        for pair in synth_dataset(3, distribution, seed=2, channels=1, size=16, scale=2, noise=0.0):
            assert pair.scale == 2
            clean, _ = degrade(pair.x_gt, pair.spec)
            np.testing.assert_array_equal(pair.y, clean)

    def test_empty_dataset_rejected(self, distribution):
        with pytest.raises(ValueError):
            synth_dataset(0, distribution)


class TestPatches:

    @pytest.fixture
    def pair(self, rng):
        image = rng.random((2, 24, 24))
        spec = DegradationSpec(scale=2, sigma_x=1.2, sigma_y=0.8, theta=0.4, noise=0.0, kernel_size=5)
        y, kernel = degrade(image, spec)
        return SamplePair(x_gt=image, y=y, k_gt=kernel, spec=spec)

    def test_full_crop(self, pair):
        x_patch, y_patch = sample_patches(pair, 24, seed=0)
        np.testing.assert_array_equal(x_patch, pair.x_gt)
        np.testing.assert_array_equal(y_patch, pair.y)

    def test_interior_matches_degradation(self, pair):
        k = pair.k_gt.shape[0]
        margin = math.ceil((k // 2) / pair.scale)
        for seed in range(10):
            x_patch, y_patch = sample_patches(pair, 12, seed=seed)
            assert x_patch.shape == (2, 12, 12) and y_patch.shape == (2, 6, 6)
            local = conv_down(x_patch, pair.k_gt, pair.scale)
            inner = slice(margin, 6 - margin)
            np.testing.assert_allclose(local[:, inner, inner], y_patch[:, inner, inner], atol=1e-12)

    def test_deterministic(self, pair):
        a = sample_patches(pair, 8, seed=3)
        b = sample_patches(pair, 8, seed=3)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_errors(self, pair):
        with pytest.raises(ShapeError):
            sample_patches(pair, 7)
        with pytest.raises(ShapeError):
            sample_patches(pair, 26)

    def test_batch(self, pair, rng):
        batch = sample_batch([pair, pair], 3, 8, rng)
        assert len(batch) == 3
        for chosen, x_patch, y_patch in batch:
            assert chosen is pair
            assert x_patch.shape == (2, 8, 8) and y_patch.shape == (2, 4, 4)


class TestTrainConfig:

    def test_from_config(self):
        cfg = tiny_config(learning_rate=0.01, lr_milestones=[0.5])
        train_cfg = TrainConfig.from_config(cfg)
        assert train_cfg.image_size == 16
        assert train_cfg.learning_rate == 0.01
        assert train_cfg.lr_milestones == [0.5]
        assert train_cfg.preset == 'natural_images'
        assert train_cfg.adam().learning_rate == 0.01

    def test_preset_falls_back_to_default(self):
        cfg = config.merged_with({})
        cfg['training'].pop('preset', None)
        assert TrainConfig.from_config(cfg).preset == cfg['degradation']['default_preset']

    def test_corpus_sizes(self):
        train_pairs, holdout = build_corpus(TrainConfig.from_config(tiny_config()))
        assert len(train_pairs) == 4 and len(holdout) == 2
        assert all(pair.scale == 2 for pair in train_pairs + holdout)
        assert not np.array_equal(train_pairs[0].x_gt, holdout[0].x_gt)


class TestTrain:

    def test_zero_steps_returns_initial_model(self):
        cfg = tiny_config(steps=0)
        model = KanoModel(ModelSettings.from_config(cfg))
        before = model.state_dict()
        result = train(cfg, model=model)
        assert result.log == []
        assert result.model is model
        for name, value in model.state_dict().items():
            np.testing.assert_array_equal(value, before[name])

    def test_log_rows(self):
        rows = []
        result = train(tiny_config(), on_step=rows.append)
        assert len(result.log) == 3
        assert rows == result.log
        assert [row['step'] for row in result.log] == [1, 2, 3]
        for row in result.log:
            assert list(row) == LOG_COLUMNS
            assert all(np.isfinite(row[key]) for key in LOG_COLUMNS)
            assert row['loss'] == pytest.approx(row['loss_K'] + row['loss_X'], rel=1e-9)
        assert result.log[0]['loss_ema'] == result.log[0]['loss']
        assert len(result.holdout) == 2

    def test_parameters_change(self):
        cfg = tiny_config(steps=1)
        model = KanoModel(ModelSettings.from_config(cfg))
        before = model.state_dict()
        train(cfg, model=model)
        after = model.state_dict()
        assert any(not np.array_equal(before[name], after[name]) for name in before)

    def test_deterministic(self):
        cfg = tiny_config()
        a = train(cfg)
        b = train(cfg)
        assert without_timing(a.log) == without_timing(b.log)
        for name, value in a.model.state_dict().items():
            np.testing.assert_array_equal(value, b.model.state_dict()[name])

    def test_non_finite_aborts(self):
        cfg = tiny_config()
        model = KanoModel(ModelSettings.from_config(cfg))
        model.parameters()['stages.0.snet.dec_bias'].value[...] = np.inf
        with np.errstate(all='ignore'):
            with pytest.raises(TrainingAborted) as excinfo:
                train(cfg, model=model)
        assert excinfo.value.step == 1
        assert excinfo.value.dump['step'] == 1
        assert len(excinfo.value.dump['specs']) == 2

    def test_float32_precision(self):
        cfg = tiny_config(steps=2)
        cfg['compute'] = {'dtype': 'float32'}
        result = train(cfg)
        assert all(node.value.dtype == np.float32 for node in result.model.parameters().values())
        assert all(np.isfinite(row['loss']) for row in result.log)
        assert leaf(1.0).value.dtype == np.float64

    def test_resume_continues_patch_sampling(self, monkeypatch):
        states = []

        def recording_sample_batch(pairs, batch_size, patch_size, rng):
            states.append(rng.bit_generator.state)
            return sample_batch(pairs, batch_size, patch_size, rng)

        monkeypatch.setattr(trainer_module, 'sample_batch', recording_sample_batch)
        train(tiny_config(steps=3))
        first = train(tiny_config(steps=2))
        assert first.rng_state == states[2]
        train(tiny_config(steps=1), model=first.model, rng_state=first.rng_state)
        assert states[5] == states[2]


class TestEvaluation:

    def test_evaluate_model_summary(self):
        cfg = tiny_config()
        train_cfg = TrainConfig.from_config(cfg)
        _, holdout = build_corpus(train_cfg)
        model = KanoModel(ModelSettings.from_config(cfg))
        summary = evaluate_model(model, holdout)
        assert {'psnr_kano', 'psnr_bicubic', 'kernel_mse_final', 'kernel_mse_init', 'psnr_gain', 'rows'} <= set(summary)
        assert len(summary['rows']) == 2
        assert summary['psnr_gain'] == pytest.approx(summary['psnr_kano'] - summary['psnr_bicubic'])
        assert summary['kernel_mse_init'] > 0

    def test_compare_backbones(self):
        result = compare_backbones(tiny_config(steps=2))
        assert [row['step'] for row in result['curves']] == [1, 2]
        assert set(result['curves'][0]) == {'step', 'kernel_mse_kan', 'kernel_mse_mlp'}
        counts = result['param_counts']
        assert abs(counts['ratio'] - 1.0) <= 0.10
        assert [row['sigma'] for row in result['sigma_sweep']] == pytest.approx([1.35, 1.65, 1.95, 2.25])
        assert set(result['evaluation']) == {'kan', 'mlp'}


@pytest.mark.slow
class TestToyAcceptance:
    """Scaled-down end-to-end experiment (run with --run-slow)"""

    @staticmethod
    def acceptance_config(seed):
        return validate_config(config.merged_with({
            'model': {'stages': 4},
            'training': {'channels': 3, 'image_size': 64, 'corpus_size': 64, 'holdout_size': 8,
                         'patch_size': 32, 'batch_size': 4, 'steps': 2000, 'scale': 2, 'seed': seed,
                         'preset': 'natural_images'},
        }))

    def test_toy_run(self):
        gains = []
        for seed in range(3):
            result = train(self.acceptance_config(seed))
            if seed == 0:
                assert result.log[-1]['loss_ema'] < 0.5 * result.log[49]['loss_ema']
            summary = evaluate_model(result.model, result.holdout)
            if seed == 0:
                assert summary['kernel_mse_final'] < 0.5 * summary['kernel_mse_init']
            gains.append(summary['psnr_gain'])
        assert float(np.median(gains)) >= 0.5

    def test_loss_descends(self):
        for seed in range(5):
            cfg = self.acceptance_config(seed)
            cfg['training']['steps'] = 1000
            log = train(cfg).log
            early = np.median([row['loss'] for row in log if row['step'] <= 100])
            late = np.median([row['loss'] for row in log if row['step'] >= 900])
            assert late < early, f"seed {seed}: median loss {late:.4f} late vs {early:.4f} early"
