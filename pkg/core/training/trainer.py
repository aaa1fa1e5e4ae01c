"""
Trainer Module
The training loop (sample batch -> unfold -> loss -> backward -> Adam), held-out
evaluation and the KAN-vs-MLP K-Net comparison
"""
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from core.autodiff import ops
from core.autodiff.node import backward, compute_dtype, forward
from core.config.config_manager import config
from core.degradation.degrade import DegradationSpec, degrade
from core.degradation.kernels import gaussian_sep_init, kernel_mse
from core.degradation.presets import PresetLibrary
from core.degradation.resampling import bicubic_upsample
from core.metrics.image_metrics import psnr
from core.training.loss import default_weights, loss_terms
from core.training.optimizer import Adam, AdamConfig, step_decay_lr
from core.training.patches import sample_batch
from core.training.synthetic import SamplePair, procedural_image, synth_dataset
from core.unfolding.model import KanoModel, ModelSettings
from core.unfolding.pipeline import run_unfolding
from core.validation.error_handler import NonFiniteError, TrainingAborted

logger = logging.getLogger(__name__)

LOG_COLUMNS = ['step', 'loss', 'loss_K', 'loss_X', 'kernel_mse', 'lr', 'seconds', 'loss_ema']


@dataclass
class TrainConfig:
    """Training hyperparameters (training section of the config)"""
    channels: int = 3
    image_size: int = 64
    corpus_size: int = 64
    holdout_size: int = 8
    patch_size: int = 32
    batch_size: int = 4
    steps: int = 2000
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    lr_milestones: List[float] = field(default_factory=lambda: [0.6, 0.8])
    lr_decay: float = 0.5
    scale: int = 2
    seed: int = 0
    ema_decay: float = 0.98
    preset: str = 'natural_images'
    loss_weights_k: Optional[List[float]] = None
    loss_weights_x: Optional[List[float]] = None

    @classmethod
    def from_config(cls, cfg: Optional[Dict[str, Any]] = None) -> 'TrainConfig':
        cfg = cfg if cfg is not None else config.all
        training = dict(cfg.get('training', {}))
        training.setdefault('preset', cfg.get('degradation', {}).get('default_preset', 'natural_images'))
        return cls(**{key: training[key] for key in cls.__dataclass_fields__ if key in training})

    def adam(self) -> AdamConfig:
        return AdamConfig(self.learning_rate, self.beta1, self.beta2, self.eps)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TrainingResult:
    model: KanoModel
    log: List[Dict[str, float]]
    holdout: List[SamplePair]
    rng_state: Optional[Dict[str, Any]] = None


def build_corpus(train_cfg: TrainConfig, presets: Optional[PresetLibrary] = None) -> Tuple[List[SamplePair], List[SamplePair]]:
    """Training and held-out pairs from the configured preset (disjoint seeds)"""
    distribution = (presets or PresetLibrary()).get(train_cfg.preset)
    train_pairs = synth_dataset(train_cfg.corpus_size, distribution, train_cfg.seed, train_cfg.channels,
                                train_cfg.image_size, scale=train_cfg.scale)
    holdout = synth_dataset(train_cfg.holdout_size, distribution, train_cfg.seed + 10_000, train_cfg.channels,
                            train_cfg.image_size, scale=train_cfg.scale)
    return train_pairs, holdout


def _progress_enabled() -> bool:
    return bool(config.get('progress.enabled', True)) and sys.stderr.isatty()


def train(
    cfg: Optional[Dict[str, Any]] = None,
    pairs: Optional[List[SamplePair]] = None,
    holdout: Optional[List[SamplePair]] = None,
    model: Optional[KanoModel] = None,
    on_step: Optional[Callable[[Dict[str, float]], None]] = None,
    rng_state: Optional[Dict[str, Any]] = None
) -> TrainingResult:
    """
    Train a KanoModel.

    Args:
        cfg: resolved configuration dict (defaults to the global config)
        pairs / holdout: training and held-out pairs (generated when omitted)
        model: model to continue training (built from cfg when omitted)
        on_step: callback receiving each log row
        rng_state: patch-sampling generator state to resume from (seeded from training.seed when omitted)

    Raises:
        TrainingAborted carrying the step, offending stage and a diagnostic dump
    """
    cfg = cfg if cfg is not None else config.all
    with compute_dtype(cfg.get('compute', {}).get('dtype')):
        return _run_training(cfg, pairs, holdout, model, on_step, rng_state)


def _run_training(
    cfg: Dict[str, Any],
    pairs: Optional[List[SamplePair]],
    holdout: Optional[List[SamplePair]],
    model: Optional[KanoModel],
    on_step: Optional[Callable[[Dict[str, float]], None]],
    rng_state: Optional[Dict[str, Any]]
) -> TrainingResult:
    train_cfg = TrainConfig.from_config(cfg)
    if pairs is None:
        pairs, generated_holdout = build_corpus(train_cfg)
        holdout = holdout if holdout is not None else generated_holdout
    model = model if model is not None else KanoModel(ModelSettings.from_config(cfg, scale=train_cfg.scale))

    log: List[Dict[str, float]] = []
    if train_cfg.steps <= 0:
        logger.info("Zero training steps requested, returning the initialized model")
        return TrainingResult(model, log, holdout or [])

    params = model.parameters()
    names = list(params)
    leaves = [params[name] for name in names]
    optimizer = Adam(params, train_cfg.adam())
    alpha = train_cfg.loss_weights_k or default_weights(model.num_stages)
    beta = train_cfg.loss_weights_x or default_weights(model.num_stages)
    rng = np.random.default_rng(train_cfg.seed)
    if rng_state is not None:
        rng.bit_generator.state = rng_state
    ema = None
    start = time.perf_counter()

    logger.info(f"Training {train_cfg.steps} steps: batch {train_cfg.batch_size}, patch {train_cfg.patch_size}, "
                f"scale {train_cfg.scale}, {len(pairs)} pairs")
    progress = tqdm(range(1, train_cfg.steps + 1), desc='train', disable=not _progress_enabled())
    for step in progress:
        lr = step_decay_lr(train_cfg.learning_rate, step, train_cfg.steps, train_cfg.lr_milestones, train_cfg.lr_decay)
        batch = sample_batch(pairs, train_cfg.batch_size, train_cfg.patch_size, rng)
        try:
            totals, kernel_terms, image_terms, kernel_errors = [], [], [], []
            for pair, x_patch, y_patch in batch:
                stages = run_unfolding(y_patch, model, train_cfg.scale)
                total, kernel_part, image_part = loss_terms(stages, pair.k_gt, x_patch, alpha, beta)
                totals.append(total)
                kernel_terms.append(kernel_part.item())
                image_terms.append(image_part.item())
                kernel_errors.append(kernel_mse(stages[-1].K.value, pair.k_gt))
            root = totals[0]
            for term in totals[1:]:
                root = ops.add(root, term)
            root = ops.scale(root, 1.0 / len(totals))
            loss = forward(root)
            grads = backward(root, leaves)
        except NonFiniteError as e:
            dump = {'step': step, 'stage': e.stage, 'op': e.op, 'lr': lr,
                    'specs': [pair.spec.to_dict() for pair, _, _ in batch],
                    'last_row': log[-1] if log else None}
            logger.error(f"Non-finite value at step {step} (stage {e.stage}, op {e.op})")
            raise TrainingAborted(f"Non-finite loss at step {step}: {e}", step=step, stage=e.stage, dump=dump) from e

        for name, grad in zip(names, grads):
            if not np.all(np.isfinite(grad)):
                dump = {'step': step, 'stage': None, 'op': 'gradient', 'parameter': name, 'lr': lr}
                raise TrainingAborted(f"Non-finite gradient for {name} at step {step}", step=step, dump=dump)
        optimizer.step(dict(zip(names, grads)), learning_rate=lr)

        ema = loss if ema is None else train_cfg.ema_decay * ema + (1.0 - train_cfg.ema_decay) * loss
        row = {
            'step': step,
            'loss': loss,
            'loss_K': float(np.mean(kernel_terms)),
            'loss_X': float(np.mean(image_terms)),
            'kernel_mse': float(np.mean(kernel_errors)),
            'lr': lr,
            'seconds': time.perf_counter() - start,
            'loss_ema': ema,
        }
        log.append(row)
        progress.set_postfix(loss=f"{loss:.4f}", ema=f"{ema:.4f}")
        if on_step is not None:
            on_step(row)

    logger.info(f"Training finished: final loss {log[-1]['loss']:.5f}, EMA {ema:.5f}, "
                f"{log[-1]['seconds']:.1f}s")
    return TrainingResult(model, log, holdout or [], rng.bit_generator.state)


def evaluate_model(model: KanoModel, pairs: List[SamplePair], peak: Optional[float] = None) -> Dict[str, Any]:
    """
    Held-out comparison of the model against bicubic upsampling and of the final
    kernel against the initial separable kernel.
    """
    rows = []
    for index, pair in enumerate(pairs):
        stages = run_unfolding(pair.y, model, pair.scale)
        x_hat = stages[-1].X.value
        bicubic = bicubic_upsample(pair.y, pair.scale)
        rows.append({
            'pair': index,
            'psnr_kano': psnr(pair.x_gt, x_hat, peak),
            'psnr_bicubic': psnr(pair.x_gt, bicubic, peak),
            'kernel_mse_final': kernel_mse(stages[-1].K.value, pair.k_gt),
            'kernel_mse_init': kernel_mse(gaussian_sep_init(model.kernel_size), pair.k_gt),
        })
    summary = {key: float(np.mean([row[key] for row in rows]))
               for key in ('psnr_kano', 'psnr_bicubic', 'kernel_mse_final', 'kernel_mse_init')}
    summary['psnr_gain'] = summary['psnr_kano'] - summary['psnr_bicubic']
    summary['rows'] = rows
    return summary


def sigma_sweep_pairs(sigmas: List[float], scale: int, kernel_size: int, channels: int, size: int,
                      seed: int) -> List[SamplePair]:
    """One noiseless isotropic pair per sigma over a shared procedural image"""
    rng = np.random.default_rng(seed)
    image = procedural_image(rng, channels, size)
    image = image[:, :size - size % scale, :size - size % scale]
    pairs = []
    for sigma in sigmas:
        spec = DegradationSpec(scale=scale, sigma_x=sigma, sigma_y=sigma, theta=0.0, noise=0.0,
                               seed=seed, kernel_size=kernel_size)
        y, kernel = degrade(image, spec)
        pairs.append(SamplePair(x_gt=image, y=y, k_gt=kernel, spec=spec))
    return pairs


def compare_backbones(cfg: Optional[Dict[str, Any]] = None, sweep_preset: str = 'hyperspectral') -> Dict[str, Any]:
    """
    Train KAN and MLP K-Net variants from the same seed and data.

    Returns:
        curves (step, kernel_mse_kan, kernel_mse_mlp), K-Net parameter counts and
        their ratio, and per-sigma kernel MSE on the preset's sweep sigmas
    """
    cfg = cfg if cfg is not None else config.all
    with compute_dtype(cfg.get('compute', {}).get('dtype')):
        return _run_comparison(cfg, sweep_preset)


def _run_comparison(cfg: Dict[str, Any], sweep_preset: str) -> Dict[str, Any]:
    train_cfg = TrainConfig.from_config(cfg)
    presets = PresetLibrary()
    pairs, holdout = build_corpus(train_cfg, presets)

    results = {}
    for backbone in ('kan', 'mlp'):
        model = KanoModel(ModelSettings.from_config(cfg, scale=train_cfg.scale, backbone=backbone))
        logger.info(f"Training {backbone.upper()} K-Net variant")
        results[backbone] = train(cfg, pairs=pairs, holdout=holdout, model=model)

    kan_log, mlp_log = results['kan'].log, results['mlp'].log
    curves = [{'step': a['step'], 'kernel_mse_kan': a['kernel_mse'], 'kernel_mse_mlp': b['kernel_mse']}
              for a, b in zip(kan_log, mlp_log)]

    kan_model, mlp_model = results['kan'].model, results['mlp'].model
    sweep = presets.get(sweep_preset).sweep_sigmas if sweep_preset in presets.presets else []
    sweep_rows = []
    for pair in sigma_sweep_pairs(sweep, train_cfg.scale, kan_model.kernel_size, train_cfg.channels,
                                  train_cfg.image_size, train_cfg.seed):
        row = {'sigma': pair.spec.sigma_x}
        for backbone, model in (('kan', kan_model), ('mlp', mlp_model)):
            k_hat = run_unfolding(pair.y, model, pair.scale)[-1].K.value
            row[f"kernel_mse_{backbone}"] = kernel_mse(k_hat, pair.k_gt)
        sweep_rows.append(row)

    kan_params = kan_model.knet_param_count()
    mlp_params = mlp_model.knet_param_count()
    return {
        'curves': curves,
        'sigma_sweep': sweep_rows,
        'param_counts': {'kan': kan_params, 'mlp': mlp_params, 'ratio': mlp_params / kan_params},
        'evaluation': {
            'kan': {k: v for k, v in evaluate_model(kan_model, holdout).items() if k != 'rows'},
            'mlp': {k: v for k, v in evaluate_model(mlp_model, holdout).items() if k != 'rows'},
        },
    }
