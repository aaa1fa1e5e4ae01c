"""Training module: multi-stage loss, Adam, procedural data and the training loop."""

from core.training.loss import default_weights, loss_terms, total_loss
from core.training.optimizer import Adam, AdamConfig, AdamMoments, adam_step, step_decay_lr
from core.training.synthetic import SamplePair, procedural_image, synth_dataset
from core.training.patches import sample_batch, sample_patches
from core.training.trainer import (
    LOG_COLUMNS, TrainConfig, TrainingResult, build_corpus, compare_backbones, evaluate_model,
    sigma_sweep_pairs, train
)

__all__ = [
    'default_weights', 'loss_terms', 'total_loss', 'Adam', 'AdamConfig', 'AdamMoments', 'adam_step',
    'step_decay_lr', 'SamplePair', 'procedural_image', 'synth_dataset', 'sample_batch', 'sample_patches',
    'LOG_COLUMNS', 'TrainConfig', 'TrainingResult', 'build_corpus', 'compare_backbones', 'evaluate_model',
    'sigma_sweep_pairs', 'train'
]
