"""
Optimizer Module
Bias-corrected Adam and the step-decay learning-rate schedule
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from core.autodiff.node import Node
from core.validation.error_handler import ShapeError

logger = logging.getLogger(__name__)


@dataclass
class AdamConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class AdamMoments:
    first: Dict[str, np.ndarray] = field(default_factory=dict)
    second: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: Dict[str, np.ndarray],
    grads: Dict[str, np.ndarray],
    moments: AdamMoments,
    step: int,
    cfg: AdamConfig
) -> Tuple[Dict[str, np.ndarray], AdamMoments]:
    """
    One Adam update (step counts from 1). Returns new parameter arrays and
    updated moments; inputs are not modified.
    """
    if step < 1:
        raise ValueError(f"Adam step index must be >= 1, got {step}")
    correction1 = 1.0 - cfg.beta1 ** step
    correction2 = 1.0 - cfg.beta2 ** step
    updated: Dict[str, np.ndarray] = {}
    first: Dict[str, np.ndarray] = {}
    second: Dict[str, np.ndarray] = {}
    for name, value in params.items():
        grad = grads[name]
        if grad.shape != value.shape:
            raise ShapeError(f"Gradient for {name} has shape {grad.shape}, parameter {value.shape}")
        m = moments.first.get(name, np.zeros_like(value))
        v = moments.second.get(name, np.zeros_like(value))
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        updated[name] = value - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)
        first[name] = m
        second[name] = v
    return updated, AdamMoments(first, second)


class Adam:
    """Stateful Adam over named parameter nodes (updated in place)"""

    def __init__(self, params: Dict[str, Node], cfg: AdamConfig):
        self.params = params
        self.cfg = cfg
        self.moments = AdamMoments()
        self.step_count = 0

    def step(self, grads: Dict[str, np.ndarray], learning_rate: Optional[float] = None) -> None:
        self.step_count += 1
        cfg = self.cfg if learning_rate is None else AdamConfig(learning_rate, self.cfg.beta1,
                                                                self.cfg.beta2, self.cfg.eps)
        values = {name: node.value for name, node in self.params.items()}
        updated, self.moments = adam_step(values, grads, self.moments, self.step_count, cfg)
        for name, node in self.params.items():
            node.value[...] = updated[name]


def step_decay_lr(base: float, step: int, total_steps: int, milestones: Sequence[float] = (0.6, 0.8),
                  decay: float = 0.5) -> float:
    """base * decay^(number of milestone fractions already passed)"""
    if total_steps <= 0:
        return base
    passed = sum(1 for fraction in milestones if step > fraction * total_steps)
    return base * decay ** passed
