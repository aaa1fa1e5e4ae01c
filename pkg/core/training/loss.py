"""
Multi-Stage Loss
Weighted L1 supervision of every stage's kernel and image estimate
"""
import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from core.autodiff import ops
from core.autodiff.node import Node, as_node
from core.unfolding.pipeline import StageResult
from core.validation.error_handler import ShapeError

logger = logging.getLogger(__name__)

StageOutput = Union[StageResult, Tuple[Node, Node]]


def default_weights(stages: int) -> List[float]:
    """0.5 for intermediate stages, 1.0 for the last"""
    return [0.5] * (stages - 1) + [1.0]


def _unpack(stage: StageOutput) -> Tuple[Node, Node]:
    if isinstance(stage, StageResult):
        return stage.K, stage.X
    k, x = stage
    return as_node(k), as_node(x)


def loss_terms(
    stages: Sequence[StageOutput],
    k_gt: np.ndarray,
    x_gt: np.ndarray,
    alpha: Optional[Sequence[float]] = None,
    beta: Optional[Sequence[float]] = None
) -> Tuple[Node, Node, Node]:
    """
    (total, kernel part, image part) with
    total = sum_t alpha_t |K_gt - K_t|_1 + sum_t beta_t |X_gt - X_t|_1
    """
    count = len(stages)
    if count == 0:
        raise ShapeError("total_loss needs at least one stage")
    alpha = list(alpha) if alpha is not None else default_weights(count)
    beta = list(beta) if beta is not None else default_weights(count)
    if len(alpha) != count or len(beta) != count:
        raise ShapeError(f"Loss weights of length {len(alpha)}/{len(beta)} for {count} stages")

    k_target = as_node(k_gt)
    x_target = as_node(x_gt)
    kernel_part = None
    image_part = None
    for weight_k, weight_x, stage in zip(alpha, beta, stages):
        k, x = _unpack(stage)
        term_k = ops.scale(ops.total(ops.absolute(ops.sub(k_target, k))), float(weight_k))
        term_x = ops.scale(ops.total(ops.absolute(ops.sub(x_target, x))), float(weight_x))
        kernel_part = term_k if kernel_part is None else ops.add(kernel_part, term_k)
        image_part = term_x if image_part is None else ops.add(image_part, term_x)
    return ops.add(kernel_part, image_part), kernel_part, image_part


def total_loss(
    stages: Sequence[StageOutput],
    k_gt: np.ndarray,
    x_gt: np.ndarray,
    alpha: Optional[Sequence[float]] = None,
    beta: Optional[Sequence[float]] = None
) -> Node:
    total, _, _ = loss_terms(stages, k_gt, x_gt, alpha, beta)
    return total
