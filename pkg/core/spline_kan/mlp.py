"""
MLP Backbone Module
SiLU multilayer perceptron sharing the KanStack interface, used for the
KAN-vs-MLP backbone swap
"""
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from core.autodiff import ops
from core.autodiff.node import Node, constant, leaf
from core.validation.error_handler import ShapeError

logger = logging.getLogger(__name__)


class MlpStack:
    """Dense layers x @ W + b with SiLU between layers (none after the last)"""

    def __init__(
        self,
        widths: Sequence[int],
        rng: Optional[np.random.Generator] = None,
        last_init_scale: Optional[float] = None,
        name: str = 'mlp'
    ):
        if len(widths) < 2 or min(widths) < 1:
            raise ShapeError(f"Invalid MLP widths {list(widths)}")
        rng = rng if rng is not None else np.random.default_rng(0)
        self._widths = list(widths)
        self.weights: List[Node] = []
        self.biases: List[Node] = []
        for index, (d_in, d_out) in enumerate(zip(widths, widths[1:])):
            scale = 1.0 / np.sqrt(d_in)
            if last_init_scale is not None and index == len(widths) - 2:
                scale *= last_init_scale
            self.weights.append(leaf(rng.normal(0.0, 1.0, (d_in, d_out)) * scale, name=f"{name}.layers.{index}.weight"))
            self.biases.append(leaf(np.zeros((1, d_out)), name=f"{name}.layers.{index}.bias"))

    @property
    def d_in(self) -> int:
        return self._widths[0]

    @property
    def d_out(self) -> int:
        return self._widths[-1]

    @property
    def widths(self) -> List[int]:
        return list(self._widths)

    def forward_batch(self, x: Node) -> Node:
        if x.value.ndim != 2 or x.shape[1] != self.d_in:
            raise ShapeError(f"MLP expects (N, {self.d_in}) input, got {x.shape}")
        ones = constant(np.ones((x.shape[0], 1), dtype=x.value.dtype))
        last = len(self.weights) - 1
        for index, (weight, bias) in enumerate(zip(self.weights, self.biases)):
            x = ops.add(ops.matmul(x, weight), ops.matmul(ones, bias))
            if index < last:
                x = ops.silu(x)
        return x

    def parameters(self) -> Dict[str, Node]:
        params = {}
        for index, (weight, bias) in enumerate(zip(self.weights, self.biases)):
            params[f"layers.{index}.weight"] = weight
            params[f"layers.{index}.bias"] = bias
        return params

    def param_count(self) -> int:
        return mlp_param_count(self._widths)


def mlp_param_count(widths: Sequence[int]) -> int:
    return sum(d_in * d_out + d_out for d_in, d_out in zip(widths, widths[1:]))


def kan_param_count(widths: Sequence[int], grid_size: int, degree: int) -> int:
    return sum(d_in * d_out * (grid_size + degree + 2) for d_in, d_out in zip(widths, widths[1:]))


def matched_mlp_widths(kan_widths: Sequence[int], grid_size: int, degree: int) -> List[int]:
    """
    MLP widths with the KAN's depth and end dims whose hidden width makes the
    parameter counts as close as possible. A single-layer stack has no hidden
    width to tune and is returned unchanged.
    """
    widths = list(kan_widths)
    if len(widths) <= 2:
        return widths
    target = kan_param_count(widths, grid_size, degree)
    hidden_layers = len(widths) - 2

    def candidate(h: int) -> List[int]:
        return [widths[0]] + [h] * hidden_layers + [widths[-1]]

    hidden = 1
    while mlp_param_count(candidate(hidden)) < target:
        hidden *= 2
    low, high = hidden // 2, hidden
    while high - low > 1:
        mid = (low + high) // 2
        if mlp_param_count(candidate(mid)) < target:
            low = mid
        else:
            high = mid
    best = min((h for h in (low, high) if h >= 1),
               key=lambda h: abs(mlp_param_count(candidate(h)) - target))
    logger.debug(f"Matched MLP hidden width {best} for KAN widths {widths} ({target} params)")
    return candidate(best)
