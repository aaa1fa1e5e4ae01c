"""
Unfolding State
The (K, O, S) iterate of the unfolded solver and its bicubic / separable-Gaussian
initialization
"""
import logging
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from core.autodiff import ops
from core.autodiff.node import Node, as_node, constant
from core.degradation.kernels import gaussian_sep_init
from core.degradation.resampling import bicubic_upsample
from core.validation.error_handler import ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UnfoldState:
    """Kernel K, smooth component O, perturbation S; X = O + S"""
    K: Node
    O: Node
    S: Node
    scale: int
    stage: int = 0

    def __post_init__(self):
        if self.O.shape != self.S.shape:
            raise ShapeError(f"O and S shapes differ: {self.O.shape} vs {self.S.shape}")

    @property
    def X(self) -> Node:
        return ops.add(self.O, self.S)

    @property
    def kernel_size(self) -> int:
        return self.K.shape[0]

    def evolve(self, **changes) -> 'UnfoldState':
        return replace(self, **changes)


def state_from_arrays(K: np.ndarray, O: np.ndarray, S: np.ndarray, scale: int) -> UnfoldState:
    return UnfoldState(as_node(K), as_node(O), as_node(S), scale)


def init_state(y: Union[np.ndarray, Node], scale: int, kernel_size: int) -> UnfoldState:
    """X0 = bicubic(Y), O0 = X0, S0 = 0, K0 = separable std-1 Gaussian"""
    y_value = y.value if isinstance(y, Node) else np.asarray(y)
    if y_value.ndim != 3:
        raise ShapeError(f"Expected a (C, h, w) observation, got shape {y_value.shape}")
    x0 = bicubic_upsample(y_value, scale)
    logger.debug(f"Initial state: Y {y_value.shape} -> X0 {x0.shape}, k={kernel_size}")
    return UnfoldState(
        K=constant(gaussian_sep_init(kernel_size)),
        O=constant(x0),
        S=constant(np.zeros_like(x0)),
        scale=scale,
    )
