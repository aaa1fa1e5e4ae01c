"""
Data Terms
Residual of the observation model, explicit gradients of f = 1/2 ||Y - K (x)_s (O + S)||^2
with respect to K, O and S, and the simplex projection of kernels
"""
import logging
from typing import Union

import numpy as np

from core.autodiff import ops
from core.autodiff.node import Node, as_node, constant
from core.unfolding.state import UnfoldState
from core.validation.error_handler import ShapeError

logger = logging.getLogger(__name__)


def _observation(state: UnfoldState, y: Union[Node, np.ndarray]) -> Node:
    y = as_node(y)
    c, height, width = state.O.shape
    s = state.scale
    if y.shape != (c, height // s, width // s) or height % s or width % s:
        raise ShapeError(f"Observation {y.shape} inconsistent with state {state.O.shape} at scale {s}")
    return y


def residual(state: UnfoldState, y: Union[Node, np.ndarray]) -> Node:
    """r = Y - K (x)_s X"""
    y = _observation(state, y)
    return ops.sub(y, ops.blur_down(state.X, state.K, state.scale))


def data_term(state: UnfoldState, y: Union[Node, np.ndarray]) -> Node:
    """f = 1/2 ||r||^2"""
    r = residual(state, y)
    return ops.scale(ops.total(ops.square(r)), 0.5)


def grad_K(state: UnfoldState, y: Union[Node, np.ndarray]) -> Node:
    """df/dK = -corr(X, r) over the k x k support"""
    r = residual(state, y)
    return ops.scale(ops.kernel_correlate(state.X, r, state.kernel_size, state.scale), -1.0)


def grad_O(state: UnfoldState, y: Union[Node, np.ndarray]) -> Node:
    """df/dO = -K (x)_s^T r"""
    r = residual(state, y)
    return ops.scale(ops.blur_transpose(r, state.K, state.scale), -1.0)


def grad_S(state: UnfoldState, y: Union[Node, np.ndarray]) -> Node:
    """df/dS; same operator as grad_O, evaluated on the state after the O update"""
    return grad_O(state, y)


def project_simplex(kernel: Union[Node, np.ndarray]) -> Union[Node, np.ndarray]:
    """
    Clamp negatives to zero and normalize to unit sum.

    Inputs already exactly on the simplex keep their values; graph inputs still pass
    through the clamp and normalize ops so the backward pass sees their Jacobian.
    An input with no positive entry maps to the uniform kernel.
    """
    as_graph = isinstance(kernel, Node)
    if not as_graph and kernel.min() >= 0 and kernel.sum() == 1.0:
        return kernel
    k = as_node(kernel)
    value = k.value
    positive = ops.relu(k)
    mass = ops.total(positive)
    if mass.value <= 0:
        logger.warning(f"Kernel has no positive entries, falling back to uniform {value.shape}")
        uniform = constant(np.full(value.shape, 1.0 / value.size, dtype=value.dtype))
        return uniform if as_graph else uniform.value
    out = ops.scale(positive, ops.reciprocal(mass))
    return out if as_graph else out.value
