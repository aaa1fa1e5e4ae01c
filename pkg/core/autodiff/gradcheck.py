"""
Finite Difference Oracle
Compares reverse-mode gradients with central differences
"""
import logging
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from core.autodiff.node import Node, backward, forward
from core.validation.error_handler import GraphError, NonFiniteError

logger = logging.getLogger(__name__)


def _coordinates(size: int, limit: Optional[int], rng: np.random.Generator) -> np.ndarray:
    if limit is None or limit >= size:
        return np.arange(size)
    return np.sort(rng.choice(size, size=limit, replace=False))


def finite_diff_check(
    loss_fn: Callable[[], Node],
    leaves: Sequence[Node],
    h: float = 1e-6,
    coords_per_leaf: Optional[int] = None,
    seed: int = 0,
    floor: float = 1e-8,
    report: Optional[List[Dict[str, float]]] = None
) -> float:
    """
    Max relative error between analytic and central-difference gradients.

    Args:
        loss_fn: rebuilds the graph from the current leaf values and returns a scalar root
        leaves: leaf nodes to differentiate (perturbed in place, restored afterwards)
        h: central-difference step
        coords_per_leaf: optional random subset of coordinates per leaf
        seed: seed for the coordinate subset
        floor: denominator floor of the relative error
        report: optional list receiving per-coordinate records

    Returns:
        max |analytic - numeric| / max(|analytic|, |numeric|, floor)
    """
    if h <= 0:
        raise ValueError(f"Step h must be positive, got {h}")
    for node in leaves:
        if not node.is_leaf:
            raise GraphError(f"finite_diff_check expects leaves, got {node!r}")

    root = loss_fn()
    forward(root)
    analytic = [g.copy() for g in backward(root, leaves)]

    rng = np.random.default_rng(seed)
    worst = 0.0
    for index, node in enumerate(leaves):
        flat = node.value.reshape(-1)
        for coord in _coordinates(flat.size, coords_per_leaf, rng):
            original = flat[coord]
            flat[coord] = original + h
            plus = _evaluate(loss_fn, 'plus', node, coord)
            flat[coord] = original - h
            minus = _evaluate(loss_fn, 'minus', node, coord)
            flat[coord] = original

            numeric = (plus - minus) / (2.0 * h)
            exact = float(analytic[index].reshape(-1)[coord])
            denom = max(abs(exact), abs(numeric), floor)
            error = abs(exact - numeric) / denom
            worst = max(worst, error)
            if report is not None:
                report.append({'leaf': index, 'coord': int(coord), 'analytic': exact,
                               'numeric': numeric, 'error': error})

    logger.debug(f"finite_diff_check over {len(leaves)} leaves: max rel error {worst:.3e}")
    return worst


def _evaluate(loss_fn: Callable[[], Node], side: str, node: Node, coord: int) -> float:
    try:
        value = forward(loss_fn())
    except NonFiniteError as e:
        raise NonFiniteError(f"Non-finite loss at {side} perturbation of {node!r}[{coord}]: {e}",
                             op=e.op) from e
    if not np.isfinite(value):
        raise NonFiniteError(f"Non-finite loss at {side} perturbation of {node!r}[{coord}]")
    return value
