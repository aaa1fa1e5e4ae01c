"""
Unfolding Pipeline
Stage steps K -> O -> S (Gauss-Seidel order), the full stage loop and per-stage
diagnostics
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from core.autodiff import ops
from core.autodiff.node import Node, as_node
from core.degradation.kernels import kernel_mse
from core.degradation.operators import conv_down
from core.unfolding.data_terms import grad_K, grad_O, grad_S
from core.unfolding.model import KanoModel
from core.unfolding.state import UnfoldState, init_state
from core.validation.error_handler import NonFiniteError, ShapeError

logger = logging.getLogger(__name__)


@dataclass
class StageResult:
    stage: int
    K: Node
    O: Node
    S: Node
    X: Node
    X_init: np.ndarray


class StageObserver:
    """Records the state seen by every gradient evaluation"""

    def __init__(self):
        self.events: List[Dict[str, Any]] = []

    def notify(self, stage: int, step: str, state: UnfoldState) -> None:
        self.events.append({'stage': stage, 'step': step, 'K': state.K, 'O': state.O, 'S': state.S})

    def find(self, stage: int, step: str) -> Dict[str, Any]:
        for event in self.events:
            if event['stage'] == stage and event['step'] == step:
                return event
        raise KeyError(f"No event for stage {stage}, step {step}")


def _notify(observer: Optional[StageObserver], t: int, step: str, state: UnfoldState) -> None:
    if observer is not None:
        observer.notify(t, step, state)


def knet_step(state: UnfoldState, y: Node, model: KanoModel, t: int,
              observer: Optional[StageObserver] = None) -> Node:
    """K-Net(K - gamma_1 grad_K), always on the simplex"""
    _notify(observer, t, 'knet', state)
    k_in = ops.sub(state.K, ops.scale(grad_K(state, y), model.step_size(t, 'k')))
    return model.stages[t].knet(k_in)


def onet_step(state: UnfoldState, y: Node, model: KanoModel, t: int,
              observer: Optional[StageObserver] = None) -> Node:
    """O-Net(O - gamma_2 grad_O)"""
    _notify(observer, t, 'onet', state)
    o_in = ops.sub(state.O, ops.scale(grad_O(state, y), model.step_size(t, 'o')))
    return model.stages[t].onet(o_in)


def snet_step(state: UnfoldState, y: Node, model: KanoModel, t: int,
              observer: Optional[StageObserver] = None) -> Node:
    """S-Net(S - gamma_3 grad_S); state must already hold the stage-t O"""
    _notify(observer, t, 'snet', state)
    s_in = ops.sub(state.S, ops.scale(grad_S(state, y), model.step_size(t, 's')))
    snet = model.stages[t].snet
    if snet is None:
        return s_in
    return snet(s_in)


def run_unfolding(
    y: Union[np.ndarray, Node],
    model: KanoModel,
    scale: Optional[int] = None,
    kernel_size: Optional[int] = None,
    initial: Optional[UnfoldState] = None,
    observer: Optional[StageObserver] = None
) -> List[StageResult]:
    """
    Run every stage of the model on observation Y.

    Returns:
        One StageResult per stage; X = O + S at each
    """
    scale = scale if scale is not None else model.scale
    kernel_size = kernel_size if kernel_size is not None else model.kernel_size
    if kernel_size != model.kernel_size:
        raise ShapeError(f"Model was built for {model.kernel_size}x{model.kernel_size} kernels, got {kernel_size}")
    y = as_node(y)
    state = initial if initial is not None else init_state(y, scale, kernel_size)
    if state.scale != scale:
        raise ShapeError(f"Initial state scale {state.scale} != {scale}")

    x_init = state.X.value
    results: List[StageResult] = []
    for t in range(model.num_stages):
        try:
            state = state.evolve(K=knet_step(state, y, model, t, observer), stage=t + 1)
            state = state.evolve(O=onet_step(state, y, model, t, observer))
            state = state.evolve(S=snet_step(state, y, model, t, observer))
        except NonFiniteError as e:
            raise NonFiniteError(f"Stage {t + 1}: {e}", op=e.op, stage=t + 1) from e
        results.append(StageResult(stage=t + 1, K=state.K, O=state.O, S=state.S, X=state.X, X_init=x_init))
        logger.debug(f"Stage {t + 1}/{model.num_stages} done")
    return results


def super_resolve(y: np.ndarray, model: KanoModel, scale: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray, List[StageResult]]:
    """Numpy convenience: (X_hat, K_hat, stage results)"""
    stages = run_unfolding(y, model, scale)
    final = stages[-1]
    return final.X.value.copy(), final.K.value.copy(), stages


def stage_diagnostics(
    stages: List[StageResult],
    x_gt: Optional[np.ndarray] = None,
    k_gt: Optional[np.ndarray] = None,
    y: Optional[np.ndarray] = None,
    scale: Optional[int] = None
) -> List[Dict[str, Optional[float]]]:
    """
    Per-stage diagnostics: data-fit residual RMSE (when Y is given), kernel simplex
    check, and MSE of O, S, X and K against ground truth (None when absent).

    The scale defaults to the height ratio of X and Y. S is compared with the detail
    the initial estimate misses, X_gt - X0.
    """
    rows = []
    for result in stages:
        o, s, x, k = result.O.value, result.S.value, result.X.value, result.K.value
        row: Dict[str, Optional[float]] = {
            'stage': result.stage,
            'residual_rmse': None,
            'kernel_min': float(k.min()),
            'kernel_sum': float(k.sum()),
            'mse_O': None,
            'mse_S': None,
            'mse_X': None,
            'kernel_mse': kernel_mse(k, k_gt) if k_gt is not None else None,
        }
        if y is not None:
            factor = scale if scale is not None else x.shape[1] // y.shape[1]
            row['residual_rmse'] = float(np.sqrt(np.mean((y - conv_down(x, k, factor)) ** 2)))
        if x_gt is not None:
            row['mse_O'] = float(np.mean((o - x_gt) ** 2))
            row['mse_S'] = float(np.mean((s - (x_gt - result.X_init)) ** 2))
            row['mse_X'] = float(np.mean((x - x_gt) ** 2))
        rows.append(row)
    return rows
