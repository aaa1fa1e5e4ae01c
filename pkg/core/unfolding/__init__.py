"""Unfolding module: the staged K / O / S solver with learned proximal networks."""

from core.unfolding.state import UnfoldState, init_state, state_from_arrays
from core.unfolding.data_terms import data_term, grad_K, grad_O, grad_S, project_simplex, residual
from core.unfolding.subnets import BACKBONES, CHANNEL_PLANS, KNet, ONet, SNet, plan_widths
from core.unfolding.model import KanoModel, ModelSettings, Stage, inverse_softplus
from core.unfolding.pipeline import (
    StageObserver, StageResult, knet_step, onet_step, run_unfolding, snet_step, stage_diagnostics,
    super_resolve
)

__all__ = [
    'UnfoldState', 'init_state', 'state_from_arrays', 'data_term', 'grad_K', 'grad_O', 'grad_S',
    'project_simplex', 'residual', 'BACKBONES', 'CHANNEL_PLANS', 'KNet', 'ONet', 'SNet', 'plan_widths',
    'KanoModel', 'ModelSettings', 'Stage', 'inverse_softplus', 'StageObserver', 'StageResult',
    'knet_step', 'onet_step', 'run_unfolding', 'snet_step', 'stage_diagnostics', 'super_resolve'
]
