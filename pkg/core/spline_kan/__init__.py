"""Spline KAN module: B-spline bases, KAN layers/stacks and the MLP baseline."""

from core.spline_kan.bspline import (
    BSplineBasis, base_interval, basis, basis_count, bspline_basis, bspline_basis_and_derivative,
    uniform_grid, validate_knots
)
from core.spline_kan.kan_layer import (
    KanLayer, KanStack, SplineFunction, grid_settings, kan1d_apply, kan2d_apply, kan_forward,
    kan_layer_forward, phi_eval
)
from core.spline_kan.mlp import MlpStack, kan_param_count, matched_mlp_widths, mlp_param_count

__all__ = [
    'BSplineBasis', 'base_interval', 'basis', 'basis_count', 'bspline_basis',
    'bspline_basis_and_derivative', 'uniform_grid', 'validate_knots',
    'KanLayer', 'KanStack', 'SplineFunction', 'grid_settings', 'kan1d_apply', 'kan2d_apply',
    'kan_forward', 'kan_layer_forward', 'phi_eval',
    'MlpStack', 'kan_param_count', 'matched_mlp_widths', 'mlp_param_count'
]
