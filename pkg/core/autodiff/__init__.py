"""Reverse-mode differentiation engine."""

from core.autodiff.node import (
    Node, Op, Tape, apply, as_node, backward, constant, default_dtype, forward, leaf,
    compute_dtype, topological_order
)
from core.autodiff import ops
from core.autodiff.gradcheck import finite_diff_check

__all__ = [
    'Node', 'Op', 'Tape', 'apply', 'as_node', 'backward', 'constant', 'default_dtype',
    'forward', 'leaf', 'compute_dtype', 'topological_order', 'ops', 'finite_diff_check'
]
