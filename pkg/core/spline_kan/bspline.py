"""
B-Spline Basis Module
Cox-de Boor evaluation of B-spline bases over extended knot grids, plus the
differentiable basis op used by the KAN layers
"""
import logging
from typing import Tuple

import numpy as np

from core.autodiff.node import Node, Op, apply
from core.validation.error_handler import KnotError

logger = logging.getLogger(__name__)


def uniform_grid(lo: float = -1.0, hi: float = 1.0, grid_size: int = 5, degree: int = 3) -> np.ndarray:
    """
    Uniform knot vector over [lo, hi] with grid_size intervals, extended by
    `degree` knots on each side.

    Returns:
        Array of grid_size + 2 * degree + 1 knots
    """
    if hi <= lo:
        raise KnotError(f"Empty base interval [{lo}, {hi}]")
    if grid_size < 1 or degree < 0:
        raise KnotError(f"Invalid grid_size={grid_size} or degree={degree}")
    step = (hi - lo) / grid_size
    return lo + step * np.arange(-degree, grid_size + degree + 1, dtype=np.float64)


def validate_knots(knots: np.ndarray, degree: int) -> None:
    knots = np.asarray(knots)
    if knots.ndim != 1 or knots.size < 2 * degree + 2:
        raise KnotError(f"Knot vector of length {knots.size} too short for degree {degree}")
    if not np.all(np.diff(knots) > 0):
        raise KnotError("Knots must be strictly increasing")


def base_interval(knots: np.ndarray, degree: int) -> Tuple[float, float]:
    """The interval [g_lo, g_hi] on which the bases form a partition of unity"""
    return float(knots[degree]), float(knots[-degree - 1])


def basis_count(knots: np.ndarray, degree: int) -> int:
    return len(knots) - degree - 1


def _basis_levels(x: np.ndarray, knots: np.ndarray, degree: int) -> Tuple[np.ndarray, np.ndarray]:
    """Bases of degree `degree` and `degree - 1` (the latter None for degree 0)"""
    t = knots
    xe = x[..., None]
    bases = ((xe >= t[:-1]) & (xe < t[1:])).astype(np.result_type(x, np.float64))
    previous = None
    for d in range(1, degree + 1):
        previous = bases
        left = (xe - t[:-(d + 1)]) / (t[d:-1] - t[:-(d + 1)]) * bases[..., :-1]
        right = (t[d + 1:] - xe) / (t[d + 1:] - t[1:-d]) * bases[..., 1:]
        bases = left + right
    return bases, previous


def bspline_basis(x, knots: np.ndarray, degree: int) -> np.ndarray:
    """
    Evaluate all B-spline bases at x (scalar or array, elementwise).

    Inputs are clamped into the base interval first.

    Returns:
        Array of shape x.shape + (G + degree,)
    """
    knots = np.asarray(knots, dtype=np.float64)
    validate_knots(knots, degree)
    lo, hi = base_interval(knots, degree)
    x = np.clip(np.asarray(x, dtype=np.float64), lo, hi)
    bases, _ = _basis_levels(x, knots, degree)
    return bases


def bspline_basis_and_derivative(x: np.ndarray, knots: np.ndarray, degree: int) -> Tuple[np.ndarray, np.ndarray]:
    """Bases and their x-derivatives from a single Cox-de Boor pass (x already in range)"""
    bases, previous = _basis_levels(x, knots, degree)
    if degree == 0:
        return bases, np.zeros_like(bases)
    t = knots
    d = degree
    deriv = d * (previous[..., :-1] / (t[d:-1] - t[:-(d + 1)])
                 - previous[..., 1:] / (t[d + 1:] - t[1:-d]))
    return bases, deriv


class BSplineBasis(Op):
    """x -> [B_0(x), ..., B_{G+degree-1}(x)] along a new trailing axis"""
    name = 'bspline_basis'

    def __init__(self, knots: np.ndarray, degree: int):
        validate_knots(knots, degree)
        self.knots = np.asarray(knots, dtype=np.float64)
        self.degree = degree
        self.lo, self.hi = base_interval(self.knots, degree)
        self._cache = None

    def forward(self, x):
        xc = np.clip(x, self.lo, self.hi)
        bases, deriv = bspline_basis_and_derivative(xc, self.knots, self.degree)
        inside = ((x >= self.lo) & (x <= self.hi))[..., None]
        self._cache = (x, deriv * inside)
        return bases.astype(x.dtype, copy=False)

    def backward(self, grad, x):
        cached_x, deriv = self._cache
        if cached_x is not x:
            self.forward(x)
            _, deriv = self._cache
        return (np.sum(grad * deriv, axis=-1),)


def basis(x: Node, knots: np.ndarray, degree: int) -> Node:
    """Differentiable basis evaluation (values and derivatives computed once)"""
    return apply(BSplineBasis(knots, degree), x)
