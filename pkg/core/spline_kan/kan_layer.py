"""
KAN Layer Module
Learnable univariate spline functions, Kolmogorov-Arnold layers and stacks, and
their per-pixel application to (C, H, W) cubes
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.autodiff import ops
from core.autodiff.node import Node, as_node, constant, default_dtype, leaf
from core.config.config_manager import config
from core.spline_kan.bspline import base_interval, basis, basis_count, uniform_grid, validate_knots
from core.validation.error_handler import KnotError, NonFiniteError, ShapeError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray, Node]


def grid_settings(overrides: Optional[Dict] = None) -> Dict:
    """KAN grid settings from config.kan, optionally overridden"""
    settings = {
        'grid_range': tuple(config.get('kan.grid_range', [-1.0, 1.0])),
        'grid_size': int(config.get('kan.grid_size', 5)),
        'degree': int(config.get('kan.degree', 3)),
        'coef_std': float(config.get('kan.coef_std', 0.1)),
    }
    if overrides:
        settings.update({k: v for k, v in overrides.items() if v is not None})
    return settings


@dataclass
class SplineFunction:
    """phi(x) = w_b * silu(x) + w_s * sum_i c_i B_i(clamp(x))"""
    knots: np.ndarray
    degree: int
    coefficients: ArrayLike
    w_b: ArrayLike = 1.0
    w_s: ArrayLike = 1.0

    def __post_init__(self):
        self.knots = np.asarray(self.knots, dtype=np.float64)
        if self.degree < 1:
            raise KnotError(f"Spline degree must be >= 1, got {self.degree}")
        validate_knots(self.knots, self.degree)
        coefficients = self.coefficients.value if isinstance(self.coefficients, Node) else np.asarray(self.coefficients)
        if coefficients.shape != (self.n_basis,):
            raise KnotError(f"Expected {self.n_basis} coefficients, got shape {coefficients.shape}")
        for value in (coefficients, _raw(self.w_b), _raw(self.w_s)):
            if not np.all(np.isfinite(value)):
                raise NonFiniteError("Spline parameters must be finite", op='spline_function')

    @classmethod
    def uniform(cls, coefficients: ArrayLike, grid_size: int = 5, degree: int = 3,
                lo: float = -1.0, hi: float = 1.0, w_b: ArrayLike = 1.0, w_s: ArrayLike = 1.0) -> 'SplineFunction':
        return cls(uniform_grid(lo, hi, grid_size, degree), degree, coefficients, w_b, w_s)

    @property
    def grid_size(self) -> int:
        return len(self.knots) - 2 * self.degree - 1

    @property
    def n_basis(self) -> int:
        return basis_count(self.knots, self.degree)

    @property
    def interval(self) -> Tuple[float, float]:
        return base_interval(self.knots, self.degree)


def _raw(value: ArrayLike) -> np.ndarray:
    return value.value if isinstance(value, Node) else np.asarray(value)


def phi_eval(x: ArrayLike, f: SplineFunction) -> ArrayLike:
    """
    Evaluate a spline function elementwise.

    Returns a Node when x is a Node (differentiable in x, c, w_b and w_s when
    those are nodes), otherwise a numpy array of x's shape.
    """
    as_graph = isinstance(x, Node)
    xn = as_node(x)
    lo, hi = f.interval
    shape = xn.shape

    bases = basis(ops.clamp(xn, lo, hi), f.knots, f.degree)
    flat = ops.reshape(bases, (int(np.prod(shape, dtype=int)), f.n_basis))
    spline = ops.reshape(ops.matmul(flat, as_node(f.coefficients)), shape)
    out = ops.add(ops.scale(ops.silu(xn), f.w_b), ops.scale(spline, f.w_s))
    return out if as_graph else out.value


class KanLayer:
    """
    d_in x d_out matrix of spline edges; out_j = sum_i phi_ij(x_i).

    Parameters are stored as three leaves: coefficients (d_in, d_out, G + degree),
    base weights (d_in, d_out) and spline weights (d_in, d_out).
    """

    def __init__(
        self,
        d_in: int,
        d_out: int,
        rng: Optional[np.random.Generator] = None,
        init_scale: float = 1.0,
        grid_range: Optional[Sequence[float]] = None,
        grid_size: Optional[int] = None,
        degree: Optional[int] = None,
        coef_std: Optional[float] = None,
        name: str = 'kan'
    ):
        if d_in < 1 or d_out < 1:
            raise ShapeError(f"KanLayer dims must be positive, got {d_in}x{d_out}")
        settings = grid_settings({'grid_range': grid_range, 'grid_size': grid_size,
                                  'degree': degree, 'coef_std': coef_std})
        rng = rng if rng is not None else np.random.default_rng(0)
        lo, hi = settings['grid_range']

        self.d_in = d_in
        self.d_out = d_out
        self.degree = settings['degree']
        self.knots = uniform_grid(lo, hi, settings['grid_size'], self.degree)
        self.n_basis = basis_count(self.knots, self.degree)
        self.lo, self.hi = base_interval(self.knots, self.degree)
        self.name = name

        self.coef = leaf(rng.normal(0.0, settings['coef_std'], (d_in, d_out, self.n_basis)), name=f"{name}.coef")
        self.base_weight = leaf(np.full((d_in, d_out), init_scale), name=f"{name}.base_weight")
        self.spline_weight = leaf(np.full((d_in, d_out), init_scale), name=f"{name}.spline_weight")
        # Row i * M + m selects input i: repeats w_s across the M basis slots
        self._expand = np.repeat(np.eye(d_in, dtype=default_dtype()), self.n_basis, axis=0)

    def forward_batch(self, x: Node) -> Node:
        """(N, d_in) -> (N, d_out)"""
        if x.value.ndim != 2 or x.shape[1] != self.d_in:
            raise ShapeError(f"{self.name}: expected (N, {self.d_in}) input, got {x.shape}")
        n = x.shape[0]
        base = ops.matmul(ops.silu(x), self.base_weight)

        bases = basis(ops.clamp(x, self.lo, self.hi), self.knots, self.degree)
        flat = ops.reshape(bases, (n, self.d_in * self.n_basis))
        coef = ops.reshape(ops.transpose(self.coef, (0, 2, 1)), (self.d_in * self.n_basis, self.d_out))
        weighted = ops.mul(coef, ops.matmul(constant(self._expand), self.spline_weight))
        return ops.add(base, ops.matmul(flat, weighted))

    def edge(self, i: int, j: int) -> SplineFunction:
        """Snapshot of the spline on edge (i, j)"""
        return SplineFunction(self.knots.copy(), self.degree, self.coef.value[i, j].copy(),
                              float(self.base_weight.value[i, j]), float(self.spline_weight.value[i, j]))

    def parameters(self) -> Dict[str, Node]:
        return {'coef': self.coef, 'base_weight': self.base_weight, 'spline_weight': self.spline_weight}

    def param_count(self) -> int:
        return self.d_in * self.d_out * (self.n_basis + 2)

    def __repr__(self) -> str:
        return f"KanLayer({self.d_in}->{self.d_out}, G={len(self.knots) - 2 * self.degree - 1}, degree={self.degree})"


@dataclass
class KanStack:
    """Composition of KAN layers with compatible dims"""
    layers: List[KanLayer] = field(default_factory=list)

    def __post_init__(self):
        if not self.layers:
            raise ShapeError("KanStack needs at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.d_out != nxt.d_in:
                raise ShapeError(f"Incompatible layers: {prev!r} then {nxt!r}")

    @classmethod
    def from_widths(
        cls,
        widths: Sequence[int],
        rng: Optional[np.random.Generator] = None,
        fan_in_scaling: bool = False,
        last_init_scale: Optional[float] = None,
        name: str = 'kan',
        **grid
    ) -> 'KanStack':
        """
        Build a stack from [d0, d1, ..., dL].

        Args:
            fan_in_scaling: initialize w_b, w_s at 1/d_in instead of 1
            last_init_scale: override for the final layer (0 makes the stack output zero)
        """
        if len(widths) < 2:
            raise ShapeError(f"Need at least two widths, got {list(widths)}")
        rng = rng if rng is not None else np.random.default_rng(0)
        layers = []
        for index, (d_in, d_out) in enumerate(zip(widths, widths[1:])):
            scale = 1.0 / d_in if fan_in_scaling else 1.0
            if last_init_scale is not None and index == len(widths) - 2:
                scale = last_init_scale
            layers.append(KanLayer(d_in, d_out, rng=rng, init_scale=scale, name=f"{name}.layers.{index}", **grid))
        return cls(layers)

    @property
    def d_in(self) -> int:
        return self.layers[0].d_in

    @property
    def d_out(self) -> int:
        return self.layers[-1].d_out

    @property
    def widths(self) -> List[int]:
        return [self.layers[0].d_in] + [layer.d_out for layer in self.layers]

    def forward_batch(self, x: Node) -> Node:
        for layer in self.layers:
            x = layer.forward_batch(x)
        return x

    def parameters(self) -> Dict[str, Node]:
        params = {}
        for index, layer in enumerate(self.layers):
            for key, node in layer.parameters().items():
                params[f"layers.{index}.{key}"] = node
        return params

    def param_count(self) -> int:
        return sum(layer.param_count() for layer in self.layers)


def _as_row(x: ArrayLike, d_in: int) -> Tuple[Node, bool]:
    as_graph = isinstance(x, Node)
    xn = as_node(x)
    if xn.value.ndim != 1 or xn.shape[0] != d_in:
        raise ShapeError(f"Expected a vector of length {d_in}, got shape {xn.shape}")
    return ops.reshape(xn, (1, d_in)), as_graph


def kan_layer_forward(x: ArrayLike, layer: KanLayer) -> ArrayLike:
    """Vector d_in -> vector d_out"""
    row, as_graph = _as_row(x, layer.d_in)
    out = ops.reshape(layer.forward_batch(row), (layer.d_out,))
    return out if as_graph else out.value


def kan_forward(x: ArrayLike, stack: KanStack) -> ArrayLike:
    row, as_graph = _as_row(x, stack.d_in)
    out = ops.reshape(stack.forward_batch(row), (stack.d_out,))
    return out if as_graph else out.value


def _per_site(cube: ArrayLike, model, d_in: int) -> ArrayLike:
    """Run model.forward_batch on every spectral vector of a (C, H, W) cube"""
    as_graph = isinstance(cube, Node)
    cn = as_node(cube)
    if cn.value.ndim != 3:
        raise ShapeError(f"Expected a (C, H, W) cube, got shape {cn.shape}")
    c, h, w = cn.shape
    if c != d_in:
        raise ShapeError(f"Cube has {c} channels, network expects {d_in}")
    sites = ops.transpose(ops.reshape(cn, (c, h * w)))
    out = model.forward_batch(sites)
    result = ops.reshape(ops.transpose(out), (out.shape[1], h, w))
    return result if as_graph else result.value


def kan1d_apply(cube: ArrayLike, stack: KanStack) -> ArrayLike:
    """Spectral stack applied independently at each pixel"""
    return _per_site(cube, stack, stack.d_in)


def kan2d_apply(cube: ArrayLike, layer2d: KanLayer) -> ArrayLike:
    """One channel-mixing spline set with parameters shared over all spatial sites"""
    return _per_site(cube, layer2d, layer2d.d_in)
