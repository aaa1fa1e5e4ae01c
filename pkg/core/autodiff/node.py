"""
Graph Node Module
Reverse-mode differentiation core: Node, Op, Tape, forward and backward
"""
import contextvars
import logging
from contextlib import contextmanager
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.config.config_manager import config
from core.validation.error_handler import GraphError, NonFiniteError

logger = logging.getLogger(__name__)

_DTYPES = {'float64': np.float64, 'float32': np.float32}
_active_tape: contextvars.ContextVar = contextvars.ContextVar('kano_active_tape', default=None)
_dtype_override: contextvars.ContextVar = contextvars.ContextVar('kano_dtype', default=None)


@contextmanager
def compute_dtype(name: Optional[str]) -> Iterator[None]:
    """Create leaves in the given precision (float64 | float32) inside the block; None keeps the config's"""
    if name is None:
        yield
        return
    if name not in _DTYPES:
        raise ValueError(f"Unsupported dtype: {name}")
    token = _dtype_override.set(_DTYPES[name])
    try:
        yield
    finally:
        _dtype_override.reset(token)


def default_dtype() -> type:
    """Precision for new leaves: an active compute_dtype block, else compute.dtype from the config"""
    override = _dtype_override.get()
    if override is not None:
        return override
    return _DTYPES[config.get('compute.dtype', 'float64')]


class Op:
    """Base class for differentiable operations"""

    name = 'op'

    def forward(self, *inputs: np.ndarray) -> np.ndarray:
        raise NotImplementedError("Subclass must implement forward()")

    def backward(self, grad: np.ndarray, *inputs: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        """Return one gradient (or None) per input"""
        raise NotImplementedError("Subclass must implement backward()")


class Node:
    """A value in the computation graph"""

    __slots__ = ('value', 'grad', 'op', 'parents', 'requires_grad', 'name', '_forwarded', '__weakref__')

    def __init__(
        self,
        value: Any,
        op: Optional[Op] = None,
        parents: Sequence['Node'] = (),
        requires_grad: bool = False,
        name: Optional[str] = None
    ):
        if op is None:
            value = np.array(value, dtype=default_dtype())
        self.value: np.ndarray = value
        self.grad: np.ndarray = np.zeros_like(value)
        self.op = op
        self.parents: Tuple['Node', ...] = tuple(parents)
        self.requires_grad = requires_grad or any(p.requires_grad for p in self.parents)
        self.name = name
        self._forwarded = False

        tape = _active_tape.get()
        if tape is not None:
            tape.record(self)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def is_leaf(self) -> bool:
        return self.op is None

    @property
    def op_name(self) -> str:
        return self.op.name if self.op is not None else 'leaf'

    def item(self) -> float:
        return float(self.value)

    def numpy(self) -> np.ndarray:
        return self.value

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ''
        return f"Node(op={self.op_name}, shape={self.shape}{label})"

    # Operator sugar; implementations live in core.autodiff.ops
    def __add__(self, other):
        from core.autodiff import ops
        return ops.add(self, other)

    def __sub__(self, other):
        from core.autodiff import ops
        return ops.sub(self, other)

    def __mul__(self, other):
        from core.autodiff import ops
        if isinstance(other, Node) and other.value.shape == self.value.shape:
            return ops.mul(self, other)
        return ops.scale(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from core.autodiff import ops
        return ops.scale(self, -1.0)

    def __matmul__(self, other):
        from core.autodiff import ops
        return ops.matmul(self, other)


def leaf(value: Any, requires_grad: bool = True, name: Optional[str] = None) -> Node:
    """Create a trainable (or constant) leaf"""
    return Node(value, requires_grad=requires_grad, name=name)


def constant(value: Any) -> Node:
    return Node(value, requires_grad=False)


def as_node(value: Union[Node, Any]) -> Node:
    return value if isinstance(value, Node) else constant(value)


def _check_finite(value: np.ndarray, op_name: str) -> None:
    if not np.all(np.isfinite(value)):
        raise NonFiniteError(f"Non-finite value produced by op '{op_name}'", op=op_name)


def apply(op: Op, *parents: Node) -> Node:
    """Evaluate op eagerly on parent values and record the result node"""
    value = op.forward(*[p.value for p in parents])
    _check_finite(value, op.name)
    return Node(value, op=op, parents=parents)


def topological_order(root: Node) -> List[Node]:
    """Parents-before-children ordering of every node upstream of root"""
    order: List[Node] = []
    visited = set()
    stack: List[Tuple[Node, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node.parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    return order


def forward(root: Node, recompute: bool = False) -> float:
    """
    Evaluate the graph rooted at root and return its scalar value.

    Values are computed eagerly at construction; recompute=True replays every
    op from the current leaf values (after in-place leaf edits).

    Raises:
        GraphError if root is not a scalar
        NonFiniteError naming the first op that produced NaN/Inf
    """
    order = topological_order(root)
    for node in order:
        if node.op is None:
            _check_finite(node.value, f"leaf {node.name or ''}".strip())
        elif recompute:
            node.value = node.op.forward(*[p.value for p in node.parents])
            _check_finite(node.value, node.op.name)
        node._forwarded = True
    if root.value.size != 1:
        raise GraphError(f"forward expects a scalar root, got shape {root.shape}")
    return float(root.value.reshape(()))


def backward(root: Node, leaves: Optional[Iterable[Node]] = None) -> List[np.ndarray]:
    """
    Accumulate d(root)/d(node) into node.grad for every node upstream of root.

    Returns:
        Gradients for the requested leaves (zeros for leaves root does not use)

    Raises:
        GraphError if forward(root) has not run
    """
    if not root._forwarded:
        raise GraphError("backward called before forward on this root")
    order = topological_order(root)
    for node in order:
        node.grad = np.zeros_like(node.value)
    root.grad = np.ones_like(root.value)

    for node in reversed(order):
        if node.op is None or not node.requires_grad:
            continue
        grads = node.op.backward(node.grad, *[p.value for p in node.parents])
        for parent, g in zip(node.parents, grads):
            if g is None or not parent.requires_grad:
                continue
            parent.grad = parent.grad + g

    if leaves is None:
        return []
    in_graph = {id(n) for n in order}
    return [leaf_node.grad if id(leaf_node) in in_graph else np.zeros_like(leaf_node.value)
            for leaf_node in leaves]


class Tape:
    """Ordered record of nodes created while active, plus a seeded generator"""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.nodes: List[Node] = []
        self.rng = np.random.default_rng(seed)
        self._token = None

    def record(self, node: Node) -> None:
        self.nodes.append(node)

    def __enter__(self) -> 'Tape':
        self._token = _active_tape.set(self)
        return self

    def __exit__(self, *exc) -> None:
        _active_tape.reset(self._token)
        self._token = None

    def replay(self) -> None:
        """Recompute every recorded op node in creation order"""
        for node in self.nodes:
            if node.op is not None:
                node.value = node.op.forward(*[p.value for p in node.parents])
                _check_finite(node.value, node.op.name)

    def leaves(self) -> List[Node]:
        return [n for n in self.nodes if n.op is None]

    def stats(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for n in self.nodes:
            counts[n.op_name] = counts.get(n.op_name, 0) + 1
        return counts
