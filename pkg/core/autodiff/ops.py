"""
Differentiable Operations
The closed operation set of the engine. Each op is an Op subclass with a numpy
forward and an explicit backward rule; module-level helpers build graph nodes.
"""
import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from core.autodiff.node import Node, Op, apply, as_node, constant
from core.degradation import operators as degradation_ops
from core.validation.error_handler import ShapeError

logger = logging.getLogger(__name__)

Scalar = Union[float, int, Node]


def _same_shape(a: Node, b: Node, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


# ============ ELEMENTWISE ============

class Add(Op):
    name = 'add'

    def forward(self, a, b):
        return a + b

    def backward(self, grad, a, b):
        return grad, grad


class Sub(Op):
    name = 'sub'

    def forward(self, a, b):
        return a - b

    def backward(self, grad, a, b):
        return grad, -grad


class Mul(Op):
    name = 'mul'

    def forward(self, a, b):
        return a * b

    def backward(self, grad, a, b):
        return grad * b, grad * a


class ScalarMul(Op):
    """x * s with s a rank-0 node"""
    name = 'scalar_mul'

    def forward(self, x, s):
        return x * s

    def backward(self, grad, x, s):
        return grad * s, np.asarray(np.sum(grad * x), dtype=x.dtype).reshape(s.shape)


class Silu(Op):
    name = 'silu'

    def forward(self, x):
        return x / (1.0 + np.exp(-x))

    def backward(self, grad, x):
        sig = 1.0 / (1.0 + np.exp(-x))
        return (grad * (sig * (1.0 + x * (1.0 - sig))),)


class Softplus(Op):
    name = 'softplus'

    def forward(self, x):
        return np.logaddexp(0.0, x)

    def backward(self, grad, x):
        return (grad / (1.0 + np.exp(-x)),)


class Reciprocal(Op):
    name = 'reciprocal'

    def forward(self, x):
        return 1.0 / x

    def backward(self, grad, x):
        return (-grad / (x * x),)


class Abs(Op):
    """|x| with subgradient 0 at 0"""
    name = 'abs'

    def forward(self, x):
        return np.abs(x)

    def backward(self, grad, x):
        return (grad * np.sign(x),)


class Clamp(Op):
    """Gradient 1 on the closed interval, 0 outside"""
    name = 'clamp'

    def __init__(self, lo: float, hi: float):
        self.lo = lo
        self.hi = hi

    def forward(self, x):
        return np.clip(x, self.lo, self.hi)

    def backward(self, grad, x):
        inside = (x >= self.lo) & (x <= self.hi)
        return (grad * inside,)


class Relu(Op):
    """max(x, 0); gradient 0 at 0"""
    name = 'relu'

    def forward(self, x):
        return np.maximum(x, 0.0)

    def backward(self, grad, x):
        return (grad * (x > 0),)


# ============ LINEAR ALGEBRA / SHAPE ============

class MatMul(Op):
    name = 'matmul'

    def forward(self, a, b):
        return a @ b

    def backward(self, grad, a, b):
        if b.ndim == 1:
            grad_a = np.outer(grad, b) if a.ndim == 2 else grad * b
            grad_b = a.T @ grad if a.ndim == 2 else grad * a
            return grad_a, grad_b
        return grad @ b.T, a.T @ grad


class Reshape(Op):
    name = 'reshape'

    def __init__(self, shape: Tuple[int, ...]):
        self.shape = tuple(shape)

    def forward(self, x):
        return x.reshape(self.shape)

    def backward(self, grad, x):
        return (grad.reshape(x.shape),)


class Transpose(Op):
    name = 'transpose'

    def __init__(self, axes: Optional[Sequence[int]] = None):
        self.axes = tuple(axes) if axes is not None else None

    def forward(self, x):
        return np.transpose(x, self.axes)

    def backward(self, grad, x):
        if self.axes is None:
            return (np.transpose(grad),)
        return (np.transpose(grad, np.argsort(self.axes)),)


class Sum(Op):
    name = 'sum'

    def __init__(self, axis: Optional[Union[int, Tuple[int, ...]]] = None):
        self.axis = axis

    def forward(self, x):
        return np.asarray(np.sum(x, axis=self.axis))

    def backward(self, grad, x):
        if self.axis is None:
            return (np.full_like(x, grad),)
        return (np.broadcast_to(np.expand_dims(grad, self.axis), x.shape).copy(),)


class Mean(Sum):
    name = 'mean'

    def forward(self, x):
        return np.asarray(np.mean(x, axis=self.axis))

    def backward(self, grad, x):
        (g,) = super().backward(grad, x)
        count = x.size if self.axis is None else x.size // np.asarray(np.sum(x, axis=self.axis)).size
        return (g / count,)


# ============ CONVOLUTIONS ============

class Conv2d(Op):
    """
    Multi-channel 2D convolution (correlation) with zero padding and stride.
    Inputs: x (I, H, W), w (O, I, k, k), b (O,)
    """
    name = 'conv2d'

    def __init__(self, stride: int = 1, padding: int = 0):
        self.stride = stride
        self.padding = padding

    def _windows(self, x, k):
        p = self.padding
        xp = np.pad(x, ((0, 0), (p, p), (p, p))) if p else x
        return xp, sliding_window_view(xp, (k, k), axis=(1, 2))[:, ::self.stride, ::self.stride]

    def forward(self, x, w, b):
        if x.ndim != 3 or w.ndim != 4 or w.shape[1] != x.shape[0]:
            raise ShapeError(f"conv2d: input {x.shape} incompatible with weight {w.shape}")
        _, win = self._windows(x, w.shape[2])
        return np.einsum('ihwab,oiab->ohw', win, w) + b[:, None, None]

    def backward(self, grad, x, w, b):
        k = w.shape[2]
        s = self.stride
        xp, win = self._windows(x, k)
        grad_w = np.einsum('ihwab,ohw->oiab', win, grad)
        grad_b = grad.sum(axis=(1, 2))
        ho, wo = grad.shape[1:]
        grad_xp = np.zeros_like(xp)
        for a in range(k):
            for c in range(k):
                grad_xp[:, a:a + s * ho:s, c:c + s * wo:s] += np.einsum('oi,ohw->ihw', w[:, :, a, c], grad)
        p = self.padding
        grad_x = grad_xp[:, p:xp.shape[1] - p, p:xp.shape[2] - p] if p else grad_xp
        return grad_x, grad_w, grad_b


class ConvTranspose2d(Op):
    """
    Transposed strided 2D convolution (no padding).
    Inputs: x (I, h, w), w (I, O, k, k); output (O, (h-1)s+k, (w-1)s+k)
    """
    name = 'conv_transpose2d'

    def __init__(self, stride: int = 1):
        self.stride = stride

    def forward(self, x, w):
        if x.ndim != 3 or w.ndim != 4 or w.shape[0] != x.shape[0]:
            raise ShapeError(f"conv_transpose2d: input {x.shape} incompatible with weight {w.shape}")
        s = self.stride
        _, h, wd = x.shape
        k = w.shape[2]
        out = np.zeros((w.shape[1], (h - 1) * s + k, (wd - 1) * s + k), dtype=np.result_type(x, w))
        for a in range(k):
            for c in range(k):
                out[:, a:a + s * h:s, c:c + s * wd:s] += np.einsum('io,ihw->ohw', w[:, :, a, c], x)
        return out

    def backward(self, grad, x, w):
        s = self.stride
        _, h, wd = x.shape
        k = w.shape[2]
        grad_x = np.zeros_like(x)
        grad_w = np.zeros_like(w)
        for a in range(k):
            for c in range(k):
                g = grad[:, a:a + s * h:s, c:c + s * wd:s]
                grad_x += np.einsum('io,ohw->ihw', w[:, :, a, c], g)
                grad_w[:, :, a, c] = np.einsum('ihw,ohw->io', x, g)
        return grad_x, grad_w


class BlurDown(Op):
    """Depthwise replicate-padded blur + stride-s sampling; inputs x (C,H,W), kernel (k,k)"""
    name = 'blur_down'

    def __init__(self, scale: int):
        self.scale = scale

    def forward(self, x, kernel):
        return degradation_ops.conv_down(x, kernel, self.scale)

    def backward(self, grad, x, kernel):
        return (degradation_ops.conv_up_transpose(grad, kernel, self.scale),
                degradation_ops.kernel_correlate(x, grad, kernel.shape[0], self.scale))


class BlurTranspose(Op):
    """Adjoint of BlurDown; inputs r (C,h,w), kernel (k,k)"""
    name = 'blur_transpose'

    def __init__(self, scale: int):
        self.scale = scale

    def forward(self, r, kernel):
        return degradation_ops.conv_up_transpose(r, kernel, self.scale)

    def backward(self, grad, r, kernel):
        return (degradation_ops.conv_down(grad, kernel, self.scale),
                degradation_ops.kernel_correlate(grad, r, kernel.shape[0], self.scale))


class KernelCorrelate(Op):
    """d<R, blur_down(X, K)>/dK; inputs x (C,H,W), r (C,h,w)"""
    name = 'kernel_correlate'

    def __init__(self, size: int, scale: int):
        self.size = size
        self.scale = scale

    def forward(self, x, r):
        return degradation_ops.kernel_correlate(x, r, self.size, self.scale)

    def backward(self, grad, x, r):
        return (degradation_ops.conv_up_transpose(r, grad, self.scale),
                degradation_ops.conv_down(x, grad, self.scale))


# ============ GRAPH BUILDERS ============

def add(a: Node, b: Node) -> Node:
    _same_shape(a, b, 'add')
    return apply(Add(), a, b)


def sub(a: Node, b: Node) -> Node:
    _same_shape(a, b, 'sub')
    return apply(Sub(), a, b)


def mul(a: Node, b: Node) -> Node:
    _same_shape(a, b, 'mul')
    return apply(Mul(), a, b)


def scale(x: Node, s: Scalar) -> Node:
    """Multiply by a Python scalar or a rank-0 node"""
    s = as_node(s)
    if s.value.size != 1:
        raise ShapeError(f"scale expects a scalar factor, got shape {s.shape}")
    return apply(ScalarMul(), x, s)


def matmul(a: Node, b: Node) -> Node:
    if a.value.ndim != 2 or b.value.ndim not in (1, 2) or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} @ {b.shape}")
    return apply(MatMul(), a, b)


def silu(x: Node) -> Node:
    return apply(Silu(), x)


def softplus(x: Node) -> Node:
    return apply(Softplus(), x)


def reciprocal(x: Node) -> Node:
    return apply(Reciprocal(), x)


def absolute(x: Node) -> Node:
    return apply(Abs(), x)


def clamp(x: Node, lo: float, hi: float) -> Node:
    return apply(Clamp(lo, hi), x)


def relu(x: Node) -> Node:
    return apply(Relu(), x)


def reshape(x: Node, shape: Sequence[int]) -> Node:
    return apply(Reshape(tuple(shape)), x)


def transpose(x: Node, axes: Optional[Sequence[int]] = None) -> Node:
    return apply(Transpose(axes), x)


def total(x: Node, axis: Optional[Union[int, Tuple[int, ...]]] = None) -> Node:
    return apply(Sum(axis), x)


def mean(x: Node, axis: Optional[Union[int, Tuple[int, ...]]] = None) -> Node:
    return apply(Mean(axis), x)


def square(x: Node) -> Node:
    return mul(x, x)


def conv2d(x: Node, w: Node, b: Node, stride: int = 1, padding: int = 0) -> Node:
    return apply(Conv2d(stride, padding), x, w, b)


def conv_transpose2d(x: Node, w: Node, stride: int = 1) -> Node:
    return apply(ConvTranspose2d(stride), x, w)


def blur_down(x: Node, kernel: Node, scale_factor: int) -> Node:
    return apply(BlurDown(scale_factor), x, kernel)


def blur_transpose(r: Node, kernel: Node, scale_factor: int) -> Node:
    return apply(BlurTranspose(scale_factor), r, kernel)


def kernel_correlate(x: Node, r: Node, size: int, scale_factor: int) -> Node:
    return apply(KernelCorrelate(size, scale_factor), x, r)


def avg_pool2(x: Node) -> Node:
    """2x2 average pooling as a fixed-weight stride-2 convolution"""
    c = x.shape[0]
    w = np.zeros((c, c, 2, 2), dtype=x.value.dtype)
    w[np.arange(c), np.arange(c)] = 0.25
    return conv2d(x, constant(w), constant(np.zeros(c, dtype=x.value.dtype)), stride=2)


def upsample_nearest2(x: Node) -> Node:
    """Nearest-neighbour x2 upsampling as a fixed-weight stride-2 transposed convolution"""
    c = x.shape[0]
    w = np.zeros((c, c, 2, 2), dtype=x.value.dtype)
    w[np.arange(c), np.arange(c)] = 1.0
    return conv_transpose2d(x, constant(w), stride=2)
