"""
Degradation Operators
Blur + stride-s downsampling (the observation operator), its exact adjoint, and the
kernel-gradient correlation. Pure numpy; the differentiable wrappers live in
core.autodiff.ops.

Conventions: correlation (no kernel flip), replicate padding of k // 2 pixels,
sampling phase 0 (top-left sample of every s x s block).
"""
import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from core.validation.error_handler import ShapeError

logger = logging.getLogger(__name__)


def _check_cube(x: np.ndarray, name: str) -> None:
    if x.ndim != 3 or min(x.shape) < 1:
        raise ShapeError(f"{name} must be a (C, H, W) cube, got shape {x.shape}")


def _check_kernel(k: np.ndarray) -> int:
    if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] % 2 == 0:
        raise ShapeError(f"Kernel must be square with odd size, got shape {k.shape}")
    return k.shape[0]


def _check_scale(s: int) -> int:
    if int(s) != s or s < 1:
        raise ShapeError(f"Scale must be a positive integer, got {s}")
    return int(s)


def replicate_pad(x: np.ndarray, p: int) -> np.ndarray:
    """Edge-extend the two spatial axes of a cube by p pixels"""
    if p == 0:
        return x
    return np.pad(x, ((0, 0), (p, p), (p, p)), mode='edge')


def fold_replicate(xp: np.ndarray, p: int) -> np.ndarray:
    """Adjoint of replicate_pad: fold the padded border back onto the edge pixels"""
    if p == 0:
        return xp
    inner = xp[:, p:-p, :].copy()
    inner[:, 0, :] += xp[:, :p, :].sum(axis=1)
    inner[:, -1, :] += xp[:, -p:, :].sum(axis=1)
    out = inner[:, :, p:-p].copy()
    out[:, :, 0] += inner[:, :, :p].sum(axis=2)
    out[:, :, -1] += inner[:, :, -p:].sum(axis=2)
    return out


def _windows(x: np.ndarray, k: int, s: int) -> np.ndarray:
    """(C, H/s, W/s, k, k) strided view of the replicate-padded cube"""
    xp = replicate_pad(x, k // 2)
    return sliding_window_view(xp, (k, k), axis=(1, 2))[:, ::s, ::s]


def conv_down(x: np.ndarray, kernel: np.ndarray, s: int) -> np.ndarray:
    """
    Blur every channel with kernel and keep every s-th sample.

    Args:
        x: (C, H, W) cube, H and W divisible by s
        kernel: odd k x k kernel
        s: integer scale

    Returns:
        (C, H/s, W/s) cube
    """
    _check_cube(x, 'X')
    k = _check_kernel(kernel)
    s = _check_scale(s)
    if x.shape[1] % s or x.shape[2] % s:
        raise ShapeError(f"Spatial dims {x.shape[1:]} not divisible by scale {s}")
    return np.einsum('chwab,ab->chw', _windows(x, k, s), kernel)


def conv_up_transpose(r: np.ndarray, kernel: np.ndarray, s: int) -> np.ndarray:
    """
    Exact adjoint of conv_down: <conv_down(X, K, s), R> == <X, conv_up_transpose(R, K, s)>.

    Args:
        r: (C, h, w) cube
        kernel: odd k x k kernel
        s: integer scale

    Returns:
        (C, h*s, w*s) cube
    """
    _check_cube(r, 'R')
    k = _check_kernel(kernel)
    s = _check_scale(s)
    c, h, w = r.shape
    height, width = h * s, w * s
    p = k // 2
    gp = np.zeros((c, height + 2 * p, width + 2 * p), dtype=np.result_type(r, kernel))
    for a in range(k):
        for b in range(k):
            gp[:, a:a + height:s, b:b + width:s] += kernel[a, b] * r
    return fold_replicate(gp, p)


def kernel_correlate(x: np.ndarray, r: np.ndarray, k: int, s: int) -> np.ndarray:
    """
    d<R, conv_down(X, K, s)>/dK: correlation of R against the strided windows of X.

    Returns:
        k x k matrix
    """
    _check_cube(x, 'X')
    _check_cube(r, 'R')
    s = _check_scale(s)
    if k % 2 == 0:
        raise ShapeError(f"Kernel size must be odd, got {k}")
    win = _windows(x, k, s)
    if win.shape[:3] != r.shape:
        raise ShapeError(f"Residual shape {r.shape} does not match downsampled shape {win.shape[:3]}")
    return np.einsum('chwab,chw->ab', win, r)
