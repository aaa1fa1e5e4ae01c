"""
Blur Kernel Module
Anisotropic Gaussian kernels, the separable initial kernel, simplex checks and
kernel statistics
"""
import logging
from typing import Any, Dict

import numpy as np

from core.validation.error_handler import DegradationError

logger = logging.getLogger(__name__)

SIMPLEX_TOL = 1e-9


def _check_size(k: int) -> int:
    if int(k) != k or k < 1 or k % 2 == 0:
        raise DegradationError(f"Kernel size must be a positive odd integer, got {k}")
    return int(k)


def _offsets(k: int) -> np.ndarray:
    return np.arange(k, dtype=np.float64) - k // 2


def gaussian_kernel(k: int, sigma_x: float, sigma_y: float, theta: float = 0.0) -> np.ndarray:
    """
    k x k anisotropic Gaussian rotated by theta, normalized to sum 1.

    The offset d = (column, row) from the center is weighted by the precision
    matrix R(theta) diag(1/sigma_x^2, 1/sigma_y^2) R(theta)^T.
    """
    k = _check_size(k)
    if sigma_x <= 0 or sigma_y <= 0:
        raise DegradationError(f"Kernel sigmas must be positive, got ({sigma_x}, {sigma_y})")
    c, s = np.cos(theta), np.sin(theta)
    rotation = np.array([[c, -s], [s, c]])
    precision = rotation @ np.diag([1.0 / sigma_x ** 2, 1.0 / sigma_y ** 2]) @ rotation.T

    rows, cols = np.meshgrid(_offsets(k), _offsets(k), indexing='ij')
    d = np.stack([cols, rows], axis=-1)
    quad = np.einsum('...i,ij,...j->...', d, precision, d)
    kernel = np.exp(-0.5 * quad)
    return kernel / kernel.sum()


def gaussian_sep_init(k: int, sigma: float = 1.0) -> np.ndarray:
    """Rank-1 kernel g g^T from a length-k Gaussian (std 1.0 by default)"""
    k = _check_size(k)
    g = np.exp(-0.5 * (_offsets(k) / sigma) ** 2)
    g /= g.sum()
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def delta_kernel(k: int) -> np.ndarray:
    k = _check_size(k)
    kernel = np.zeros((k, k))
    kernel[k // 2, k // 2] = 1.0
    return kernel


def is_simplex(kernel: np.ndarray, tol: float = SIMPLEX_TOL) -> bool:
    return bool(np.all(kernel >= 0) and abs(float(kernel.sum()) - 1.0) <= tol)


def validate_kernel(kernel: np.ndarray, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Check shape (square, odd) and the simplex constraint; returns the kernel"""
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1] or kernel.shape[0] % 2 == 0:
        raise DegradationError(f"Kernel must be square with odd size, got shape {kernel.shape}")
    if not np.all(np.isfinite(kernel)):
        raise DegradationError("Kernel contains non-finite values")
    if not is_simplex(kernel, tol):
        raise DegradationError(
            f"Kernel is not on the simplex (min={kernel.min():.3e}, sum={kernel.sum():.12f})")
    return kernel


def kernel_stats(kernel: np.ndarray) -> Dict[str, Any]:
    """
    Summary statistics of a kernel.

    Returns:
        size, sum, min, peak, peak position, center of mass (offsets from the
        center), principal sigmas from the second moments and their orientation
    """
    kernel = np.asarray(kernel, dtype=np.float64)
    k = kernel.shape[0]
    total = float(kernel.sum())
    weights = kernel / total if total != 0 else np.full_like(kernel, 1.0 / kernel.size)
    rows, cols = np.meshgrid(_offsets(k), _offsets(k), indexing='ij')

    mean_x = float(np.sum(weights * cols))
    mean_y = float(np.sum(weights * rows))
    dx, dy = cols - mean_x, rows - mean_y
    cov = np.array([[np.sum(weights * dx * dx), np.sum(weights * dx * dy)],
                    [np.sum(weights * dx * dy), np.sum(weights * dy * dy)]])
    eigvals, eigvecs = np.linalg.eigh(cov)
    major = eigvecs[:, 1]
    peak_index = np.unravel_index(int(np.argmax(kernel)), kernel.shape)

    return {
        'size': k,
        'sum': total,
        'min': float(kernel.min()),
        'peak': float(kernel.max()),
        'peak_row': int(peak_index[0]) - k // 2,
        'peak_col': int(peak_index[1]) - k // 2,
        'center_x': mean_x,
        'center_y': mean_y,
        'sigma_major': float(np.sqrt(max(eigvals[1], 0.0))),
        'sigma_minor': float(np.sqrt(max(eigvals[0], 0.0))),
        'orientation': float(np.arctan2(major[1], major[0])),
    }


def kernel_mse(estimate: np.ndarray, reference: np.ndarray) -> float:
    if estimate.shape != reference.shape:
        raise DegradationError(f"Kernel shapes differ: {estimate.shape} vs {reference.shape}")
    return float(np.mean((estimate - reference) ** 2))
