"""
Kernel CSV
k rows x k columns of plain decimals, row-major, no header
"""
import logging
from typing import Optional

import numpy as np
import polars as pl

from core.config.config_manager import config
from core.export.atomic import atomic_path
from core.validation.error_handler import DegradationError

logger = logging.getLogger(__name__)


def write_kernel_csv(path: str, kernel: np.ndarray, precision: Optional[int] = None) -> None:
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1]:
        raise DegradationError(f"Kernel must be square, got shape {kernel.shape}")
    precision = int(precision if precision is not None else config.get('io.kernel_csv_precision', 12))
    frame = pl.DataFrame({f"c{j}": kernel[:, j] for j in range(kernel.shape[1])})
    with atomic_path(path) as tmp:
        frame.write_csv(tmp, include_header=False, float_precision=precision)
    logger.debug(f"Wrote {kernel.shape[0]}x{kernel.shape[1]} kernel to {path}")


def read_kernel_csv(path: str) -> np.ndarray:
    frame = pl.read_csv(path, has_header=False)
    kernel = frame.to_numpy().astype(np.float64)
    if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1] or kernel.shape[0] % 2 == 0:
        raise DegradationError(f"{path}: expected an odd square kernel, got shape {kernel.shape}")
    return kernel
