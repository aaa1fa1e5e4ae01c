"""
Degradation Pipeline
DegradationSpec and the blur -> downsample -> noise composition that produces
low-resolution observations together with their ground-truth kernels
"""
import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from core.config.config_manager import config
from core.degradation.kernels import gaussian_kernel, validate_kernel
from core.degradation.noise import awgn
from core.degradation.operators import conv_down
from core.validation.error_handler import DegradationError

logger = logging.getLogger(__name__)


def default_kernel_size(scale: int) -> int:
    """Kernel size for a scale from degradation.kernel_sizes (11 / 15 / 21 / 21)"""
    sizes = config.get('degradation.kernel_sizes', {})
    size = sizes.get(str(scale))
    if size is None:
        raise DegradationError(f"No default kernel size for scale {scale}; pass kernel_size explicitly")
    return int(size)


@dataclass
class DegradationSpec:
    """Parameters of one synthetic degradation"""
    scale: int
    sigma_x: float
    sigma_y: float
    theta: float = 0.0
    noise: float = 0.0
    seed: int = 0
    kernel_size: Optional[int] = None

    def __post_init__(self):
        if int(self.scale) != self.scale or self.scale < 1:
            raise DegradationError(f"Scale must be a positive integer, got {self.scale}")
        self.scale = int(self.scale)
        if self.kernel_size is None:
            self.kernel_size = default_kernel_size(self.scale)
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise DegradationError(f"Kernel size must be odd, got {self.kernel_size}")
        if self.sigma_x <= 0 or self.sigma_y <= 0:
            raise DegradationError(f"Sigmas must be positive, got ({self.sigma_x}, {self.sigma_y})")
        if self.noise < 0:
            raise DegradationError(f"Noise level must be non-negative, got {self.noise}")

    def kernel(self) -> np.ndarray:
        return gaussian_kernel(self.kernel_size, self.sigma_x, self.sigma_y, self.theta)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DegradationSpec':
        return cls(**{key: data[key] for key in cls.__dataclass_fields__ if key in data})


def degrade(x: np.ndarray, spec: DegradationSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Y = awgn(conv_down(X, K, s), noise, seed).

    Returns:
        (Y, K) with K the ground-truth kernel
    """
    kernel = validate_kernel(spec.kernel())
    y = awgn(conv_down(x, kernel, spec.scale), spec.noise, spec.seed)
    logger.debug(f"Degraded {x.shape} -> {y.shape} (s={spec.scale}, k={spec.kernel_size}, "
                 f"sigma=({spec.sigma_x:.3f}, {spec.sigma_y:.3f}), noise={spec.noise:.4f})")
    return y, kernel
