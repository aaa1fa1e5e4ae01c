"""
Noise Module
Additive white Gaussian noise with deterministic seeding
"""
import logging
from typing import Union

import numpy as np

from core.validation.error_handler import DegradationError

logger = logging.getLogger(__name__)

Seed = Union[int, np.random.Generator, None]


def awgn(x: np.ndarray, level: float, seed: Seed = 0) -> np.ndarray:
    """
    x + Normal(0, level^2) i.i.d. per element. No clipping.

    Args:
        level: noise standard deviation (>= 0)
        seed: integer seed or a Generator to draw from
    """
    if level < 0:
        raise DegradationError(f"Noise level must be non-negative, got {level}")
    if level == 0:
        return np.array(x, copy=True)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return x + rng.normal(0.0, level, size=x.shape).astype(x.dtype, copy=False)
