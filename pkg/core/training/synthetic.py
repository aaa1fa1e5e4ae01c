"""
Synthetic Data Module
Procedural ground-truth images (oriented sinusoids, convex polygons, smooth
gradients) and degraded training pairs
"""
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from core.degradation.degrade import DegradationSpec, degrade
from core.degradation.presets import DegradationDistribution, sample_spec

logger = logging.getLogger(__name__)


@dataclass
class SamplePair:
    """Ground truth X, observation Y, kernel K and the DegradationSpec that produced them"""
    x_gt: np.ndarray
    y: np.ndarray
    k_gt: np.ndarray
    spec: DegradationSpec

    @property
    def scale(self) -> int:
        return self.spec.scale


def _smooth_gradient(rng: np.random.Generator, channels: int, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    direction = rng.uniform(0, 2 * np.pi)
    ramp = np.cos(direction) * cols + np.sin(direction) * rows
    ramp = (ramp - ramp.min()) / max(float(np.ptp(ramp)), 1e-12)
    low = rng.uniform(0.0, 0.5, size=(channels, 1, 1))
    high = rng.uniform(0.5, 1.0, size=(channels, 1, 1))
    return low + (high - low) * ramp[None]


def _sinusoid(rng: np.random.Generator, channels: int, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    angle = rng.uniform(0, np.pi)
    frequency = rng.uniform(0.05, 0.35)
    phase = rng.uniform(0, 2 * np.pi)
    wave = np.sin(2 * np.pi * frequency * (np.cos(angle) * cols + np.sin(angle) * rows) + phase)
    amplitude = rng.uniform(0.05, 0.2, size=(channels, 1, 1))
    return amplitude * wave[None]


def _convex_polygon_mask(rng: np.random.Generator, size: int, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    center = rng.uniform(0.2 * size, 0.8 * size, size=2)
    radius = rng.uniform(0.1 * size, 0.3 * size)
    angles = np.sort(rng.uniform(0, 2 * np.pi, size=int(rng.integers(3, 7))))
    vx = center[0] + radius * np.cos(angles)
    vy = center[1] + radius * np.sin(angles)
    inside = np.ones_like(rows, dtype=bool)
    for i in range(len(angles)):
        j = (i + 1) % len(angles)
        cross = (vx[j] - vx[i]) * (rows - vy[i]) - (vy[j] - vy[i]) * (cols - vx[i])
        inside &= cross >= 0
    return inside


def procedural_image(rng: np.random.Generator, channels: int = 3, size: int = 64) -> np.ndarray:
    """One (channels, size, size) image in [0, 1]"""
    rows, cols = np.meshgrid(np.arange(size, dtype=np.float64), np.arange(size, dtype=np.float64), indexing='ij')
    image = _smooth_gradient(rng, channels, rows, cols)
    for _ in range(int(rng.integers(1, 4))):
        image = image + _sinusoid(rng, channels, rows, cols)
    for _ in range(int(rng.integers(1, 4))):
        mask = _convex_polygon_mask(rng, size, rows, cols)
        color = rng.uniform(0.0, 1.0, size=(channels, 1, 1))
        opacity = rng.uniform(0.5, 1.0)
        image = np.where(mask[None], (1 - opacity) * image + opacity * color, image)
    return np.clip(image, 0.0, 1.0)


def synth_dataset(
    n: int,
    distribution: DegradationDistribution,
    seed: int = 0,
    channels: int = 3,
    size: int = 64,
    scale: Optional[int] = None,
    noise: Optional[float] = None
) -> List[SamplePair]:
    """
    n procedural pairs, each degraded by an independently sampled spec.
    Images are cropped to a multiple of the sampled scale.
    """
    if n < 1:
        raise ValueError(f"Dataset size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n):
        image = procedural_image(rng, channels, size)
        spec = sample_spec(distribution, rng, scale=scale, noise=noise)
        usable = size - size % spec.scale
        image = image[:, :usable, :usable]
        y, kernel = degrade(image, spec)
        pairs.append(SamplePair(x_gt=image, y=y, k_gt=kernel, spec=spec))
    logger.info(f"Generated {n} synthetic pairs (preset={distribution.name}, seed={seed})")
    return pairs
