"""
Patch Sampling
Aligned random crops of (X, Y) pairs: the X offset is s times the Y offset
"""
import logging
import math
from typing import List, Tuple, Union

import numpy as np

from core.training.synthetic import SamplePair
from core.validation.error_handler import ShapeError

logger = logging.getLogger(__name__)

Seed = Union[int, np.random.Generator]


def _rng(seed: Seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_patches(pair: SamplePair, patch: int, seed: Seed = 0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Crop a patch x patch region of X and its (patch/s) x (patch/s) footprint in Y.

    Y rows/cols within ceil((k // 2) / s) of the image border (where replicate
    padding shaped the observation) are avoided when the image is large enough.
    """
    s = pair.scale
    if patch % s:
        raise ShapeError(f"Patch size {patch} not divisible by scale {s}")
    _, h, w = pair.y.shape
    small = patch // s
    if small > h or small > w:
        raise ShapeError(f"Patch {patch} larger than image {pair.x_gt.shape[1:]}")
    rng = _rng(seed)

    margin = math.ceil((pair.k_gt.shape[0] // 2) / s)
    offsets = []
    for extent in (h, w):
        low, high = margin, extent - small - margin
        if high < low:
            low, high = 0, extent - small
        offsets.append(int(rng.integers(low, high + 1)))
    i, j = offsets

    y_patch = pair.y[:, i:i + small, j:j + small]
    x_patch = pair.x_gt[:, s * i:s * i + patch, s * j:s * j + patch]
    return x_patch.copy(), y_patch.copy()


def sample_batch(pairs: List[SamplePair], batch: int, patch: int,
                 rng: np.random.Generator) -> List[Tuple[SamplePair, np.ndarray, np.ndarray]]:
    """batch random (pair, X patch, Y patch) triples"""
    chosen = rng.integers(0, len(pairs), size=batch)
    return [(pairs[index],) + sample_patches(pairs[index], patch, rng) for index in chosen]
