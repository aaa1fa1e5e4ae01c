"""
PNG Module
8-bit grayscale / RGB PNG ingestion and export through Pillow
"""
import logging

import numpy as np
from PIL import Image

from core.export.atomic import atomic_path
from core.validation.error_handler import ImageFormatError

logger = logging.getLogger(__name__)

SUPPORTED_MODES = {'L': 1, 'RGB': 3}


def read_png(path: str) -> np.ndarray:
    """(1 or 3, H, W) float64 cube scaled to [0, 1]"""
    with Image.open(path) as image:
        if image.format != 'PNG':
            raise ImageFormatError(f"{path} is {image.format}, expected PNG")
        if image.mode not in SUPPORTED_MODES:
            raise ImageFormatError(f"Unsupported PNG mode {image.mode!r} in {path}; need 8-bit L or RGB")
        pixels = np.asarray(image, dtype=np.uint8)
    if pixels.ndim == 2:
        pixels = pixels[None]
    else:
        pixels = np.transpose(pixels, (2, 0, 1))
    return pixels.astype(np.float64) / 255.0


def to_uint8(cube: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1] and round half up to 8 bits"""
    return np.floor(np.clip(cube, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def write_png(path: str, cube: np.ndarray) -> None:
    cube = np.asarray(cube)
    if cube.ndim != 3 or cube.shape[0] not in (1, 3):
        raise ImageFormatError(f"PNG export needs 1 or 3 channels, got shape {cube.shape}")
    pixels = to_uint8(cube)
    image = Image.fromarray(pixels[0]) if cube.shape[0] == 1 else \
        Image.fromarray(np.ascontiguousarray(np.transpose(pixels, (1, 2, 0))))
    with atomic_path(path) as tmp:
        image.save(tmp, format='PNG')
    logger.debug(f"Wrote PNG {cube.shape} to {path}")
