"""
KANC Cube Files
Binary (C, H, W) float32 cubes: a 20-byte little-endian header followed by the
row-major payload, index (c * H + h) * W + w
"""
import logging
import os

import numpy as np

from core.export.atomic import atomic_path
from core.validation.error_handler import CubeFormatError

logger = logging.getLogger(__name__)

MAGIC = b'KANC'
VERSION = 1
DTYPE_FLOAT32 = 0

HEADER_DTYPE = np.dtype([
    ('magic', 'S4'),
    ('version', 'u1'),
    ('dtype', 'u1'),
    ('reserved', '<u2'),
    ('channels', '<u4'),
    ('height', '<u4'),
    ('width', '<u4'),
])


def write_cube(path: str, cube: np.ndarray) -> None:
    """Write a finite (C, H, W) cube as float32"""
    cube = np.asarray(cube)
    if cube.ndim != 3 or min(cube.shape) < 1:
        raise CubeFormatError('unsupported', f"expected a (C, H, W) cube, got shape {cube.shape}")
    if not np.all(np.isfinite(cube)):
        raise CubeFormatError('non_finite', f"refusing to write non-finite values to {path}")
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header['magic'] = MAGIC
    header['version'] = VERSION
    header['dtype'] = DTYPE_FLOAT32
    header['channels'], header['height'], header['width'] = cube.shape
    payload = np.ascontiguousarray(cube, dtype='<f4')
    with atomic_path(path) as tmp:
        with open(tmp, 'wb') as f:
            f.write(header.tobytes())
            f.write(payload.tobytes())
    logger.debug(f"Wrote cube {cube.shape} to {path}")


def read_cube(path: str) -> np.ndarray:
    """
    Read a KANC cube as float32 (C, H, W).

    Raises:
        CubeFormatError with kind bad_magic | truncated | non_finite | unsupported
    """
    with open(path, 'rb') as f:
        raw = f.read()
    if raw[:len(MAGIC)] != MAGIC:
        raise CubeFormatError('bad_magic', f"{os.path.basename(path)} starts with {raw[:len(MAGIC)]!r}")
    if len(raw) < HEADER_DTYPE.itemsize:
        raise CubeFormatError('truncated', f"header of {path} is {len(raw)} bytes")
    header = np.frombuffer(raw, dtype=HEADER_DTYPE, count=1)[0]
    if header['version'] != VERSION or header['dtype'] != DTYPE_FLOAT32:
        raise CubeFormatError('unsupported', f"version {header['version']}, dtype code {header['dtype']}")
    shape = (int(header['channels']), int(header['height']), int(header['width']))
    expected = int(np.prod(shape, dtype=np.int64)) * 4
    payload = raw[HEADER_DTYPE.itemsize:]
    if len(payload) != expected:
        raise CubeFormatError('truncated', f"header says {shape} ({expected} bytes), payload has {len(payload)}")
    cube = np.frombuffer(payload, dtype='<f4').reshape(shape).astype(np.float32)
    if not np.all(np.isfinite(cube)):
        raise CubeFormatError('non_finite', f"{path} contains NaN or Inf")
    return cube
