"""
File Utilities
Shared cube loading/saving for all handlers (.kanc and .png by extension)
"""
import errno
import logging
import os
from typing import List

import numpy as np

from core.export.cube_file import read_cube, write_cube
from core.export.png_io import read_png, write_png
from core.validation.error_handler import UnsupportedFormatError

logger = logging.getLogger(__name__)

SUPPORTED_EXTENSIONS = ['.kanc', '.png']


def require_file(path: str) -> str:
    """Raise FileNotFoundError (a usage error at the CLI) when path is missing"""
    if not os.path.isfile(path):
        raise FileNotFoundError(errno.ENOENT, 'File not found', path)
    return path


def _extension(path: str) -> str:
    ext = os.path.splitext(path)[1].lower()
    if ext not in SUPPORTED_EXTENSIONS:
        raise UnsupportedFormatError(ext or path, SUPPORTED_EXTENSIONS)
    return ext


def load_cube(path: str) -> np.ndarray:
    """(C, H, W) float64 cube from a KANC or PNG file"""
    ext = _extension(path)
    require_file(path)
    cube = read_cube(path) if ext == '.kanc' else read_png(path)
    logger.debug(f"Loaded {cube.shape} cube from {path}")
    return cube.astype(np.float64)


def save_cube(path: str, cube: np.ndarray) -> None:
    if _extension(path) == '.kanc':
        write_cube(path, cube)
    else:
        write_png(path, cube)


def list_cube_files(directory: str) -> List[str]:
    """Sorted names of the cube files in a directory"""
    if not os.path.isdir(directory):
        raise FileNotFoundError(errno.ENOENT, 'Directory not found', directory)
    return sorted(name for name in os.listdir(directory)
                  if os.path.splitext(name)[1].lower() in SUPPORTED_EXTENSIONS)
