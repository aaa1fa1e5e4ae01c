"""Validation module: exception hierarchy and error formatting."""

from core.validation.error_handler import (
    CheckpointError, ConfigError, CubeFormatError, DegradationError, ErrorHandler, GraphError,
    ImageFormatError, KanoError, KnotError, NonFiniteError, ShapeError, TrainingAborted, UnsupportedFormatError,
    UsageError
)

__all__ = [
    'ErrorHandler', 'KanoError', 'GraphError', 'NonFiniteError', 'ShapeError', 'KnotError',
    'DegradationError', 'ConfigError', 'UsageError', 'CubeFormatError', 'ImageFormatError',
    'CheckpointError', 'TrainingAborted', 'UnsupportedFormatError'
]
