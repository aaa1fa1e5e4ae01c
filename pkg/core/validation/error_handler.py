"""
Error Handler Module
Exception hierarchy for the KANO pipeline and consistent error formatting for the CLI
"""
import logging
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)


class KanoError(Exception):
    """Base class for all errors raised by the package"""


class GraphError(KanoError):
    """Misuse of the differentiation engine (e.g. backward before forward)"""


class NonFiniteError(KanoError):
    """A computation produced NaN or Inf"""

    def __init__(self, message: str, op: Optional[str] = None, stage: Optional[int] = None):
        super().__init__(message)
        self.op = op
        self.stage = stage


class ShapeError(KanoError):
    """Incompatible shapes or dimensions"""


class KnotError(KanoError):
    """Invalid B-spline knot vector"""


class DegradationError(KanoError):
    """Invalid degradation parameters"""


class ConfigError(KanoError):
    """Configuration schema violation"""


class UsageError(KanoError):
    """Bad command-line usage"""


class UnsupportedFormatError(UsageError):
    """Input or output file with an extension the tools cannot handle"""

    def __init__(self, format_type: str, supported: List[str]):
        super().__init__(f"Unsupported format {format_type!r}; expected one of {supported}")
        self.format_type = format_type
        self.supported = list(supported)


class CubeFormatError(KanoError):
    """Malformed KANC cube file"""

    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind.replace('_', ' ')}: {message}")
        self.kind = kind


class ImageFormatError(KanoError):
    """Unsupported PNG flavour"""


class CheckpointError(KanoError):
    """Unreadable or inconsistent checkpoint"""


class TrainingAborted(KanoError):
    """Training stopped on a non-finite loss"""

    def __init__(self, message: str, step: int, stage: Optional[int] = None,
                 dump: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.step = step
        self.stage = stage
        self.dump = dump or {}


class ErrorHandler:
    """Formats errors consistently across the command surface"""

    @staticmethod
    def handle_unexpected_error(command: str, exception: Exception) -> Dict[str, Any]:
        """Handle an unexpected error and return a formatted response"""
        error_type = type(exception).__name__
        error_message = str(exception)

        logger.error(f"Error in command {command}: {error_type}: {error_message}", exc_info=True)

        return {
            'success': False,
            'error': {
                'type': error_type,
                'message': error_message,
                'command': command
            }
        }

    @staticmethod
    def handle_kano_error(command: str, exception: KanoError) -> Dict[str, Any]:
        """Handle a domain error (expected failure, no traceback)"""
        logger.warning(f"{command} failed: {type(exception).__name__}: {exception}")
        error = {
            'type': type(exception).__name__,
            'message': str(exception),
            'command': command
        }
        if isinstance(exception, CubeFormatError):
            error['kind'] = exception.kind
        if isinstance(exception, NonFiniteError) and exception.op:
            error['op'] = exception.op
        if isinstance(exception, TrainingAborted):
            error['step'] = exception.step
            error['stage'] = exception.stage
            error['dump'] = exception.dump
        return {'success': False, 'error': error}

    @staticmethod
    def handle_validation_error(message: str, details: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """Handle a validation error"""
        result = {
            'success': False,
            'error': {
                'type': 'ValidationError',
                'message': message
            }
        }
        if details:
            result['error']['details'] = details
        return result

    @staticmethod
    def handle_file_not_found(path: str) -> Dict[str, Any]:
        """Handle file not found error"""
        return {
            'success': False,
            'error': {
                'type': 'FileNotFound',
                'message': f'File not found: {path}',
                'path': path
            }
        }

    @staticmethod
    def handle_unsupported_format(format_type: str, supported: list) -> Dict[str, Any]:
        """Handle unsupported format error"""
        return {
            'success': False,
            'error': {
                'type': 'UnsupportedFormat',
                'message': f'Unsupported format: {format_type}',
                'supported_formats': supported
            }
        }

    @staticmethod
    def handle_missing_parameter(param_name: str) -> Dict[str, Any]:
        """Handle missing required parameter"""
        return {
            'success': False,
            'error': {
                'type': 'MissingParameter',
                'message': f'Required parameter missing: {param_name}'
            }
        }