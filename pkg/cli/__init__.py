"""Command-line surface for the KANO tools"""
from .registry import HandlerRegistry
from .dispatch import CommandDispatcher, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE
from .command_schemas import COMMAND_SCHEMAS

__all__ = ['HandlerRegistry', 'CommandDispatcher', 'COMMAND_SCHEMAS', 'EXIT_OK', 'EXIT_RUNTIME', 'EXIT_USAGE']
