"""
Command Dispatcher Module
Builds the argument parser from the registry and dispatches subcommands to handlers,
mapping failures to exit codes (0 success, 1 runtime error, 2 usage error)
"""
import argparse
import logging
from typing import Any, Dict

from cli.registry import HandlerRegistry, option_flag
from core.validation.error_handler import (
    ConfigError, ErrorHandler, KanoError, UnsupportedFormatError, UsageError
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

GLOBAL_OPTIONS = ('command', 'config', 'print_config', 'log_level', 'report')

_ARG_TYPES = {'string': str, 'integer': int, 'number': float}


class UsageArgumentParser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting"""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


class CommandDispatcher:
    """Dispatches subcommands to handlers"""

    def __init__(self, registry: HandlerRegistry):
        self.registry = registry

    def build_parser(self, prog: str = 'kano') -> argparse.ArgumentParser:
        """Global flags plus one subparser per registered command"""
        epilog = '\n'.join(
            f"{category}: {', '.join(commands)}" for category, commands in self.registry.list_categories().items()
        )
        parser = UsageArgumentParser(
            prog=prog,
            description='KANO blind super-resolution tools',
            epilog=epilog,
            formatter_class=argparse.RawDescriptionHelpFormatter
        )
        parser.add_argument('--config', help='Experiment config JSON merged over the defaults')
        parser.add_argument('--print-config', action='store_true', help='Print the resolved config and exit')
        parser.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
                            help='Logging level (default from config)')
        parser.add_argument('--report', help='Write the command result as a JSON report')

        subparsers = parser.add_subparsers(dest='command', parser_class=UsageArgumentParser)
        for entry in self.registry.list_commands():
            sub = subparsers.add_parser(entry.name, help=entry.description, description=entry.description)
            for name, schema in entry.parameters.items():
                help_text = schema.get('description', '')
                if schema.get('type') == 'boolean':
                    sub.add_argument(option_flag(name, schema), dest=name, action='store_true', help=help_text)
                    continue
                sub.add_argument(
                    option_flag(name, schema),
                    dest=name,
                    type=_ARG_TYPES.get(schema.get('type', 'string'), str),
                    default=schema.get('default'),
                    choices=schema.get('enum'),
                    help=help_text
                )
        return parser

    def command_arguments(self, namespace: argparse.Namespace) -> Dict[str, Any]:
        return {key: value for key, value in vars(namespace).items() if key not in GLOBAL_OPTIONS}

    def dispatch(self, command: str, arguments: Dict[str, Any]) -> Dict[str, Any]:
        """
        Dispatch a subcommand.

        Args:
            command: Name of the subcommand
            arguments: Handler keyword arguments

        Returns:
            Handler result with an 'exit_code' entry
        """
        try:
            handler = self.registry.get_handler(command)
            if not handler:
                raise UsageError(f"Unknown command: {command}; available: "
                                 f"{[entry.name for entry in self.registry.list_commands()]}")

            validation = self.registry.check_arguments(command, arguments)
            if not validation['valid']:
                if validation.get('missing'):
                    result = ErrorHandler.handle_missing_parameter(validation['missing'][0])
                else:
                    result = ErrorHandler.handle_validation_error(validation['error'], {'command': command})
                logger.warning(f"{command}: {result['error']['message']}")
                result['exit_code'] = EXIT_USAGE
                return result

            logger.info(f"Dispatching command: {command}")
            logger.debug(f"Arguments: {arguments}")
            result = handler(**arguments)
            exit_code = EXIT_OK if result.get('success', False) else result.get('exit_code', EXIT_RUNTIME)

        except UnsupportedFormatError as e:
            logger.warning(f"{command}: {e}")
            result = ErrorHandler.handle_unsupported_format(e.format_type, e.supported)
            exit_code = EXIT_USAGE
        except (UsageError, ConfigError) as e:
            result = ErrorHandler.handle_kano_error(command, e)
            exit_code = EXIT_USAGE
        except FileNotFoundError as e:
            result = ErrorHandler.handle_file_not_found(e.filename or str(e))
            exit_code = EXIT_USAGE
        except KanoError as e:
            result = ErrorHandler.handle_kano_error(command, e)
            exit_code = EXIT_RUNTIME
        except Exception as e:
            result = ErrorHandler.handle_unexpected_error(command, e)
            exit_code = EXIT_RUNTIME

        result['exit_code'] = exit_code
        if exit_code == EXIT_OK:
            logger.debug(f"Command {command} completed successfully")
        return result
