"""
KANO Command Line
Main entry point for the KANO blind super-resolution tools
"""
import logging
import os
import sys
from typing import Any, Dict, List, Optional

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import orjson

from cli.dispatch import EXIT_OK, EXIT_USAGE, CommandDispatcher
from cli.file_utils import require_file
from cli.handlers import register_all_handlers
from cli.registry import HandlerRegistry
from core.config.config_manager import config
from core.export.atomic import dumps_json, read_json, write_json
from core.validation.error_handler import ConfigError, UsageError
from src.__version__ import __version__

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(__name__)


def configure_logging(level: Optional[str] = None) -> None:
    """Stderr logging in the standard format, plus logging.file when configured"""
    level = level or config.get('logging.level', 'WARNING')
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    log_file = config.get('logging.file')
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)


def load_experiment_config(path: str) -> Dict[str, Any]:
    try:
        experiment = read_json(require_file(path))
    except orjson.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(experiment, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    return experiment


def create_dispatcher() -> CommandDispatcher:
    """Registry with every handler registered, wrapped in a dispatcher"""
    registry = HandlerRegistry()
    register_all_handlers(registry)
    return CommandDispatcher(registry)


def _emit(payload: Dict[str, Any]) -> None:
    sys.stdout.write(dumps_json(payload).decode('utf-8') + '\n')


def cli(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand.

    Returns:
        0 on success, 1 on runtime error, 2 on usage error
    """
    dispatcher = create_dispatcher()
    parser = dispatcher.build_parser()
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    except SystemExit as e:
        return int(e.code or 0)

    try:
        experiment = load_experiment_config(args.config) if args.config else None
        with config.overridden(experiment):
            configure_logging(args.log_level)
            if args.print_config:
                _emit(config.all)
                return EXIT_OK
            if not args.command:
                raise UsageError(f"No command given; choose one of {[entry.name for entry in dispatcher.registry.list_commands()]}")
            result = dispatcher.dispatch(args.command, dispatcher.command_arguments(args))
    except (UsageError, ConfigError, FileNotFoundError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE

    exit_code = result.pop('exit_code')
    if args.report:
        write_json(args.report, {'command': args.command, 'exit_code': exit_code, **result})
    _emit(result)
    if exit_code != EXIT_OK:
        error = result.get('error')
        message = error.get('message') if isinstance(error, dict) else error
        sys.stderr.write(f"error: {message}\n")
    return exit_code


def main() -> None:
    """Console entry point"""
    sys.exit(cli())


if __name__ == "__main__":
    main()
