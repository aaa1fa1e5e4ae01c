"""
Command Registry Module
Subcommands of the kano tool: their handlers, option schemas and argument checks
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

logger = logging.getLogger(__name__)

_TYPES = {
    'string': str,
    'integer': int,
    'number': (int, float),
    'boolean': bool
}


def option_flag(name: str, schema: Dict[str, Any]) -> str:
    """Command-line spelling of a handler keyword (schema 'flag' wins, else --dashed-name)"""
    return schema.get('flag', '--' + name.replace('_', '-'))


@dataclass
class CommandEntry:
    name: str
    handler: Callable[..., Dict[str, Any]]
    category: str
    description: str
    parameters: Dict[str, Dict[str, Any]]
    required: List[str] = field(default_factory=list)

    def flag(self, keyword: str) -> str:
        return option_flag(keyword, self.parameters.get(keyword, {}))


class HandlerRegistry:
    """Subcommands by name, grouped into the categories listed in --help"""

    def __init__(self):
        self._commands: Dict[str, CommandEntry] = {}
        self._categories: Dict[str, List[str]] = {}

    def register(
        self,
        command: str,
        handler: Callable[..., Dict[str, Any]],
        category: str,
        description: str,
        parameters: Dict[str, Dict[str, Any]],
        required_params: Optional[List[str]] = None
    ) -> None:
        """
        Add a subcommand.

        Args:
            command: Subcommand name as typed on the command line
            handler: Callable receiving the parsed options as keyword arguments
            category: Help group (degradation, training, inference, evaluation)
            description: One-line help text
            parameters: Option schemas keyed by handler keyword (type, description, default, enum, flag)
            required_params: Keywords that must be given
        """
        if command in self._commands:
            raise ValueError(f"Subcommand {command} is already registered")
        self._commands[command] = CommandEntry(command, handler, category, description, parameters,
                                               list(required_params or []))
        self._categories.setdefault(category, []).append(command)
        logger.debug(f"Registered subcommand {command} ({category})")

    def get_handler(self, command: str) -> Optional[Callable[..., Dict[str, Any]]]:
        entry = self._commands.get(command)
        return entry.handler if entry else None

    def get_command_info(self, command: str) -> Optional[CommandEntry]:
        return self._commands.get(command)

    def list_commands(self) -> List[CommandEntry]:
        """Entries ordered by category, then name"""
        return sorted(self._commands.values(), key=lambda entry: (entry.category, entry.name))

    def list_categories(self) -> Dict[str, List[str]]:
        return {category: sorted(commands) for category, commands in sorted(self._categories.items())}

    def check_arguments(self, command: str, arguments: Dict[str, Any]) -> Dict[str, Any]:
        """
        Check parsed options against the subcommand schema.

        Returns:
            {'valid': True} or {'valid': False, 'error': message}; missing options are
            also listed by flag under 'missing'
        """
        entry = self._commands.get(command)
        if entry is None:
            return {'valid': False, 'error': f"Unknown subcommand: {command}"}

        missing = [entry.flag(keyword) for keyword in entry.required if arguments.get(keyword) is None]
        if missing:
            return {
                'valid': False,
                'error': f"{command} requires {', '.join(missing)}",
                'missing': missing
            }

        unknown = sorted(keyword for keyword in arguments if keyword not in entry.parameters)
        if unknown:
            return {'valid': False, 'error': f"{command} does not take {unknown}"}

        for keyword, value in arguments.items():
            if value is None:
                continue
            schema = entry.parameters[keyword]
            kind = schema.get('type', 'string')
            expected = _TYPES.get(kind)
            if expected and (not isinstance(value, expected) or (isinstance(value, bool) and kind != 'boolean')):
                return {'valid': False, 'error': f"{entry.flag(keyword)} expects type {kind}, got {value!r}"}
            if 'enum' in schema and value not in schema['enum']:
                return {'valid': False,
                        'error': f"{entry.flag(keyword)} must be one of {schema['enum']}, got {value!r}"}

        return {'valid': True}
