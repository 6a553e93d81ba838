"""Command registry for the toolkit's report-producing commands"""
from dataclasses import dataclass
from typing import Any, Awaitable, Callable, Dict, List, Type

from pydantic import BaseModel


@dataclass
class CommandSpec:
    """Command specification with metadata"""
    name: str
    description: str
    model: Type[BaseModel]

    @property
    def parameters(self) -> Dict[str, Any]:
        return self.model.model_json_schema()


class CommandRegistry:
    """Registry for commands and their handlers"""

    def __init__(self):
        self._commands: Dict[str, CommandSpec] = {}
        self._handlers: Dict[str, Callable[..., Awaitable[Dict[str, Any]]]] = {}

    def register_command(self, name: str, spec: Dict[str, Any]):
        """
        Register a command specification

        Args:
            name: Command name
            spec: Dict with a description and the pydantic request model
        """
        self._commands[name] = CommandSpec(
            name=name,
            description=spec.get("description", ""),
            model=spec["model"],
        )

    def register_handler(self, name: str, handler: Callable):
        """
        Register a command handler

        Args:
            name: Command name
            handler: Async function returning the result payload
        """
        self._handlers[name] = handler

    def get_command_specs(self) -> List[Dict[str, Any]]:
        return [
            {"name": c.name, "description": c.description, "parameters": c.parameters}
            for c in self._commands.values()
        ]

    def get_spec(self, name: str) -> CommandSpec:
        if name not in self._commands:
            raise KeyError(f"No command registered: {name}")
        return self._commands[name]

    def get_handler(self, name: str) -> Callable:
        """
        Get handler for a command

        Raises:
            KeyError: If command not found
        """
        if name not in self._handlers:
            raise KeyError(f"No handler registered for command: {name}")
        return self._handlers[name]

    def has_command(self, name: str) -> bool:
        return name in self._commands and name in self._handlers

    async def execute(self, name: str, arguments: Dict[str, Any]) -> Dict[str, Any]:
        handler = self.get_handler(name)
        return await handler(**arguments)


# Global registry instance
command_registry = CommandRegistry()


def register_command(name: str, spec: Dict[str, Any]):
    """Register a command spec"""
    command_registry.register_command(name, spec)
    return lambda f: f


def register_handler(name: str):
    """Decorator for registering command handlers"""
    def decorator(func: Callable):
        command_registry.register_handler(name, func)
        return func
    return decorator
