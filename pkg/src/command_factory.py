"""
Command Factory for the ddgeo command line.

This module provides a factory for creating the command object that
handles a subcommand.
"""
import logging
from typing import Dict, List, Type

from .base_command import BaseCommand
from .commands import (
    AttackCommand,
    CheckEnvCommand,
    CollectCommand,
    FeedbackCommand,
    SubspacesCommand,
    VerifyCommand,
    ZerosCommand,
)

logger = logging.getLogger(__name__)

_COMMANDS: Dict[str, Type[BaseCommand]] = {
    "collect": CollectCommand,
    "subspaces": SubspacesCommand,
    "zeros": ZerosCommand,
    "feedback": FeedbackCommand,
    "attack": AttackCommand,
    "verify": VerifyCommand,
    "check-env": CheckEnvCommand,
}


class CommandFactory:
    """Factory for creating CLI commands based on the subcommand name."""

    @staticmethod
    def create_command(name: str) -> BaseCommand:
        """
        Create a command instance based on the subcommand name.

        Args:
            name: Subcommand ('collect', 'subspaces', 'zeros', 'feedback',
                'attack', 'verify', 'check-env')

        Returns:
            BaseCommand: Appropriate command instance

        Raises:
            ValueError: If the command is not supported
        """
        name = name.lower().strip()
        if name not in _COMMANDS:
            raise ValueError(
                f"Unsupported command: {name}. Supported commands: {CommandFactory.get_supported_commands()}"
            )
        logger.debug(f"Creating {_COMMANDS[name].__name__}")
        return _COMMANDS[name]()

    @staticmethod
    def get_supported_commands() -> List[str]:
        """
        Get list of supported subcommands.

        Returns:
            list: Subcommand names in help order
        """
        return list(_COMMANDS)

    @staticmethod
    def get_command_description(name: str) -> str:
        """
        Get human-readable description for a subcommand.

        Args:
            name: Subcommand name

        Returns:
            str: Description of the command
        """
        if name not in _COMMANDS:
            return "Unknown command"
        return _COMMANDS[name]().get_description()
