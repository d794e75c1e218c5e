"""
Utility functions shared by the command-line layer.
"""
import logging
import sys
from typing import Any, Dict, Optional, Sequence

import numpy as np

from .exceptions import DdgeoError

logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_VERIFICATION = 3


def validate_seed(seed_value: Any) -> int:
    """
    Validate and convert a seed value.

    Args:
        seed_value: Raw seed value from the command line or a config file

    Returns:
        int: Non-negative integer seed

    Raises:
        ValueError: If the value is not a non-negative integer
    """
    if isinstance(seed_value, bool):
        raise ValueError(f"Invalid seed value: {seed_value!r}")
    try:
        seed_int = int(seed_value)
    except (ValueError, TypeError) as e:
        raise ValueError(f"Invalid seed value: {seed_value!r}") from e
    if seed_int != seed_value and not isinstance(seed_value, str):
        raise ValueError(f"Seed must be an integer, got {seed_value!r}")
    if seed_int < 0:
        raise ValueError(f"Seed must be non-negative, got {seed_int}")
    return seed_int


def format_duration(seconds: float) -> str:
    """
    Format duration in a human-readable way.

    Args:
        seconds: Duration in seconds

    Returns:
        str: Formatted duration string
    """
    if seconds < 60:
        return f"{seconds:.1f}s"
    elif seconds < 3600:
        minutes = int(seconds // 60)
        secs = int(seconds % 60)
        return f"{minutes}m {secs}s"
    else:
        hours = int(seconds // 3600)
        minutes = int((seconds % 3600) // 60)
        return f"{hours}h {minutes}m"


def exit_code_for(error: BaseException) -> int:
    """
    Map an exception to the process exit code.

    Numerical verification failures exit with 3, invalid input with 2
    and everything else (I/O included) with 1.
    """
    if isinstance(error, DdgeoError):
        return EXIT_VERIFICATION if error.verification_failure else EXIT_VALIDATION
    if isinstance(error, OSError):
        return EXIT_FAILURE
    if isinstance(error, (ValueError, TypeError, KeyError)):
        return EXIT_VALIDATION
    return EXIT_FAILURE


def get_error_message(error: BaseException) -> str:
    """
    Get user-friendly error message.

    Args:
        error: Exception object

    Returns:
        str: User-friendly error message
    """
    if isinstance(error, DdgeoError):
        return str(error)
    if isinstance(error, FileNotFoundError):
        return f"File not found: {error.filename}"
    if isinstance(error, PermissionError):
        return f"Permission denied: {error.filename}"
    if isinstance(error, OSError):
        return f"I/O error: {error}"
    return f"An error occurred: {error}"


def parse_float_list(values: Optional[Sequence[Any]], name: str) -> Optional[tuple]:
    """Convert a sequence of numbers to a tuple of finite floats (None passes through)."""
    if values is None:
        return None
    try:
        parsed = tuple(float(value) for value in values)
    except (TypeError, ValueError) as e:
        raise ValueError(f"{name} must be a list of numbers, got {values!r}") from e
    if not all(np.isfinite(parsed)):
        raise ValueError(f"{name} contains non-finite values")
    return parsed


def status(message: str, ok: Optional[bool] = True) -> None:
    """Print a human-facing status line to stderr (✅ / ❌ / ⚠️)."""
    marker = "✅" if ok else ("⚠️" if ok is None else "❌")
    print(f"{marker} {message}", file=sys.stderr)


def log_command(
    command: str,
    parameters: Dict[str, Any],
    success: Optional[bool] = None,
    duration: Optional[float] = None,
) -> None:
    """
    Log command information for monitoring and debugging.

    Args:
        command: Command name
        parameters: Resolved run parameters
        success: Whether the command succeeded
        duration: Command duration in seconds
    """
    log_data = {'command': command, **{key: value for key, value in parameters.items() if value is not None}}

    if success is not None:
        log_data['success'] = success
    if duration is not None:
        log_data['duration'] = f"{duration:.2f}s"

    logger.info(f"Command: {log_data}")
