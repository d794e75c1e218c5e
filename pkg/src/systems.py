"""
Builtin test systems: random, prescribed-zero SISO and degenerate fixtures.
"""
import logging
from typing import Any, Optional, Sequence, Tuple

import numpy as np

from .config import Config
from .lti_model import LtiSystem, consensus_example
from .subspace_core import Subspace

logger = logging.getLogger(__name__)


def random_system(n: int, m: int, p: int, seed: int = 0, max_radius: float = 1.0) -> LtiSystem:
    """
    Gaussian (A, B, C) with A scaled so that its spectral radius is at most max_radius.
    """
    if min(n, m, p) < 1:
        raise ValueError(f"Dimensions must be positive, got n={n}, m={m}, p={p}")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    radius = float(np.max(np.abs(np.linalg.eigvals(A))))
    if radius > max_radius:
        A *= max_radius / radius
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((p, n))
    return LtiSystem(A, B, C)


def siso_zero_system(zeros: Sequence[float], poles: Optional[Sequence[float]] = None) -> LtiSystem:
    """
    Controllable companion form of prod(z - zeros) / prod(z - poles).

    The denominator degree n is len(poles); the numerator must have
    degree below n so the system is strictly proper.

    Args:
        zeros: Numerator roots (real)
        poles: Denominator roots; defaults to len(zeros) + 1 stable poles

    Returns:
        LtiSystem with one input and one output
    """
    zeros = list(zeros)
    if poles is None:
        poles = [0.2 - 0.15 * k for k in range(len(zeros) + 1)]
    poles = list(poles)
    n = len(poles)
    if len(zeros) >= n:
        raise ValueError("Need more poles than zeros for a strictly proper system")

    denominator = np.poly(poles)  # leading 1, then a_{n-1} .. a_0
    numerator = np.poly(zeros) if zeros else np.array([1.0])

    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -denominator[::-1][:n]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    C = np.zeros((1, n))
    C[0, : len(numerator)] = numerator[::-1]
    return LtiSystem(A, B, C)


def degenerate_system(n: int = 4, seed: int = 0) -> Tuple[LtiSystem, Subspace]:
    """
    System whose R* is known: a reachable mode that no output sees.

    The visible part is a square (n-1)-state system with one input and
    one output; the hidden mode has its own input. A random similarity
    transform disguises the block structure.

    Returns:
        (system, R*) with dim R* = 1
    """
    if n < 2:
        raise ValueError("Degenerate fixture needs n >= 2")
    rng = np.random.default_rng(seed)
    visible = random_system(n - 1, 1, 1, seed=seed, max_radius=0.9)

    A = np.zeros((n, n))
    A[:-1, :-1] = visible.A
    A[-1, -1] = 0.5
    B = np.zeros((n, 2))
    B[:-1, :1] = visible.B
    B[-1, 1] = 1.0
    C = np.zeros((1, n))
    C[:, :-1] = visible.C

    transform, _ = np.linalg.qr(rng.standard_normal((n, n)))
    hidden = transform @ np.eye(n)[:, -1:]
    system = LtiSystem(transform @ A @ transform.T, transform @ B, C @ transform.T)
    return system, Subspace(n, hidden)


def build_system(name: str, **params: Any) -> LtiSystem:
    """
    Create a builtin system by name.

    Args:
        name: One of Config.get_builtin_systems()
        **params: Overrides of the registered default parameters

    Raises:
        ValueError: If the name is not registered
    """
    if name not in Config.SYSTEM_OPTIONS:
        raise ValueError(
            f"Unsupported system: {name}. Supported systems: {Config.get_builtin_systems()}"
        )
    settings = Config.get_system_defaults(name)
    overrides = {key: value for key, value in params.items() if value is not None}
    if "zeros" in overrides and "poles" not in overrides:
        # default poles only fit the default zeros
        settings.pop("poles", None)
    settings.update(overrides)
    logger.info(f"Building {name} system with {settings}")

    if name == "consensus":
        return consensus_example()
    if name == "random":
        return random_system(
            int(settings["n"]), int(settings["m"]), int(settings["p"]), seed=int(settings.get("seed", 0))
        )
    if name == "siso-zero":
        return siso_zero_system(settings["zeros"], settings.get("poles"))
    system, _ = degenerate_system(int(settings["n"]), seed=int(settings.get("seed", 0)))
    return system
