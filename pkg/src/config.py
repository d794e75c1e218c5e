"""
Configuration module for the data-driven geometric control toolkit.

This module manages environment variables, numerical tolerances and the
registry of builtin systems.
"""
import os
from dotenv import load_dotenv
from typing import Any, Dict, List

# Load environment variables from .env file
load_dotenv()


class Config:
    """Application configuration management."""

    # Output Configuration
    OUTPUT_DIR = os.getenv('DDGEO_OUTPUT_DIR', './ddgeo_output')
    LOG_LEVEL = os.getenv('DDGEO_LOG_LEVEL', 'INFO')

    # Numerical Tolerances
    RANK_TOL = float(os.getenv('DDGEO_RANK_TOL', '1e-10'))
    SUBSPACE_EQ_TOL = float(os.getenv('DDGEO_SUBSPACE_EQ_TOL', '1e-8'))
    RESIDUAL_TOL = float(os.getenv('DDGEO_RESIDUAL_TOL', '1e-8'))

    # Experiment Settings
    DEFAULT_SEED = int(os.getenv('DDGEO_SEED', '0'))
    INPUT_SCALE = 1.0
    STATE_SCALE = 1.0
    EXPERIMENT_SLACK_FACTOR = 2  # N = n + mT + 2n

    # Attack Settings
    ATTACK_ENERGY = float(os.getenv('DDGEO_ATTACK_ENERGY', '10.0'))
    ATTACK_ONSET = int(os.getenv('DDGEO_ATTACK_ONSET', '24'))
    DETECTION_THRESHOLD = 1e-6
    CONSENSUS_NOMINAL_INPUT = [-2.0, 2.0, 4.0]

    # Verification Suite
    VERIFY_TRIALS = int(os.getenv('DDGEO_TRIALS', '100'))
    VERIFY_WORKERS = int(os.getenv('DDGEO_WORKERS', '4'))
    ZERO_MATCH_TOL = 1e-6
    CLOSED_LOOP_STEPS = 50

    # Report Format
    SCHEMA_VERSION = 1

    # Builtin Systems
    SYSTEM_OPTIONS: Dict[str, Dict[str, Any]] = {
        "consensus": {
            "description": "Leader-follower consensus network, 11 followers, "
            "3 leaders, monitors at nodes 4 and 11",
            "parameters": {},
        },
        "random": {
            "description": "Gaussian system scaled to spectral radius <= 1",
            "parameters": {"n": 4, "m": 2, "p": 2},
        },
        "siso-zero": {
            "description": "SISO companion-form system with prescribed zeros",
            "parameters": {"zeros": [0.5], "poles": [0.2, -0.3]},
        },
        "degenerate": {
            "description": "System with a hidden reachable, unobservable mode "
            "(known nontrivial R*)",
            "parameters": {"n": 4},
        },
    }

    @classmethod
    def validate_config(cls) -> bool:
        """
        Validate numerical and experiment settings.

        Returns:
            bool: True if configuration is valid

        Raises:
            ValueError: If a setting is out of range
        """
        for name in ('RANK_TOL', 'SUBSPACE_EQ_TOL', 'RESIDUAL_TOL', 'ATTACK_ENERGY'):
            if not getattr(cls, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

        if cls.ATTACK_ONSET < 0:
            raise ValueError("ATTACK_ONSET must be non-negative")

        if cls.VERIFY_TRIALS < 1:
            raise ValueError("VERIFY_TRIALS must be at least 1")

        if cls.VERIFY_WORKERS < 1:
            raise ValueError("VERIFY_WORKERS must be at least 1")

        return True

    @classmethod
    def default_tolerances(cls):
        """Build the Tolerances value configured for this process."""
        from .subspace_core import Tolerances

        return Tolerances(
            rank_rel=cls.RANK_TOL,
            subspace_eq=cls.SUBSPACE_EQ_TOL,
            residual_abs=cls.RESIDUAL_TOL,
        )

    @classmethod
    def get_builtin_systems(cls) -> List[str]:
        """Get the names of all builtin systems."""
        return list(cls.SYSTEM_OPTIONS)

    @classmethod
    def get_system_description(cls, name: str) -> str:
        """Get description for a builtin system."""
        if name in cls.SYSTEM_OPTIONS:
            return cls.SYSTEM_OPTIONS[name]["description"]
        return ""

    @classmethod
    def get_system_defaults(cls, name: str) -> Dict[str, Any]:
        """Get default parameters for a builtin system."""
        if name in cls.SYSTEM_OPTIONS:
            return dict(cls.SYSTEM_OPTIONS[name]["parameters"])
        return {}
