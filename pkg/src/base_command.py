"""
Base Command for Shared Functionality.

This module provides the run configuration, the command result and the
base class for all CLI commands, containing the common functionality:
validation, system and data loading, report framing and error mapping.
"""
import logging
import time
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from .config import Config
from .exceptions import DataFormatError
from .lti_model import LtiSystem
from .serialization import DataBundle, read_experiment_data, read_system
from .subspace_core import Tolerances
from .systems import build_system
from .utils import (
    EXIT_SUCCESS,
    EXIT_VERIFICATION,
    exit_code_for,
    get_error_message,
    log_command,
    parse_float_list,
    validate_seed,
)

logger = logging.getLogger(__name__)

SUBSPACE_CHOICES = ("vstar", "rstar")


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one CLI invocation."""

    command: str
    system: str = "consensus"
    system_dir: Optional[str] = None
    dims: Optional[Tuple[int, ...]] = None
    zeros: Optional[Tuple[float, ...]] = None
    poles: Optional[Tuple[float, ...]] = None
    horizon: Optional[int] = None
    experiments: Optional[int] = None
    trajectory_length: Optional[int] = None
    seed: int = Config.DEFAULT_SEED
    out: Optional[str] = None
    data: Optional[str] = None
    oracle: bool = False
    subspace: str = "vstar"
    trials: int = Config.VERIFY_TRIALS
    workers: int = Config.VERIFY_WORKERS
    tol_rank: float = Config.RANK_TOL
    tol_eq: float = Config.SUBSPACE_EQ_TOL
    tol_residual: float = Config.RESIDUAL_TOL
    attack_energy: float = Config.ATTACK_ENERGY
    onset: int = Config.ATTACK_ONSET
    steps: Optional[int] = None
    threshold: float = Config.DETECTION_THRESHOLD
    nominal_input: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        error = self._validate()
        if error:
            raise ValueError(error)

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(item.name for item in fields(cls))

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "RunConfig":
        """
        Build a RunConfig from CLI arguments and/or a config file.

        Args:
            values: Parameter mapping; None values fall back to defaults

        Raises:
            ValueError: If a key is unknown or a value is invalid
        """
        unknown = sorted(set(values) - set(cls.field_names()))
        if unknown:
            raise ValueError(f"Unknown configuration keys: {', '.join(unknown)}")
        settings = {key: value for key, value in values.items() if value is not None}
        if 'command' not in settings:
            raise ValueError("Configuration must name a command")

        if 'seed' in settings:
            settings['seed'] = validate_seed(settings['seed'])
        for key in ('zeros', 'poles', 'nominal_input'):
            if key in settings:
                settings[key] = parse_float_list(settings[key], key)
        if 'dims' in settings:
            settings['dims'] = tuple(int(value) for value in settings['dims'])
        return cls(**settings)

    def _validate(self) -> Optional[str]:
        """
        Validate input parameters.

        Returns:
            Optional[str]: Error message if validation fails, None if valid
        """
        if self.system_dir is None and self.system not in Config.SYSTEM_OPTIONS:
            return f"Invalid system. Must be one of: {', '.join(Config.get_builtin_systems())}"

        for name in ('horizon', 'experiments', 'trajectory_length', 'steps'):
            value = getattr(self, name)
            if value is not None and (not isinstance(value, int) or value < 1):
                return f"{name} must be a positive integer, got {value!r}"

        for name in ('trials', 'workers'):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 1:
                return f"{name} must be a positive integer"

        if not isinstance(self.onset, int) or self.onset < 0:
            return "onset must be a non-negative integer"

        for name in ('tol_rank', 'tol_eq', 'tol_residual', 'attack_energy', 'threshold'):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not value > 0:
                return f"{name} must be strictly positive, got {value!r}"

        if self.subspace not in SUBSPACE_CHOICES:
            return f"Invalid subspace. Must be one of: {', '.join(SUBSPACE_CHOICES)}"

        if self.dims is not None and (not 1 <= len(self.dims) <= 3 or min(self.dims) < 1):
            return "dims must hold one to three positive integers (n [m [p]])"

        return None

    def tolerances(self) -> Tolerances:
        return Tolerances(rank_rel=self.tol_rank, subspace_eq=self.tol_eq, residual_abs=self.tol_residual)

    def system_params(self) -> Dict[str, Any]:
        """Overrides of the builtin system parameters."""
        params: Dict[str, Any] = {}
        if self.dims:
            params.update(dict(zip(('n', 'm', 'p'), self.dims)))
        if self.zeros is not None:
            params['zeros'] = list(self.zeros)
        if self.poles is not None:
            params['poles'] = list(self.poles)
        if self.system in ('random', 'degenerate'):
            params['seed'] = self.seed
        return params

    def output_dir(self, default_name: str) -> Path:
        return Path(self.out) if self.out else Path(Config.OUTPUT_DIR) / default_name

    def to_dict(self) -> Dict[str, Any]:
        return {key: list(value) if isinstance(value, tuple) else value for key, value in asdict(self).items()}


@dataclass
class CommandResult:
    """Result of a CLI command."""

    success: bool
    command: str
    report: Dict[str, Any] = field(default_factory=dict)
    error_message: Optional[str] = None
    exit_code: int = EXIT_SUCCESS
    elapsed: Optional[float] = None


class BaseCommand(ABC):
    """Base class for CLI commands."""

    @abstractmethod
    def get_command_name(self) -> str:
        """Get the subcommand name."""
        pass

    @abstractmethod
    def get_description(self) -> str:
        """Get a one-line description for help output."""
        pass

    @abstractmethod
    def run(self, config: RunConfig) -> Dict[str, Any]:
        """
        Execute the command body.

        Returns:
            dict: Report fields; a 'passed': False entry marks a
            numerical disagreement (exit 3)
        """
        pass

    def execute(self, config: RunConfig) -> CommandResult:
        """
        Run the command and map every outcome to a CommandResult.

        Exceptions never escape: library errors become exit 2 or 3,
        I/O and unexpected errors exit 1.
        """
        start_time = time.time()
        name = self.get_command_name()
        try:
            body = self.run(config)
            report = self._frame(body)
            passed = body.get('passed', True)
            elapsed = time.time() - start_time
            log_command(name, {'seed': config.seed, 'system': config.system}, success=passed, duration=elapsed)
            return CommandResult(
                success=bool(passed),
                command=name,
                report=report,
                error_message=None if passed else "Numerical verification failed",
                exit_code=EXIT_SUCCESS if passed else EXIT_VERIFICATION,
                elapsed=elapsed,
            )
        except Exception as e:
            logger.error(f"Command {name} failed: {type(e).__name__}: {e}")
            message = get_error_message(e)
            return CommandResult(
                success=False,
                command=name,
                report=self._frame({'error': {'type': type(e).__name__, 'message': message}}),
                error_message=message,
                exit_code=exit_code_for(e),
                elapsed=time.time() - start_time,
            )

    def _frame(self, body: Dict[str, Any]) -> Dict[str, Any]:
        return {'schema_version': Config.SCHEMA_VERSION, 'command': self.get_command_name(), **body}

    # Shared loading helpers

    def build_system(self, config: RunConfig) -> Tuple[LtiSystem, Dict[str, Any]]:
        """
        Create the true system from a builtin name or from matrix files.

        Returns:
            (system, descriptor) where the descriptor is stored in manifests
        """
        if config.system_dir:
            system = read_system(config.system_dir)
            return system, {'source': 'files', 'path': str(Path(config.system_dir).resolve())}
        params = config.system_params()
        system = build_system(config.system, **params)
        return system, {'source': 'builtin', 'name': config.system, 'params': params}

    def load_data(self, config: RunConfig) -> DataBundle:
        """
        Load the experiment data directory named by --data.

        Raises:
            DataFormatError: If no directory is given or it is malformed
        """
        if not config.data:
            raise DataFormatError("No data directory given; run 'collect' first and pass --data")
        return read_experiment_data(config.data, config.tolerances())

    def load_model(self, config: RunConfig, bundle: DataBundle) -> LtiSystem:
        """
        Recover the true system behind a data directory for oracle checks.

        Raises:
            DataFormatError: If neither stored matrices nor a builtin descriptor exist
        """
        model_dir = Path(config.data) / "model"
        if model_dir.is_dir():
            return read_system(model_dir)
        descriptor = bundle.manifest.get('system', {})
        if descriptor.get('source') == 'builtin':
            return build_system(descriptor['name'], **descriptor.get('params', {}))
        if descriptor.get('source') == 'files':
            return read_system(descriptor['path'])
        raise DataFormatError("Data directory carries no model; oracle comparison is unavailable")
