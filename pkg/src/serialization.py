"""
File formats: matrix CSV/JSON, experiment data directories, subspace and
zero-set JSON, attack outcome CSV.

Writes go to a temporary sibling first and are moved into place with
os.replace, so a failed command leaves no partial output behind.
"""
import json
import logging
import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Union

import numpy as np

from .attack_designer import AttackOutcome
from .config import Config
from .exceptions import DataFormatError, DimensionMismatchError
from .lti_model import ExperimentData, LtiSystem, SingleTrajectory
from .subspace_core import DEFAULT_TOLERANCES, Subspace, Tolerances

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MATRIX_FILES = ('X', 'X0', 'Y', 'U')
MANIFEST_NAME = 'manifest.json'
TRAJECTORY_FILES = ('traj_x', 'traj_u')
MODEL_FILES = ('A', 'B', 'C')


class DataBundle(NamedTuple):
    """Contents of an experiment data directory."""

    data: ExperimentData
    manifest: Dict[str, Any]
    trajectory: Optional[SingleTrajectory]


@contextmanager
def atomic_directory(target: PathLike) -> Iterator[Path]:
    """
    Yield a temporary directory that replaces target on success.

    On any exception the temporary directory is removed and target is
    left untouched.
    """
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=target.parent))
    try:
        yield staging
        if target.exists():
            backup = Path(tempfile.mkdtemp(prefix=f".{target.name}.old.", dir=target.parent))
            os.replace(target, backup / target.name)
            os.replace(staging, target)
            shutil.rmtree(backup, ignore_errors=True)
        else:
            os.replace(staging, target)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise


@contextmanager
def atomic_file(path: PathLike) -> Iterator[Path]:
    """Yield a temporary file path that replaces path on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    os.close(handle)
    try:
        yield Path(temp_name)
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.remove(temp_name)
        raise


def atomic_write_text(path: PathLike, text: str) -> Path:
    with atomic_file(path) as temp_path:
        temp_path.write_text(text, encoding='utf-8')
    return Path(path)


def dumps_json(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2) + "\n"


def write_json(path: PathLike, obj: Any) -> Path:
    return atomic_write_text(path, dumps_json(obj))


def read_json(path: PathLike) -> Any:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding='utf-8'))
    except FileNotFoundError as e:
        raise DataFormatError(f"Missing file: {path}") from e
    except json.JSONDecodeError as e:
        raise DataFormatError(f"Invalid JSON in {path}: {e}") from e


# Matrices

def _save_matrix(path: Path, matrix: np.ndarray) -> None:
    np.savetxt(path, np.atleast_2d(matrix), fmt='%.17g', delimiter=',')


def write_matrix_csv(path: PathLike, matrix: Any) -> Path:
    """One row per line, comma-separated, full double precision."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise DimensionMismatchError(f"Only 2-D matrices can be written, got shape {matrix.shape}")
    with atomic_file(path) as temp_path:
        _save_matrix(temp_path, matrix)
    return Path(path)


def read_matrix_csv(path: PathLike) -> np.ndarray:
    """
    Read a matrix written in the comma-separated dialect.

    Raises:
        DataFormatError: If the file is missing, ragged or non-numeric
    """
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"Missing matrix file: {path}")
    try:
        matrix = np.loadtxt(path, delimiter=',', ndmin=2, dtype=float)
    except ValueError as e:
        raise DataFormatError(f"Malformed matrix file {path}: {e}") from e
    if not np.all(np.isfinite(matrix)):
        raise DataFormatError(f"Matrix file {path} contains non-finite entries")
    return matrix


def matrix_to_json(matrix: Any) -> Dict[str, Any]:
    """{rows, cols, data} with data flattened row-major."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    return {'rows': matrix.shape[0], 'cols': matrix.shape[1], 'data': matrix.ravel().tolist()}


def matrix_from_json(obj: Dict[str, Any]) -> np.ndarray:
    try:
        rows, cols, data = int(obj['rows']), int(obj['cols']), obj['data']
        matrix = np.asarray(data, dtype=float).reshape(rows, cols)
    except (KeyError, TypeError, ValueError) as e:
        raise DataFormatError(f"Invalid matrix object: {e}") from e
    return matrix


# Subspaces and zeros

def subspace_to_json(V: Subspace) -> Dict[str, Any]:
    return V.to_dict()


def subspace_from_json(obj: Dict[str, Any]) -> Subspace:
    try:
        n, dim = int(obj['ambient_dim']), int(obj['dim'])
        basis = np.asarray(obj['basis'], dtype=float).reshape(n, dim)
    except (KeyError, TypeError, ValueError) as e:
        raise DataFormatError(f"Invalid subspace object: {e}") from e
    return Subspace(n, basis)


def zeros_to_json(zeros: Any) -> List[Dict[str, float]]:
    return [{'re': float(z.real), 'im': float(z.imag)} for z in np.asarray(zeros, dtype=complex).ravel()]


def zeros_from_json(items: List[Dict[str, float]]) -> np.ndarray:
    try:
        return np.array([complex(item['re'], item['im']) for item in items], dtype=complex)
    except (KeyError, TypeError) as e:
        raise DataFormatError(f"Invalid zero set: {e}") from e


# Systems

def write_system(directory: PathLike, sys: LtiSystem) -> Path:
    """Write A.csv, B.csv and C.csv into directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name in MODEL_FILES:
        _save_matrix(directory / f"{name}.csv", getattr(sys, name))
    return directory


def read_system(directory: PathLike) -> LtiSystem:
    """
    Load a system from A.csv, B.csv and C.csv.

    Raises:
        DataFormatError: If a file is missing or malformed
        DimensionMismatchError: If the matrices do not fit together
    """
    directory = Path(directory)
    matrices = {name: read_matrix_csv(directory / f"{name}.csv") for name in MODEL_FILES}
    return LtiSystem(**matrices)


# Experiment data

def build_manifest(data: ExperimentData, system: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    return {
        'schema_version': Config.SCHEMA_VERSION,
        'n': data.n,
        'm': data.m,
        'p': data.p,
        'T': data.T,
        'N': data.N,
        'seed': data.seed,
        'system': system or {},
    }


def write_experiment_data(
    directory: PathLike,
    data: ExperimentData,
    system: Optional[Dict[str, Any]] = None,
    trajectory: Optional[SingleTrajectory] = None,
    model: Optional[LtiSystem] = None,
) -> Path:
    """
    Write X.csv, X0.csv, Y.csv, U.csv and manifest.json atomically.

    Args:
        directory: Target directory (replaced if it exists)
        data: Experiment data
        system: Descriptor of the generating system stored in the manifest
        trajectory: Optional single trajectory for feedback and zeros
        model: Optional ground truth written under model/ for oracle checks

    Returns:
        Path: The target directory
    """
    directory = Path(directory)
    with atomic_directory(directory) as staging:
        for name in MATRIX_FILES:
            _save_matrix(staging / f"{name}.csv", getattr(data, name))
        if trajectory is not None:
            _save_matrix(staging / "traj_x.csv", trajectory.x_seq)
            _save_matrix(staging / "traj_u.csv", trajectory.u_seq)
        if model is not None:
            write_system(staging / "model", model)
        (staging / MANIFEST_NAME).write_text(dumps_json(build_manifest(data, system)), encoding='utf-8')
    logger.info(f"Wrote experiment data (T={data.T}, N={data.N}) to {directory}")
    return directory


def _require_int(manifest: Dict[str, Any], key: str) -> int:
    value = manifest.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise DataFormatError(f"Manifest field '{key}' must be a positive integer, got {value!r}")
    return value


def read_experiment_data(directory: PathLike, tol: Tolerances = DEFAULT_TOLERANCES) -> DataBundle:
    """
    Load an experiment data directory and check it against its manifest.

    Raises:
        DataFormatError: If files are missing, malformed or disagree with the manifest
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise DataFormatError(f"Data directory not found: {directory}")

    manifest = read_json(directory / MANIFEST_NAME)
    if not isinstance(manifest, dict):
        raise DataFormatError("Manifest must be a JSON object")
    if manifest.get('schema_version') != Config.SCHEMA_VERSION:
        raise DataFormatError(f"Unsupported schema version {manifest.get('schema_version')!r}")
    dims = {key: _require_int(manifest, key) for key in ('n', 'm', 'p', 'T', 'N')}

    matrices = {name: read_matrix_csv(directory / f"{name}.csv") for name in MATRIX_FILES}
    expected = {
        'X': (dims['n'] * dims['T'], dims['N']),
        'X0': (dims['n'], dims['N']),
        'Y': (dims['p'] * dims['T'], dims['N']),
        'U': (dims['m'] * dims['T'], dims['N']),
    }
    for name, shape in expected.items():
        if matrices[name].shape != shape:
            raise DataFormatError(f"{name}.csv has shape {matrices[name].shape}, manifest implies {shape}")

    data = ExperimentData.from_matrices(
        matrices['X'],
        matrices['X0'],
        matrices['Y'],
        matrices['U'],
        T=dims['T'],
        seed=manifest.get('seed'),
        metadata={'system': manifest.get('system', {})},
        tol=tol,
    )

    trajectory = None
    if all((directory / f"{name}.csv").is_file() for name in TRAJECTORY_FILES):
        trajectory = SingleTrajectory(
            read_matrix_csv(directory / "traj_x.csv"),
            read_matrix_csv(directory / "traj_u.csv"),
        )
        if trajectory.x_seq.shape[0] != data.n or trajectory.u_seq.shape[0] != data.m:
            raise DataFormatError("Stored trajectory does not match the data dimensions")

    logger.debug(f"Loaded experiment data from {directory}: {dims}")
    return DataBundle(data=data, manifest=manifest, trajectory=trajectory)


# Attack outcomes

def attack_outcome_rows(outcome: AttackOutcome) -> np.ndarray:
    """
    Table with one row per step.

    Columns: step, state deviation, output deviation, then nominal and
    attacked output of every monitor.
    """
    steps = np.arange(outcome.steps + 1, dtype=float)
    return np.column_stack([
        steps,
        outcome.state_deviation,
        outcome.output_deviation,
        outcome.nominal_outputs.T,
        outcome.attacked_outputs.T,
    ])


def attack_outcome_header(monitors: int) -> str:
    columns = ['step', 'state_deviation', 'output_deviation']
    columns += [f"y{k}_nominal" for k in range(monitors)]
    columns += [f"y{k}_attacked" for k in range(monitors)]
    return ','.join(columns)


def write_attack_csv(path: PathLike, outcome: AttackOutcome) -> Path:
    """Write an AttackOutcome as CSV with a header row."""
    with atomic_file(path) as temp_path:
        np.savetxt(
            temp_path,
            attack_outcome_rows(outcome),
            fmt='%.12g',
            delimiter=',',
            header=attack_outcome_header(outcome.nominal_outputs.shape[0]),
            comments='',
        )
    return Path(path)
