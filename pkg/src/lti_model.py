"""
Ground-truth discrete-time LTI systems, simulation and data collection.

The model (A, B, C) is only used to generate data and to verify
data-driven results; nothing in data_driven.py reads it.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Optional, Tuple

import numpy as np

from .config import Config
from .exceptions import DimensionMismatchError
from .subspace_core import (
    DEFAULT_TOLERANCES,
    Subspace,
    Tolerances,
    as_matrix,
    kernel_basis,
    rank_tol,
)

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class LtiSystem:
    """x(t+1) = A x(t) + B u(t),  y(t) = C x(t)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        C = as_matrix(self.C, "C")
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionMismatchError(f"A must be square, got {A.shape}")
        if B.shape[0] != n:
            raise DimensionMismatchError(f"B must have {n} rows, got {B.shape}")
        if C.shape[1] != n:
            raise DimensionMismatchError(f"C must have {n} columns, got {C.shape}")
        if n < 1 or B.shape[1] < 1 or C.shape[0] < 1:
            raise DimensionMismatchError("n, m and p must all be at least 1")
        object.__setattr__(self, 'A', _frozen(A))
        object.__setattr__(self, 'B', _frozen(B))
        object.__setattr__(self, 'C', _frozen(C))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    def ker_c(self, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
        return kernel_basis(self.C, tol)

    def __repr__(self) -> str:
        return f"LtiSystem(n={self.n}, m={self.m}, p={self.p})"


@dataclass(frozen=True, eq=False)
class SingleTrajectory:
    """
    One state/input record x(0..L), u(0..L-1), optionally with outputs y(0..L-1).

    Columns are time steps: x_seq is n x (L+1), u_seq is m x L.
    """

    x_seq: np.ndarray
    u_seq: np.ndarray
    y_seq: Optional[np.ndarray] = None

    def __post_init__(self):
        x_seq = as_matrix(self.x_seq, "x_seq")
        u_seq = as_matrix(self.u_seq, "u_seq")
        if x_seq.shape[1] != u_seq.shape[1] + 1:
            raise DimensionMismatchError(
                f"x_seq has {x_seq.shape[1]} samples, expected {u_seq.shape[1] + 1}"
            )
        object.__setattr__(self, 'x_seq', _frozen(x_seq))
        object.__setattr__(self, 'u_seq', _frozen(u_seq))
        if self.y_seq is not None:
            y_seq = as_matrix(self.y_seq, "y_seq")
            if y_seq.shape[1] != u_seq.shape[1]:
                raise DimensionMismatchError("y_seq must have one sample per input")
            object.__setattr__(self, 'y_seq', _frozen(y_seq))

    @property
    def length(self) -> int:
        return self.u_seq.shape[1]

    @property
    def X0(self) -> np.ndarray:
        """X_{0,T} = [x(0) .. x(T-1)]."""
        return self.x_seq[:, :-1]

    @property
    def X1(self) -> np.ndarray:
        """X_{1,T} = [x(1) .. x(T)]."""
        return self.x_seq[:, 1:]

    @property
    def U0(self) -> np.ndarray:
        """U_{0,T} = [u(0) .. u(T-1)]."""
        return self.u_seq

    def stacked_states(self) -> np.ndarray:
        """X_T: x(1)..x(T) stacked into one column vector."""
        return self.x_seq[:, 1:].flatten(order='F')

    def stacked_outputs(self) -> np.ndarray:
        """Y_T: y(0)..y(T-1) stacked into one column vector."""
        if self.y_seq is None:
            raise ValueError("Trajectory was recorded without outputs")
        return self.y_seq.flatten(order='F')

    def stacked_inputs(self) -> np.ndarray:
        """U_T: u(0)..u(T-1) stacked into one column vector."""
        return self.u_seq.flatten(order='F')

    def dynamics_residual(self, sys: LtiSystem) -> float:
        """Largest |x(t+1) - A x(t) - B u(t)| over the record."""
        residual = self.X1 - sys.A @ self.X0 - sys.B @ self.U0
        return float(np.max(np.abs(residual))) if residual.size else 0.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Horizon, experiment count and random draw settings for collect()."""

    horizon: int
    experiments: int
    seed: int = 0
    input_scale: float = Config.INPUT_SCALE
    state_scale: float = Config.STATE_SCALE

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"Horizon must be at least 1, got {self.horizon}")
        if self.experiments < 1:
            raise ValueError(f"Experiment count must be at least 1, got {self.experiments}")
        if self.input_scale <= 0 or self.state_scale <= 0:
            raise ValueError("Input and state scales must be positive")

    @classmethod
    def default_for(cls, sys: LtiSystem, seed: int = 0, horizon: Optional[int] = None) -> "ExperimentConfig":
        """T = n (or the given horizon) and N = n + mT + 2n."""
        T = sys.n if horizon is None else horizon
        N = sys.n + sys.m * T + Config.EXPERIMENT_SLACK_FACTOR * sys.n
        return cls(horizon=T, experiments=N, seed=seed)


@dataclass(frozen=True, eq=False)
class ExperimentData:
    """
    Stacked data of N open-loop experiments with horizon T.

    Column i of X stacks x(1)..x(T), of Y stacks y(0)..y(T-1), of U
    stacks u(0)..u(T-1), and X0[:, i] is x(0) of experiment i.
    """

    n: int
    m: int
    p: int
    T: int
    N: int
    X: np.ndarray
    X0: np.ndarray
    Y: np.ndarray
    U: np.ndarray
    K_U: Subspace
    K_0: Subspace
    seed: Optional[int] = None
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_matrices(
        cls,
        X: Any,
        X0: Any,
        Y: Any,
        U: Any,
        T: int,
        seed: Optional[int] = None,
        metadata: Optional[dict] = None,
        tol: Tolerances = DEFAULT_TOLERANCES,
    ) -> "ExperimentData":
        """
        Assemble data matrices and compute the kernel bases K_U and K_0.

        Raises:
            DimensionMismatchError: If shapes are inconsistent with T
        """
        X = as_matrix(X, "X")
        X0 = as_matrix(X0, "X0")
        Y = as_matrix(Y, "Y")
        U = as_matrix(U, "U")
        n, N = X0.shape
        if T < 1:
            raise DimensionMismatchError(f"Horizon must be at least 1, got {T}")
        for name, matrix in (('X', X), ('Y', Y), ('U', U)):
            if matrix.shape[1] != N:
                raise DimensionMismatchError(f"{name} has {matrix.shape[1]} columns, expected {N}")
            if matrix.shape[0] % T:
                raise DimensionMismatchError(f"{name} row count {matrix.shape[0]} is not a multiple of T={T}")
        if X.shape[0] != n * T:
            raise DimensionMismatchError(f"X must have nT={n * T} rows, got {X.shape[0]}")
        m = U.shape[0] // T
        p = Y.shape[0] // T
        return cls(
            n=n,
            m=m,
            p=p,
            T=T,
            N=N,
            X=_frozen(X),
            X0=_frozen(X0),
            Y=_frozen(Y),
            U=_frozen(U),
            K_U=kernel_basis(U, tol),
            K_0=kernel_basis(X0, tol),
            seed=seed,
            metadata=dict(metadata or {}),
        )

    def final_state_selector(self) -> np.ndarray:
        """H = [0 ... 0 I_n], picking x(T) out of a stacked trajectory."""
        H = np.zeros((self.n, self.n * self.T))
        H[:, -self.n:] = np.eye(self.n)
        return H


@dataclass(frozen=True)
class ExcitationReport:
    """Ranks behind the persistency-of-excitation test."""

    rank: int
    required: int
    state_rank: int
    input_rank: int
    ok: bool


def simulate(sys: LtiSystem, x0: Any, u_seq: Any) -> SingleTrajectory:
    """
    Simulate the system from x0 under the input sequence.

    Args:
        sys: System
        x0: Initial state, length n
        u_seq: Inputs as an m x T array (columns are time steps); a 1-D
            array is accepted for m = 1

    Returns:
        SingleTrajectory with states x(0..T), inputs and outputs y(0..T-1)

    Raises:
        DimensionMismatchError: If x0 or the inputs do not fit the system
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape != (sys.n,):
        raise DimensionMismatchError(f"x0 must have length {sys.n}, got {x0.shape}")
    u_seq = np.asarray(u_seq, dtype=float)
    if u_seq.ndim == 1:
        if sys.m != 1:
            raise DimensionMismatchError("1-D input sequence requires a single-input system")
        u_seq = u_seq.reshape(1, -1)
    if u_seq.shape[0] != sys.m:
        raise DimensionMismatchError(f"Input sequence must have {sys.m} rows, got {u_seq.shape}")

    steps = u_seq.shape[1]
    states = np.empty((sys.n, steps + 1))
    states[:, 0] = x0
    for t in range(steps):
        states[:, t + 1] = sys.A @ states[:, t] + sys.B @ u_seq[:, t]
    outputs = sys.C @ states[:, :-1]
    return SingleTrajectory(states, u_seq, outputs)


def stacked_model_matrices(sys: LtiSystem, T: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Build O_T^X, F_T^X, O_T^Y, F_T^Y so that X_T = O^X x0 + F^X U_T and
    Y_T = O^Y x0 + F^Y U_T.
    """
    n, m, p = sys.n, sys.m, sys.p
    powers = [np.eye(n)]
    for _ in range(T):
        powers.append(sys.A @ powers[-1])

    O_X = np.vstack(powers[1 : T + 1])
    O_Y = np.vstack([sys.C @ powers[k] for k in range(T)])
    F_X = np.zeros((n * T, m * T))
    F_Y = np.zeros((p * T, m * T))
    for row in range(T):
        for col in range(row + 1):
            # x(row+1) depends on u(col) through A^(row-col) B
            F_X[row * n : (row + 1) * n, col * m : (col + 1) * m] = powers[row - col] @ sys.B
        for col in range(row):
            F_Y[row * p : (row + 1) * p, col * m : (col + 1) * m] = sys.C @ powers[row - 1 - col] @ sys.B
    return O_X, F_X, O_Y, F_Y


def collect(sys: LtiSystem, cfg: ExperimentConfig, tol: Tolerances = DEFAULT_TOLERANCES) -> ExperimentData:
    """
    Run N open-loop experiments with Gaussian initial states and inputs.

    Each experiment draws from its own stream spawned from cfg.seed, so
    the result does not depend on evaluation order.

    Returns:
        ExperimentData assembled column by column
    """
    T, N = cfg.horizon, cfg.experiments
    streams = np.random.SeedSequence(cfg.seed).spawn(N)

    X = np.empty((sys.n * T, N))
    X0 = np.empty((sys.n, N))
    Y = np.empty((sys.p * T, N))
    U = np.empty((sys.m * T, N))
    for i, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        x0 = cfg.state_scale * rng.standard_normal(sys.n)
        inputs = cfg.input_scale * rng.standard_normal((sys.m, T))
        trajectory = simulate(sys, x0, inputs)
        X[:, i] = trajectory.stacked_states()
        X0[:, i] = x0
        Y[:, i] = trajectory.stacked_outputs()
        U[:, i] = trajectory.stacked_inputs()

    logger.info(f"Collected {N} experiments with horizon {T} from {sys}")
    return ExperimentData.from_matrices(X, X0, Y, U, T=T, seed=cfg.seed, tol=tol)


def collect_trajectory(
    sys: LtiSystem,
    length: Optional[int] = None,
    seed: int = 0,
    input_scale: float = Config.INPUT_SCALE,
    state_scale: float = Config.STATE_SCALE,
) -> SingleTrajectory:
    """
    Record one random open-loop trajectory (default length 2(n+m)).
    """
    length = 2 * (sys.n + sys.m) if length is None else length
    if length < 1:
        raise ValueError(f"Trajectory length must be at least 1, got {length}")
    rng = np.random.default_rng(seed)
    x0 = state_scale * rng.standard_normal(sys.n)
    inputs = input_scale * rng.standard_normal((sys.m, length))
    return simulate(sys, x0, inputs)


def excitation_ranks(data: ExperimentData, tol: Tolerances = DEFAULT_TOLERANCES) -> ExcitationReport:
    """
    Ranks of [X0; U], X0 K_U and U K_0 against their required values.
    """
    required = data.n + data.m * data.T
    rank = rank_tol(np.vstack([data.X0, data.U]), tol)
    state_rank = rank_tol(data.X0 @ data.K_U.basis, tol)
    input_rank = rank_tol(data.U @ data.K_0.basis, tol)
    ok = rank == required and state_rank == data.n and input_rank == data.m * data.T
    return ExcitationReport(rank=rank, required=required, state_rank=state_rank, input_rank=input_rank, ok=ok)


def is_persistently_exciting(data: ExperimentData, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """rank [X0; U] = n + mT, with X0 K_U and U K_0 of full row rank."""
    report = excitation_ranks(data, tol)
    if not report.ok:
        logger.debug(f"Persistency of excitation fails: {report}")
    return report.ok


def consensus_example() -> LtiSystem:
    """
    Follower dynamics of the 14-agent leader-follower consensus network.

    Leaders (nodes 12, 13, 14) act as the three inputs; nodes 4 and 11
    are the monitors measured by C.
    """
    A = np.array([
        [.8, .2, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        [.2, .4, .2, 0, 0, 0, 0, 0, 0, 0, 0],
        [0, .2, .6, 0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, .6, .2, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, .2, .4, .2, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, .2, .6, 0, .2, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, .8, .2, 0, 0, 0],
        [0, 0, 0, 0, 0, .2, .2, .2, 0, 0, .2],
        [0, 0, 0, 0, 0, 0, 0, 0, .6, .2, 0],
        [0, 0, 0, 0, 0, 0, 0, 0, .2, .6, 0],
        [0, 0, 0, 0, 0, 0, 0, .2, 0, 0, .8],
    ])
    B_transposed = np.array([
        [0, .2, 0, .2, .2, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, .2, .2, .2, 0],
        [0, 0, .2, 0, 0, 0, 0, 0, 0, 0, 0],
    ])
    C = np.zeros((2, 11))
    C[0, 3] = 1.0
    C[1, 10] = 1.0
    return LtiSystem(A, B_transposed.T, C)
