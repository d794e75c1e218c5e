"""
Data-driven geometric control.

Computes V*, S*, R*, subspace-confining feedback gains and invariant
zeros of an unknown system from experiment data alone. No function in
this module touches (A, B, C).
"""
import logging
from dataclasses import dataclass
from typing import Any, NamedTuple, Optional, Tuple

import numpy as np

from .exceptions import (
    BlockTriangularizationError,
    DegenerateSystemError,
    DimensionMismatchError,
    HorizonTooShortError,
    NotPersistentlyExcitingError,
    ResidualToleranceError,
    TrajectoryNotInformativeError,
)
from .geometric_oracle import sort_zeros
from .lti_model import ExperimentData, SingleTrajectory, excitation_ranks
from .subspace_core import (
    DEFAULT_TOLERANCES,
    Subspace,
    Tolerances,
    image_basis,
    intersect,
    kernel_basis,
    kron,
    orthogonal_complement,
    pinv,
    projector_residual,
    rank_tol,
    sequential_kernel,
)

logger = logging.getLogger(__name__)

# smallest admissible norm of the state direction in a zero witness
WITNESS_MIN_NORM = 1e-8


@dataclass(frozen=True, eq=False)
class TrajectoryCoefficients:
    """Combination weights: x0 = X0 K_U alpha, U_T = U K_0 beta."""

    alpha: np.ndarray
    beta: np.ndarray


class ReconstructedTrajectory(NamedTuple):
    """A trajectory rebuilt from data: free plus forced response."""

    coefficients: TrajectoryCoefficients
    states: np.ndarray
    outputs: np.ndarray


@dataclass(frozen=True, eq=False)
class ZeroCandidate:
    """Outcome of the invariant-zero membership test for one z."""

    z: complex
    kernel_dim: int
    witness: Optional[Tuple[np.ndarray, np.ndarray]] = None

    @property
    def is_zero(self) -> bool:
        if self.kernel_dim == 0 or self.witness is None:
            return False
        _, v = self.witness
        return bool(np.linalg.norm(v) > WITNESS_MIN_NORM)


@dataclass(frozen=True, eq=False)
class FeedbackSolution:
    """
    Closed-loop representation A + BF = X_{1,T} G built from one trajectory.

    G = X_{0,T}^† + K (gamma + complement_gamma) and F = U_{0,T} G.
    """

    F: np.ndarray
    G: np.ndarray
    K: np.ndarray
    gamma: np.ndarray
    complement_gamma: np.ndarray
    residual: float
    closed_loop: np.ndarray


def _norm(M: np.ndarray) -> Optional[float]:
    # cutoffs for products of M with orthonormal bases are taken against M itself
    norm = float(np.linalg.norm(M, 2)) if M.size else 0.0
    return norm if norm > 0.0 else None


def require_informative_data(data: ExperimentData, tol: Tolerances = DEFAULT_TOLERANCES) -> None:
    """
    Check the standing assumptions of the data-driven formulas.

    Raises:
        HorizonTooShortError: If T < n
        NotPersistentlyExcitingError: If the rank condition fails
    """
    if data.T < data.n:
        raise HorizonTooShortError(f"Horizon T={data.T} is shorter than n={data.n}")
    report = excitation_ranks(data, tol)
    if not report.ok:
        raise NotPersistentlyExcitingError(
            f"rank [X0; U] = {report.rank}, required {report.required} "
            f"(X0 K_U rank {report.state_rank}, U K_0 rank {report.input_rank})"
        )


def reconstruct_trajectory(
    data: ExperimentData,
    x0: Any,
    u_seq: Any,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> ReconstructedTrajectory:
    """
    Express the trajectory from (x0, u_seq) as a combination of the experiments.

    Args:
        data: Persistently exciting experiment data
        x0: Initial state, length n
        u_seq: Inputs as an m x T array or a stacked vector of length mT
        tol: Tolerances

    Returns:
        ReconstructedTrajectory with stacked states x(1..T) and outputs y(0..T-1)

    Raises:
        NotPersistentlyExcitingError: If the rank condition fails
    """
    report = excitation_ranks(data, tol)
    if not report.ok:
        raise NotPersistentlyExcitingError(f"rank [X0; U] = {report.rank}, required {report.required}")

    x0 = np.asarray(x0, dtype=float).reshape(-1)
    u_seq = np.asarray(u_seq, dtype=float)
    stacked_u = u_seq.flatten(order='F') if u_seq.ndim == 2 else u_seq.reshape(-1)
    if x0.size != data.n or stacked_u.size != data.m * data.T:
        raise DimensionMismatchError(
            f"Expected x0 of length {data.n} and {data.m * data.T} stacked inputs, "
            f"got {x0.size} and {stacked_u.size}"
        )

    free = data.X0 @ data.K_U.basis
    forced = data.U @ data.K_0.basis
    alpha = pinv(free, tol) @ x0
    beta = pinv(forced, tol) @ stacked_u

    mismatch = max(np.linalg.norm(free @ alpha - x0), np.linalg.norm(forced @ beta - stacked_u))
    if mismatch > tol.residual_abs * max(1.0, np.linalg.norm(x0), np.linalg.norm(stacked_u)):
        raise NotPersistentlyExcitingError(f"Data cannot reproduce the requested trajectory (mismatch {mismatch:.3e})")

    states = data.X @ data.K_U.basis @ alpha + data.X @ data.K_0.basis @ beta
    outputs = data.Y @ data.K_U.basis @ alpha + data.Y @ data.K_0.basis @ beta
    return ReconstructedTrajectory(TrajectoryCoefficients(alpha, beta), states, outputs)


def output_nulling_coefficients(data: ExperimentData, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """
    Basis of Ker [Y K_U, Y K_0]: the (alpha, beta) of zero-output trajectories.

    The kernel is narrowed one output sample at a time so that a direction
    is dropped as soon as any single y(t) sees it.
    """
    stacked = np.hstack([data.Y @ data.K_U.basis, data.Y @ data.K_0.basis])
    return sequential_kernel(stacked, data.p, tol, scale=_norm(data.Y)).basis


def zero_state_nulling_coefficients(data: ExperimentData, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Basis of Ker (Y K_0): the beta of zero-output trajectories from the origin."""
    return sequential_kernel(data.Y @ data.K_0.basis, data.p, tol, scale=_norm(data.Y)).basis


def vstar_dd(data: ExperimentData, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """
    V* = [X0 K_U, 0] Ker [Y K_U, Y K_0].

    V* is the set of initial states from which some input keeps the output
    at zero over the horizon. It is evaluated backward one sample at a
    time on the first slice of the data, whose columns (x(0), u(0)) span
    R^{n+m} under persistency of excitation:

        V_0 = R^n,  V_{k+1} = X0 Ker [Y_0; (I - P_{V_k}) X_1]

    with Y_0 = y(0) and X_1 = x(1) rows of the data. The sequence is
    nonincreasing and reaches its limit within n + 1 steps. Each rank
    decision involves a single step of the system, never powers of its
    zeros.

    Raises:
        HorizonTooShortError: If T < n
        NotPersistentlyExcitingError: If the rank condition fails
    """
    require_informative_data(data, tol)
    current_x = data.X0
    next_x = data.X[: data.n]
    output = data.Y[: data.p]
    scale = _norm(np.vstack([output, next_x]))

    vstar = Subspace.full(data.n)
    for step in range(data.n + 1):
        escape = next_x - vstar.basis @ (vstar.basis.T @ next_x)
        coefficients = kernel_basis(np.vstack([output, escape]), tol, scale=scale)
        refined = image_basis(current_x @ coefficients.basis, tol, scale=_norm(current_x))
        logger.debug(f"V* step {step}: dim {vstar.dim} -> {refined.dim}")
        converged = refined.dim >= vstar.dim
        vstar = refined
        if converged or vstar.is_trivial:
            break

    logger.info(f"Data-driven V*: dim {vstar.dim} in R^{data.n}")
    return vstar


def sstar_dd(data: ExperimentData, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """
    S* = H X K_0 Ker (Y K_0), H selecting the final state x(T).

    Raises:
        HorizonTooShortError: If T < n
        NotPersistentlyExcitingError: If the rank condition fails
    """
    require_informative_data(data, tol)
    beta = zero_state_nulling_coefficients(data, tol)
    final_states = data.final_state_selector() @ data.X @ data.K_0.basis @ beta
    sstar = image_basis(final_states, tol, scale=_norm(data.X))
    logger.info(f"Data-driven S*: dim {sstar.dim} in R^{data.n}")
    return sstar


def rstar_dd(data: ExperimentData, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """R* = V* ∩ S* from data."""
    rstar = intersect(vstar_dd(data, tol), sstar_dd(data, tol), tol)
    logger.info(f"Data-driven R*: dim {rstar.dim} in R^{data.n}")
    return rstar


def closed_loop_solution(
    traj: SingleTrajectory,
    V: Subspace,
    tol: Tolerances = DEFAULT_TOLERANCES,
    damp_complement: bool = True,
) -> FeedbackSolution:
    """
    Solve for G = X_{0,T}^† + K gamma with gamma chosen so that X_{1,T} G maps V into V.

    gamma = -((I - V V^†) X_{1,T} K)^† (I - V V^†) X_{1,T} X_{0,T}^† V V^†

    Any gamma acting on V^⊥ leaves the invariance of V untouched. With
    damp_complement, the V^⊥ part is chosen the same way, which makes the
    V^⊥ block of the closed loop (I - Π) P A P with P = I - V V^† and Π
    the projector onto Im P B. Its norm is at most ||A||. Without it that
    block is whatever the minimum-norm pseudo-inverse gives.

    Raises:
        TrajectoryNotInformativeError: If [U_{0,T}; X_{0,T}] lacks full row rank
    """
    n = traj.X0.shape[0]
    m = traj.U0.shape[0]
    if V.ambient_dim != n:
        raise DimensionMismatchError(f"Subspace lives in R^{V.ambient_dim}, trajectory in R^{n}")
    if rank_tol(np.vstack([traj.U0, traj.X0]), tol) < n + m:
        raise TrajectoryNotInformativeError(
            f"[U_0,T; X_0,T] has rank below {n + m} on a trajectory of length {traj.length}"
        )

    X0_pinv = pinv(traj.X0, tol)
    K = kernel_basis(traj.X0, tol).basis
    complement = np.zeros((n, n)) if V.is_full else np.eye(n) - V.projector()

    X1K = traj.X1 @ K
    scale = max(float(np.linalg.norm(X1K, 2)), np.finfo(float).tiny)
    steering = pinv(complement @ X1K, tol, scale=scale)
    gamma = -steering @ complement @ traj.X1 @ X0_pinv @ V.projector()
    if damp_complement:
        complement_gamma = -steering @ complement @ traj.X1 @ X0_pinv @ complement
    else:
        complement_gamma = np.zeros_like(gamma)

    G = X0_pinv + K @ (gamma + complement_gamma)
    closed_loop = traj.X1 @ G
    residual = projector_residual(V, closed_loop @ V.basis)
    return FeedbackSolution(
        F=traj.U0 @ G,
        G=G,
        K=K,
        gamma=gamma,
        complement_gamma=complement_gamma,
        residual=residual,
        closed_loop=closed_loop,
    )


def feedback_dd(
    traj: SingleTrajectory,
    V: Subspace,
    tol: Tolerances = DEFAULT_TOLERANCES,
    damp_complement: bool = True,
) -> np.ndarray:
    """
    Data-driven gain F = U_{0,T}(X_{0,T}^† + K gamma) with (A + BF) V ⊆ V.

    Args:
        traj: Sufficiently informative state/input record
        V: Controlled invariant subspace of the unknown system
        tol: Tolerances
        damp_complement: Also shape the closed loop on the orthogonal complement of V

    Returns:
        np.ndarray: m x n gain

    Raises:
        TrajectoryNotInformativeError: If [U_{0,T}; X_{0,T}] lacks full row rank
        ResidualToleranceError: If V is not invariant under the resulting closed loop
    """
    solution = closed_loop_solution(traj, V, tol, damp_complement)
    if solution.residual > tol.residual_abs:
        raise ResidualToleranceError(
            f"Invariance residual {solution.residual:.3e} exceeds {tol.residual_abs:.1e}; "
            f"V may not be controlled invariant"
        )
    logger.info(f"Data-driven friend of a {V.dim}-dimensional subspace, residual {solution.residual:.2e}")
    return solution.F


def zeros_dd(traj: SingleTrajectory, V: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """
    Invariant zeros as eigenvalues of the V-block of X_{1,T} G.

    With T_hat = [V, V_perp] orthonormal, T_hat^{-1} (X_{1,T} G) T_hat is
    block upper triangular and its top-left block carries the zeros.
    R* must be trivial; the caller checks this on the experiment data.

    Returns:
        np.ndarray: Complex zeros sorted by (real, imag)

    Raises:
        BlockTriangularizationError: If the lower-left block exceeds residual_abs
    """
    if V.is_trivial:
        return np.zeros(0, dtype=complex)

    solution = closed_loop_solution(traj, V, tol)
    T_hat = np.hstack([V.basis, orthogonal_complement(V, tol).basis])
    transformed = np.linalg.solve(T_hat, solution.closed_loop @ T_hat)

    r = V.dim
    lower_left = transformed[r:, :r]
    leakage = float(np.linalg.norm(lower_left, 2)) if lower_left.size else 0.0
    if leakage > tol.residual_abs:
        raise BlockTriangularizationError(f"Lower-left block norm {leakage:.3e} exceeds {tol.residual_abs:.1e}")

    zeros = sort_zeros(np.linalg.eigvals(transformed[:r, :r]))
    logger.info(f"Data-driven invariant zeros: {np.round(zeros, 6).tolist()}")
    return zeros


def zero_membership_dd(
    data: ExperimentData,
    V: Subspace,
    z: complex,
    tol: Tolerances = DEFAULT_TOLERANCES,
    rstar: Optional[Subspace] = None,
) -> ZeroCandidate:
    """
    Test whether z is an invariant zero using the experiment data.

    z is a zero iff some v = V c != 0 generates a data-compatible
    trajectory x(t) = z^t v, t = 0..T. With S the stacked trajectory
    matrix [X0; X] and Q an orthonormal basis of Im S, this is a
    nontrivial kernel of (I - Q Q^H) (zeta ⊗ I_n)^T V where
    zeta = [1 z ... z^T]. The witness (w, v) satisfies S w = (zeta ⊗ I_n)^T v.

    kernel_dim is the dimension of that projected kernel, i.e. the number
    of independent directions c in V, not the kernel dimension of the
    stacked matrix [S, -(zeta ⊗ I_n)^T V]. The latter also counts every
    w in Ker S and is positive for almost any z.

    Args:
        data: Persistently exciting data with T >= n
        V: Basis of V* computed from the same data
        z: Candidate zero
        tol: Tolerances
        rstar: Precomputed R*; recomputed from data when omitted

    Raises:
        DegenerateSystemError: If R* is nontrivial
    """
    require_informative_data(data, tol)
    if V.ambient_dim != data.n:
        raise DimensionMismatchError(f"Subspace lives in R^{V.ambient_dim}, data in R^{data.n}")
    rstar = rstar_dd(data, tol) if rstar is None else rstar
    if not rstar.is_trivial:
        raise DegenerateSystemError(f"R* has dimension {rstar.dim}; zeros are not isolated")

    z = complex(z)
    if V.is_trivial:
        return ZeroCandidate(z=z, kernel_dim=0)

    trajectories = np.vstack([data.X0, data.X])
    trajectory_space = image_basis(trajectories, tol).basis
    powers = z ** np.arange(data.T + 1)
    geometric = kron(powers.reshape(-1, 1), np.eye(data.n)) @ V.basis
    outside = geometric - trajectory_space @ (trajectory_space.conj().T @ geometric)

    kernel = kernel_basis(outside, tol, scale=float(np.linalg.norm(geometric, 2)))
    if kernel.is_trivial:
        return ZeroCandidate(z=z, kernel_dim=0)

    v = V.basis @ kernel.basis[:, 0]
    w = pinv(trajectories, tol) @ (kron(powers.reshape(-1, 1), np.eye(data.n)) @ v)
    logger.debug(f"z={z:.6g} admits a {kernel.dim}-dimensional family of geometric trajectories")
    return ZeroCandidate(z=z, kernel_dim=kernel.dim, witness=(w, v))
