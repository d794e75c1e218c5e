"""
Model-based reference computations of V*, S*, R*, friends and invariant zeros.

These are the classical recursive algorithms of the geometric approach.
They need (A, B, C) and serve as the oracle against which the
data-driven formulas are checked.
"""
import logging
from typing import List, Optional

import numpy as np
from scipy import linalg
from scipy.optimize import linear_sum_assignment

from .exceptions import DegenerateSystemError, DimensionMismatchError, NotControlledInvariantError
from .lti_model import LtiSystem
from .subspace_core import (
    DEFAULT_TOLERANCES,
    Subspace,
    Tolerances,
    image_basis,
    image_under,
    intersect,
    kernel_basis,
    projector_residual,
    subspace_sum,
)

logger = logging.getLogger(__name__)


def preimage(A: np.ndarray, W: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """
    Set preimage {x : A x ∈ W}.

    Computed as the x-block of Ker [A, -W] so that singular A needs no inverse.
    """
    n = A.shape[1]
    if A.shape[0] != W.ambient_dim:
        raise DimensionMismatchError(f"Map into R^{A.shape[0]} cannot target R^{W.ambient_dim}")
    stacked = kernel_basis(np.hstack([A, -W.basis]), tol)
    return image_basis(stacked.basis[:n, :], tol)


def vstar_sequence(sys: LtiSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> List[Subspace]:
    """
    Iterates V_0 = Ker C, V_i = A^{-1}(V_{i-1} + Im B) ∩ Ker C up to the fixed point.

    The last element is V*. At most n + 1 subspaces are returned.
    """
    ker_c = sys.ker_c(tol)
    im_b = image_basis(sys.B, tol)
    sequence = [ker_c]
    for i in range(1, sys.n + 1):
        current = intersect(preimage(sys.A, subspace_sum(sequence[-1], im_b, tol), tol), ker_c, tol)
        logger.debug(f"V_{i}: dim {current.dim}")
        sequence.append(current)
        if current.dim == sequence[-2].dim:
            break
    return sequence


def sstar_sequence(sys: LtiSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> List[Subspace]:
    """
    Iterates S_1 = Im B, S_i = A(S_{i-1} ∩ Ker C) + Im B up to the fixed point.

    The last element is S*.
    """
    ker_c = sys.ker_c(tol)
    im_b = image_basis(sys.B, tol)
    sequence = [im_b]
    for i in range(2, sys.n + 2):
        current = subspace_sum(image_under(sys.A, intersect(sequence[-1], ker_c, tol), tol), im_b, tol)
        logger.debug(f"S_{i}: dim {current.dim}")
        sequence.append(current)
        if current.dim == sequence[-2].dim:
            break
    return sequence


def vstar_model(sys: LtiSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """Largest (A, Im B)-controlled invariant subspace contained in Ker C."""
    vstar = vstar_sequence(sys, tol)[-1]
    logger.info(f"Model V*: dim {vstar.dim} in R^{sys.n}")
    return vstar


def sstar_model(sys: LtiSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """Smallest (A, Ker C)-conditioned invariant subspace containing Im B."""
    sstar = sstar_sequence(sys, tol)[-1]
    logger.info(f"Model S*: dim {sstar.dim} in R^{sys.n}")
    return sstar


def rstar_model(sys: LtiSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """R* = V* ∩ S*."""
    return intersect(vstar_model(sys, tol), sstar_model(sys, tol), tol)


def is_controlled_invariant(sys: LtiSystem, V: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """A V ⊆ V + Im B."""
    return projector_residual(subspace_sum(V, image_basis(sys.B, tol), tol), sys.A @ V.basis) <= tol.residual_abs


def is_conditioned_invariant(sys: LtiSystem, S: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """A (S ∩ Ker C) ⊆ S."""
    restricted = intersect(S, sys.ker_c(tol), tol)
    return projector_residual(S, sys.A @ restricted.basis) <= tol.residual_abs


def friend_model(
    sys: LtiSystem,
    V: Subspace,
    tol: Tolerances = DEFAULT_TOLERANCES,
    complement_gain: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Feedback F with (A + BF) V ⊆ V.

    For the basis V, solves A V + B F_V = V C_V in the least-squares sense
    through [B, -V] and sets F = F_V V^T + complement_gain (I - V V^T).

    Args:
        sys: System
        V: Candidate controlled invariant subspace
        tol: Tolerances
        complement_gain: Gain applied on the orthogonal complement of V
            (zero by default)

    Returns:
        np.ndarray: m x n gain

    Raises:
        NotControlledInvariantError: If the invariance residual exceeds residual_abs
    """
    if V.ambient_dim != sys.n:
        raise DimensionMismatchError(f"Subspace lives in R^{V.ambient_dim}, system has n={sys.n}")
    complement = np.zeros((sys.m, sys.n)) if complement_gain is None else np.asarray(complement_gain, dtype=float)
    off_v = complement @ (np.eye(sys.n) - V.projector())
    if V.is_trivial:
        return off_v

    solution, *_ = linalg.lstsq(np.hstack([sys.B, -V.basis]), -sys.A @ V.basis)
    F = solution[: sys.m, :] @ V.basis.T + off_v

    residual = projector_residual(V, (sys.A + sys.B @ F) @ V.basis)
    if residual > tol.residual_abs:
        raise NotControlledInvariantError(
            f"Subspace of dim {V.dim} is not controlled invariant (residual {residual:.3e})"
        )
    return F


def invariant_zeros_model(sys: LtiSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """
    Invariant zeros as eigenvalues of (A + BF) restricted to V*.

    Raises:
        DegenerateSystemError: If R* is nontrivial
    """
    vstar = vstar_model(sys, tol)
    rstar = intersect(vstar, sstar_model(sys, tol), tol)
    if not rstar.is_trivial:
        raise DegenerateSystemError(f"R* has dimension {rstar.dim}; zeros are not isolated")
    if vstar.is_trivial:
        return np.zeros(0, dtype=complex)

    F = friend_model(sys, vstar, tol)
    restricted = vstar.basis.T @ (sys.A + sys.B @ F) @ vstar.basis
    return sort_zeros(np.linalg.eigvals(restricted))


def sort_zeros(zeros: np.ndarray) -> np.ndarray:
    """Order a zero set by real part, then imaginary part."""
    zeros = np.asarray(zeros, dtype=complex).ravel()
    return zeros[np.lexsort((zeros.imag, zeros.real))]


def zero_sets_match(first: np.ndarray, second: np.ndarray, atol: float = 1e-6) -> bool:
    """
    Multiset equality of two zero sets within atol.

    Elements are paired by an optimal assignment on their distances,
    which is insensitive to how near-equal real parts happen to sort.
    """
    first = np.asarray(first, dtype=complex).ravel()
    second = np.asarray(second, dtype=complex).ravel()
    if first.size != second.size:
        return False
    if first.size == 0:
        return True
    distances = np.abs(first[:, None] - second[None, :])
    rows, cols = linear_sum_assignment(distances)
    return bool(np.max(distances[rows, cols]) <= atol)
