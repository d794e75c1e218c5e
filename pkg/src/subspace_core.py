"""
Tolerance-aware dense linear algebra and subspace operations.

Subspaces are carried as an ambient dimension plus an orthonormal basis
matrix. The trivial subspace {0} has an n x 0 basis. All numerical rank
decisions use the same relative cutoff

    sigma_i > rank_rel * max(rows, cols) * sigma_max

so that kernels, images and pseudo-inverses agree with each other.
"""
import logging
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
from scipy import linalg

from .exceptions import DimensionMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by every operation."""

    rank_rel: float = 1e-10
    subspace_eq: float = 1e-8
    residual_abs: float = 1e-8

    def __post_init__(self):
        for name in ('rank_rel', 'subspace_eq', 'residual_abs'):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"Tolerance {name} must be finite and strictly positive, got {value}")

    def rcond(self, shape: tuple) -> float:
        """Relative cutoff (w.r.t. sigma_max) for a matrix of the given shape."""
        return self.rank_rel * max(shape)


DEFAULT_TOLERANCES = Tolerances()


def as_matrix(value: Any, name: str = "matrix", dtype=np.float64) -> np.ndarray:
    """
    Convert a value to a finite 2-D array.

    Args:
        value: Array-like input
        name: Name used in error messages
        dtype: Target dtype (complex allowed for the zero computations)

    Returns:
        np.ndarray: 2-D array

    Raises:
        ValueError: If the input is not 2-D or contains NaN/Inf
    """
    matrix = np.asarray(value, dtype=dtype)
    if matrix.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError(f"{name} contains non-finite entries")
    return matrix


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of R^n (or C^n) given by an orthonormal basis."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis)
        if basis.ndim != 2 or basis.shape[0] != self.ambient_dim:
            raise DimensionMismatchError(
                f"Basis shape {basis.shape} does not match ambient dimension {self.ambient_dim}"
            )
        if basis.shape[1] > self.ambient_dim:
            raise DimensionMismatchError("Basis has more columns than the ambient dimension")
        basis = basis.copy()
        basis.setflags(write=False)
        object.__setattr__(self, 'basis', basis)

    @classmethod
    def trivial(cls, n: int) -> "Subspace":
        """The zero subspace of R^n."""
        return cls(n, np.zeros((n, 0)))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        """The whole space R^n."""
        return cls(n, np.eye(n))

    @classmethod
    def span(cls, vectors: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> "Subspace":
        """Subspace spanned by the columns of a matrix."""
        return image_basis(as_matrix(vectors, "vectors"), tol)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def is_trivial(self) -> bool:
        return self.dim == 0

    @property
    def is_full(self) -> bool:
        return self.dim == self.ambient_dim

    def projector(self) -> np.ndarray:
        """Orthogonal projector V V^H onto the subspace."""
        return self.basis @ self.basis.conj().T

    def distance(self, vectors: Any) -> np.ndarray:
        """Euclidean distance of each column (or a single vector) to the subspace."""
        vectors = np.asarray(vectors)
        single = vectors.ndim == 1
        columns = vectors.reshape(self.ambient_dim, -1)
        residual = columns - self.basis @ (self.basis.conj().T @ columns)
        distances = np.linalg.norm(residual, axis=0)
        return distances[0] if single else distances

    def contains(self, other: Any, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        """Whether a subspace (or the columns of a matrix) lies inside this subspace."""
        vectors = other.basis if isinstance(other, Subspace) else np.asarray(other)
        return projector_residual(self, vectors) <= tol.residual_abs

    def to_dict(self) -> dict:
        return {
            'ambient_dim': self.ambient_dim,
            'dim': self.dim,
            'basis': np.real_if_close(self.basis).ravel().tolist(),
        }

    def __repr__(self) -> str:
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"


def _check_same_ambient(V1: Subspace, V2: Subspace) -> None:
    if V1.ambient_dim != V2.ambient_dim:
        raise DimensionMismatchError(
            f"Subspaces live in R^{V1.ambient_dim} and R^{V2.ambient_dim}"
        )


def _relative_cutoff(M: np.ndarray, tol: Tolerances, scale: Optional[float]) -> float:
    """
    rcond for scipy relative to sigma_max(M).

    With scale given, the cutoff is rank_rel * max(rows, cols) * scale
    instead, for matrices that are projections of a reference of norm
    scale and may vanish entirely.
    """
    if scale is None:
        return tol.rcond(M.shape)
    sigma_max = float(np.linalg.norm(M, 2))
    if sigma_max == 0.0:
        return 1.0
    return tol.rcond(M.shape) * scale / sigma_max


def rank_tol(M: Any, tol: Tolerances = DEFAULT_TOLERANCES, scale: Optional[float] = None) -> int:
    """
    Numerical rank with the shared relative cutoff.

    Args:
        M: Matrix (real or complex)
        tol: Tolerances
        scale: Reference norm replacing sigma_max in the cutoff

    Returns:
        int: Number of singular values above rank_rel * max(rows, cols) * sigma_max
    """
    M = np.asarray(M)
    if M.size == 0:
        return 0
    singular_values = linalg.svdvals(M)
    reference = singular_values[0] if scale is None else scale
    cutoff = tol.rcond(M.shape) * reference
    rank = int(np.sum(singular_values > cutoff))
    if rank < len(singular_values) and singular_values[rank] > 1e-2 * cutoff:
        logger.warning(
            f"Singular value {singular_values[rank]:.3e} is close to the rank cutoff {cutoff:.3e}"
        )
    return rank


def kernel_basis(M: Any, tol: Tolerances = DEFAULT_TOLERANCES, scale: Optional[float] = None) -> Subspace:
    """
    Orthonormal basis of the right null space of M.

    Args:
        M: Matrix with cols(M) = ambient dimension of the result
        tol: Tolerances
        scale: Reference norm replacing sigma_max in the cutoff

    Returns:
        Subspace: Ker(M)
    """
    M = np.asarray(M)
    rows, cols = M.shape
    if rows == 0 or cols == 0 or not np.any(M):
        return Subspace(cols, np.eye(cols, dtype=M.dtype if np.iscomplexobj(M) else float))
    return Subspace(cols, linalg.null_space(M, rcond=_relative_cutoff(M, tol, scale)))


def sequential_kernel(
    M: Any,
    block_rows: int,
    tol: Tolerances = DEFAULT_TOLERANCES,
    scale: Optional[float] = None,
) -> Subspace:
    """
    Ker(M) computed one block of rows at a time.

    The rows of M are split into consecutive blocks of block_rows rows.
    Each block restricts the current orthonormal kernel basis Z to
    Ker(M_k Z), with every rank decision taken against the same absolute
    cutoff rank_rel * max(rows, cols) * scale (scale defaults to
    sigma_max(M)). For block lower triangular M, a direction is then
    rejected as soon as one block excites it, even when the whole stack
    maps it to something tiny.

    Raises:
        DimensionMismatchError: If the row count is not a multiple of block_rows
    """
    M = np.asarray(M)
    rows, cols = M.shape
    if block_rows < 1 or rows % block_rows:
        raise DimensionMismatchError(f"{rows} rows cannot be split into blocks of {block_rows}")
    if scale is None:
        scale = float(np.linalg.norm(M, 2)) if M.size else 0.0
    cutoff = tol.rcond(M.shape) * scale

    Z = np.eye(cols, dtype=M.dtype if np.iscomplexobj(M) else float)
    for start in range(0, rows, block_rows):
        if Z.shape[1] == 0:
            break
        block = M[start : start + block_rows] @ Z
        if not np.any(block):
            continue
        _, singular_values, vh = linalg.svd(block)
        rank = int(np.sum(singular_values > cutoff))
        Z = Z @ vh[rank:].conj().T
    return Subspace(cols, Z)


def image_basis(M: Any, tol: Tolerances = DEFAULT_TOLERANCES, scale: Optional[float] = None) -> Subspace:
    """
    Orthonormal basis of the column space of M.

    Args:
        M: Matrix
        tol: Tolerances
        scale: Reference norm replacing sigma_max in the cutoff

    Returns:
        Subspace: Im(M), of dimension rank_tol(M)
    """
    M = np.asarray(M)
    rows, cols = M.shape
    if rows == 0 or cols == 0 or not np.any(M):
        return Subspace(rows, np.zeros((rows, 0), dtype=M.dtype))
    return Subspace(rows, linalg.orth(M, rcond=_relative_cutoff(M, tol, scale)))


def intersect(V1: Subspace, V2: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """
    Intersection V1 ∩ V2 via the kernel of [B1, -B2].

    Raises:
        DimensionMismatchError: If the ambient dimensions differ
    """
    _check_same_ambient(V1, V2)
    if V1.is_trivial or V2.is_trivial:
        return Subspace.trivial(V1.ambient_dim)
    coefficients = kernel_basis(np.hstack([V1.basis, -V2.basis]), tol)
    return image_basis(V1.basis @ coefficients.basis[: V1.dim, :], tol)


def subspace_sum(V1: Subspace, V2: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """
    Sum V1 + V2.

    Raises:
        DimensionMismatchError: If the ambient dimensions differ
    """
    _check_same_ambient(V1, V2)
    return image_basis(np.hstack([V1.basis, V2.basis]), tol)


def orthogonal_complement(V: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """Orthogonal complement, computed as Ker(V^H)."""
    if V.is_trivial:
        return Subspace.full(V.ambient_dim)
    return kernel_basis(V.basis.conj().T, tol)


def image_under(M: Any, V: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> Subspace:
    """Image M·V of a subspace under a linear map."""
    M = np.asarray(M)
    if M.shape[1] != V.ambient_dim:
        raise DimensionMismatchError(f"Map with {M.shape[1]} columns applied to R^{V.ambient_dim}")
    return image_basis(M @ V.basis, tol)


def projector_residual(V: Subspace, M: Any) -> float:
    """Spectral norm of (I - V V^H) M, the distance of Im(M) from V."""
    M = np.asarray(M).reshape(V.ambient_dim, -1)
    if M.shape[1] == 0:
        return 0.0
    residual = M - V.basis @ (V.basis.conj().T @ M)
    return float(np.linalg.norm(residual, 2))


def principal_angle_max(V1: Subspace, V2: Subspace) -> float:
    """
    Largest principal angle between two subspaces.

    Returns 0 when both are trivial and pi/2 when the dimensions differ,
    since the larger subspace then holds a direction orthogonal to the
    smaller one.

    Raises:
        DimensionMismatchError: If the ambient dimensions differ
    """
    _check_same_ambient(V1, V2)
    if V1.dim != V2.dim:
        return float(np.pi / 2)
    if V1.is_trivial:
        return 0.0
    return float(np.max(linalg.subspace_angles(V1.basis, V2.basis)))


def subspaces_equal(V1: Subspace, V2: Subspace, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
    """Equal dimension and largest principal angle within subspace_eq."""
    return V1.dim == V2.dim and principal_angle_max(V1, V2) <= tol.subspace_eq


def pinv(M: Any, tol: Tolerances = DEFAULT_TOLERANCES, scale: Optional[float] = None) -> np.ndarray:
    """
    Moore-Penrose pseudo-inverse with the shared rank cutoff.

    With scale given, singular values below rank_rel * max(rows, cols) * scale
    are dropped, so a matrix that is numerically zero relative to scale
    inverts to zero.
    """
    M = np.asarray(M)
    rows, cols = M.shape
    if rows == 0 or cols == 0 or not np.any(M):
        return np.zeros((cols, rows), dtype=M.dtype)
    return linalg.pinv(M, atol=0.0, rtol=min(_relative_cutoff(M, tol, scale), 1.0))


def kron(A: Any, B: Any) -> np.ndarray:
    """Kronecker product A ⊗ B."""
    return np.kron(np.atleast_2d(A), np.atleast_2d(B))
