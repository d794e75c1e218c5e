"""
Exception types for the data-driven geometric control library.

Every error subclasses ValueError so callers that only guard against
invalid input keep working.
"""


class DdgeoError(ValueError):
    """Base class for all library errors."""

    verification_failure = False


class DimensionMismatchError(DdgeoError):
    """Operands live in incompatible spaces."""


class DataFormatError(DdgeoError):
    """A matrix file or data directory could not be parsed."""


class HorizonTooShortError(DdgeoError):
    """The experiment horizon T is shorter than the state dimension."""


class NotPersistentlyExcitingError(DdgeoError):
    """Initial states and inputs fail the persistency-of-excitation rank test."""

    verification_failure = True


class NotControlledInvariantError(DdgeoError):
    """No friend exists for the requested subspace within tolerance."""

    verification_failure = True


class DegenerateSystemError(DdgeoError):
    """R* is nontrivial, so invariant zeros are not well defined."""

    verification_failure = True


class TrajectoryNotInformativeError(DdgeoError):
    """[U_{0,T}; X_{0,T}] does not have full row rank."""

    verification_failure = True


class ResidualToleranceError(DdgeoError):
    """A computed gain leaves an invariance residual above tolerance."""

    verification_failure = True


class BlockTriangularizationError(DdgeoError):
    """The closed-loop matrix is not block triangular in the V* coordinates."""

    verification_failure = True


class NoStealthyAttackError(DdgeoError):
    """The data admit no input that perturbs the state with zero output."""

    verification_failure = True
