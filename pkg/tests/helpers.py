"""
Helpers shared by several test modules.
"""
import numpy as np

from src.lti_model import ExperimentConfig, LtiSystem, collect
from src.subspace_core import DEFAULT_TOLERANCES


def collect_default(sys: LtiSystem, seed: int = 0, horizon=None):
    """Data with T = n (or horizon) and N = n + mT + 2n."""
    return collect(sys, ExperimentConfig.default_for(sys, seed=seed, horizon=horizon), DEFAULT_TOLERANCES)


def identity_output_system(n: int = 3, m: int = 2, seed: int = 0) -> LtiSystem:
    """Random (A, B) measured by C = I."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    A /= max(1.0, float(np.max(np.abs(np.linalg.eigvals(A)))))
    return LtiSystem(A, rng.standard_normal((n, m)), np.eye(n))


def points_away_from(zeros, count: int, seed: int, distance: float = 0.1):
    """Random points of the unit square at least distance away from every zero."""
    rng = np.random.default_rng(seed)
    zeros = np.asarray(zeros, dtype=complex)
    points = []
    while len(points) < count:
        z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        if zeros.size == 0 or np.min(np.abs(zeros - z)) > distance:
            points.append(z)
    return points
