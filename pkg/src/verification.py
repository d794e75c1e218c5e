"""
Randomized oracle-agreement suite.

Each trial draws a random system, collects data and checks every
data-driven result against the model-based computation.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .config import Config
from .data_driven import (
    feedback_dd,
    output_nulling_coefficients,
    reconstruct_trajectory,
    rstar_dd,
    sstar_dd,
    vstar_dd,
    zero_membership_dd,
    zero_state_nulling_coefficients,
    zeros_dd,
)
from .exceptions import DdgeoError
from .geometric_oracle import invariant_zeros_model, sstar_model, vstar_model, zero_sets_match
from .lti_model import ExperimentConfig, LtiSystem, collect, collect_trajectory, simulate
from .subspace_core import (
    DEFAULT_TOLERANCES,
    Subspace,
    Tolerances,
    intersect,
    projector_residual,
    subspaces_equal,
)
from .systems import random_system

logger = logging.getLogger(__name__)

# thresholds on reconstructed trajectories
OUTPUT_NULLING_TOL = 1e-9
TERMINAL_STATE_TOL = 1e-8
CLOSED_LOOP_TOL = 1e-6


@dataclass
class TrialResult:
    """Checks of a single randomized trial."""

    seed: int
    n: int = 0
    m: int = 0
    p: int = 0
    degenerate: bool = False
    checks: Dict[str, bool] = field(default_factory=dict)
    error_message: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error_message is None and all(self.checks.values())

    @property
    def failed_checks(self) -> List[str]:
        return [name for name, ok in self.checks.items() if not ok]

    def to_dict(self) -> dict:
        return {
            'seed': self.seed,
            'n': self.n,
            'm': self.m,
            'p': self.p,
            'degenerate': self.degenerate,
            'passed': self.passed,
            'failed_checks': self.failed_checks,
            'error_message': self.error_message,
        }


@dataclass
class SuiteResult:
    """Aggregate of a verification run."""

    trials: List[TrialResult]
    seed: int
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(trial.passed for trial in self.trials)

    @property
    def failures(self) -> List[TrialResult]:
        return [trial for trial in self.trials if not trial.passed]

    def to_dict(self) -> dict:
        return {
            'seed': self.seed,
            'trials': len(self.trials),
            'passed': self.passed,
            'degenerate_trials': sum(trial.degenerate for trial in self.trials),
            'failures': [trial.to_dict() for trial in self.failures],
        }


def _closed_loop_stays_inside(sys: LtiSystem, F: np.ndarray, V: Subspace, seed: int, steps: int) -> bool:
    rng = np.random.default_rng(seed)
    x = V.basis @ rng.standard_normal(V.dim)
    closed_loop = sys.A + sys.B @ F
    for _ in range(steps):
        x = closed_loop @ x
        if V.distance(x) > CLOSED_LOOP_TOL * max(1.0, float(np.linalg.norm(x))):
            return False
    return True


def _random_non_zeros(zeros: np.ndarray, count: int, rng: np.random.Generator) -> List[complex]:
    """Points in the unit disc at least 0.1 away from every zero."""
    points: List[complex] = []
    while len(points) < count:
        z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        if zeros.size == 0 or np.min(np.abs(zeros - z)) > 0.1:
            points.append(z)
    return points


def run_trial(seed: int, tol: Tolerances = DEFAULT_TOLERANCES) -> TrialResult:
    """
    Run one randomized oracle-agreement trial.

    Draws n in 2..6 and m, p in 1..3, collects data with T = n and
    T = n + 3, and compares V*, S*, R*, output-nulling reconstructions,
    the data-driven friend and (for non-degenerate systems) the
    invariant zeros with the model.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    m = int(rng.integers(1, 4))
    p = int(rng.integers(1, 4))
    result = TrialResult(seed=seed, n=n, m=m, p=p)
    checks = result.checks

    try:
        sys = random_system(n, m, p, seed=seed)
        data = collect(sys, ExperimentConfig.default_for(sys, seed=seed), tol)

        vstar, sstar = vstar_dd(data, tol), sstar_dd(data, tol)
        rstar = rstar_dd(data, tol)
        vstar_ref, sstar_ref = vstar_model(sys, tol), sstar_model(sys, tol)
        rstar_ref = intersect(vstar_ref, sstar_ref, tol)
        checks['vstar'] = subspaces_equal(vstar, vstar_ref, tol)
        checks['sstar'] = subspaces_equal(sstar, sstar_ref, tol)
        checks['rstar'] = subspaces_equal(rstar, rstar_ref, tol)
        result.degenerate = not rstar_ref.is_trivial

        # zero-output trajectories parametrized by the kernel columns
        nulling = output_nulling_coefficients(data, tol)
        outputs = data.Y @ data.K_U.basis @ nulling[: data.K_U.dim] + data.Y @ data.K_0.basis @ nulling[data.K_U.dim :]
        checks['output_nulling'] = bool(np.all(np.linalg.norm(outputs, axis=0) <= OUTPUT_NULLING_TOL))

        x0 = rng.standard_normal(n)
        inputs = rng.standard_normal((m, data.T))
        reconstructed = reconstruct_trajectory(data, x0, inputs, tol)
        simulated = simulate(sys, x0, inputs).stacked_states()
        checks['reconstruction'] = bool(
            np.linalg.norm(reconstructed.states - simulated) <= TERMINAL_STATE_TOL * max(1.0, float(np.linalg.norm(simulated)))
        )

        beta = zero_state_nulling_coefficients(data, tol)
        terminal = data.final_state_selector() @ data.X @ data.K_0.basis @ beta
        checks['terminal_in_sstar'] = projector_residual(sstar_ref, terminal) <= TERMINAL_STATE_TOL * max(
            1.0, float(np.linalg.norm(terminal, 2)) if terminal.size else 0.0
        )

        longer = collect(sys, ExperimentConfig.default_for(sys, seed=seed + 1, horizon=n + 3), tol)
        checks['horizon_invariance'] = subspaces_equal(vstar_dd(longer, tol), vstar, tol) and subspaces_equal(
            sstar_dd(longer, tol), sstar, tol
        )

        trajectory = collect_trajectory(sys, seed=seed)
        if not vstar.is_trivial:
            F = feedback_dd(trajectory, vstar, tol)
            checks['closed_loop'] = _closed_loop_stays_inside(sys, F, vstar, seed, Config.CLOSED_LOOP_STEPS)

        if not result.degenerate:
            zeros = zeros_dd(trajectory, vstar, tol)
            checks['zeros'] = zero_sets_match(zeros, invariant_zeros_model(sys, tol), Config.ZERO_MATCH_TOL)
            checks['zero_membership'] = all(
                zero_membership_dd(data, vstar, z, tol, rstar=rstar).is_zero for z in zeros
            ) and not any(
                zero_membership_dd(data, vstar, z, tol, rstar=rstar).is_zero
                for z in _random_non_zeros(zeros, 10, rng)
            )
    except DdgeoError as e:
        result.error_message = f"{type(e).__name__}: {e}"

    if not result.passed:
        logger.warning(f"Trial {seed} (n={n}, m={m}, p={p}) failed: {result.failed_checks or result.error_message}")
    return result


def trial_seeds(trials: int, seed: int) -> List[int]:
    """Independent per-trial seeds derived from (seed, trial index)."""
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(trials)]


def run_suite(
    trials: int = Config.VERIFY_TRIALS,
    seed: int = Config.DEFAULT_SEED,
    workers: int = Config.VERIFY_WORKERS,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> SuiteResult:
    """
    Run independent trials, fanned out over a thread pool.

    Results are returned in trial order regardless of completion order.
    """
    if trials < 1:
        raise ValueError(f"Trial count must be at least 1, got {trials}")
    if workers < 1:
        raise ValueError(f"Worker count must be at least 1, got {workers}")

    start_time = time.time()
    seeds = trial_seeds(trials, seed)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(lambda trial_seed: run_trial(trial_seed, tol), seeds))

    suite = SuiteResult(trials=results, seed=seed, elapsed=time.time() - start_time)
    logger.info(f"Verification: {len(results) - len(suite.failures)}/{len(results)} trials passed in {suite.elapsed:.2f}s")
    return suite
