"""
Stealthy input attacks designed from experiment data.

An attack is an additive input sequence A_T over one horizon window whose
state trajectory from the origin evolves in R* and so never reaches the
monitored outputs. The admissible set is Im(U K_0 P) where
[X K_0, I ⊗ R] [P; Q] = 0.
"""
import logging
from dataclasses import dataclass, replace
from typing import Any, Optional, Tuple

import numpy as np

from .config import Config
from .data_driven import require_informative_data, rstar_dd
from .exceptions import DimensionMismatchError, NoStealthyAttackError
from .lti_model import ExperimentConfig, ExperimentData, LtiSystem, collect, consensus_example, simulate
from .subspace_core import (
    DEFAULT_TOLERANCES,
    Subspace,
    Tolerances,
    image_basis,
    kernel_basis,
    kron,
    projector_residual,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AttackPlan:
    """
    Stacked attack input A_T and the R* it excites.

    attack_input stacks a(0)..a(T-1) (length mT); generators holds the
    nonzero columns of U K_0 P, whose span is the admissible set.
    """

    attack_input: np.ndarray
    rstar: Subspace
    onset_step: int
    horizon: int
    inputs: int
    generators: np.ndarray

    def __post_init__(self):
        attack_input = np.asarray(self.attack_input, dtype=float).reshape(-1)
        if attack_input.size != self.inputs * self.horizon:
            raise DimensionMismatchError(
                f"Attack input has length {attack_input.size}, expected {self.inputs * self.horizon}"
            )
        if self.onset_step < 0:
            raise ValueError(f"Onset step must be non-negative, got {self.onset_step}")
        object.__setattr__(self, 'attack_input', attack_input)

    @property
    def energy(self) -> float:
        return float(np.linalg.norm(self.attack_input))

    @property
    def window_end(self) -> int:
        return self.onset_step + self.horizon

    def input_sequence(self) -> np.ndarray:
        """A_T unstacked into an m x T array (columns are time steps)."""
        return self.attack_input.reshape(self.inputs, self.horizon, order='F')

    def is_admissible(self, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        """A_T ∈ Im(U K_0 P) within residual_abs."""
        span = image_basis(self.generators, tol)
        return projector_residual(span, self.attack_input) <= tol.residual_abs * max(1.0, self.energy)

    def scaled(self, energy: float) -> "AttackPlan":
        """Same direction with the given Euclidean norm (zero stays zero)."""
        current = self.energy
        attack_input = self.attack_input * (energy / current) if current > 0 else self.attack_input
        return replace(self, attack_input=attack_input)

    def shifted(self, onset_step: int) -> "AttackPlan":
        return replace(self, onset_step=onset_step)


@dataclass(frozen=True, eq=False)
class AttackOutcome:
    """
    Nominal and attacked runs side by side.

    State and output arrays have one column per step 0..total_steps;
    output_deviation and state_deviation hold the per-step norms of the
    differences.
    """

    nominal_states: np.ndarray
    attacked_states: np.ndarray
    nominal_outputs: np.ndarray
    attacked_outputs: np.ndarray
    output_deviation: np.ndarray
    state_deviation: np.ndarray
    onset_step: int
    horizon: int
    stealthy_until: int

    @property
    def steps(self) -> int:
        return self.nominal_states.shape[1] - 1

    @property
    def window_end(self) -> int:
        return self.onset_step + self.horizon

    def state_deviations(self) -> np.ndarray:
        """attacked - nominal states, n x (steps + 1)."""
        return self.attacked_states - self.nominal_states

    def output_deviations(self) -> np.ndarray:
        return self.attacked_outputs - self.nominal_outputs

    def max_state_deviation(self, within_window: bool = True) -> float:
        deviation = self.state_deviation[self.onset_step : self.window_end + 1] if within_window else self.state_deviation
        return float(np.max(deviation)) if deviation.size else 0.0

    def max_output_deviation(self) -> float:
        return float(np.max(self.output_deviation)) if self.output_deviation.size else 0.0


def admissible_generators(
    data: ExperimentData, rstar: Subspace, tol: Tolerances = DEFAULT_TOLERANCES
) -> np.ndarray:
    """
    Nonzero columns of U K_0 P where [X K_0, I ⊗ R] [P; Q] = 0.

    Returns:
        np.ndarray: mT x k generator matrix (k may be 0)
    """
    if rstar.is_trivial:
        return np.zeros((data.m * data.T, 0))
    confinement = kron(np.eye(data.T), rstar.basis)
    stacked = np.hstack([data.X @ data.K_0.basis, confinement])
    coefficients = kernel_basis(stacked, tol).basis
    P = coefficients[: data.K_0.dim, :]
    generators = data.U @ data.K_0.basis @ P
    norms = np.linalg.norm(generators, axis=0)
    keep = norms > tol.residual_abs
    logger.debug(f"{int(np.sum(keep))} of {generators.shape[1]} attack generators are nonzero")
    return generators[:, keep]


def design_attack(
    data: ExperimentData,
    tol: Tolerances = DEFAULT_TOLERANCES,
    attack_energy: float = Config.ATTACK_ENERGY,
    onset_step: int = 0,
    rstar: Optional[Subspace] = None,
) -> AttackPlan:
    """
    Build a stealthy attack plan from experiment data.

    The largest-norm generator of Im(U K_0 P) is scaled to attack_energy.

    Args:
        data: Persistently exciting data with T >= n
        tol: Tolerances
        attack_energy: Euclidean norm of the stacked attack input
        onset_step: First step of the attack window
        rstar: Precomputed R*; recomputed from data when omitted

    Returns:
        AttackPlan

    Raises:
        NoStealthyAttackError: If R* is trivial or every generator vanishes
    """
    if attack_energy <= 0:
        raise ValueError(f"Attack energy must be positive, got {attack_energy}")
    require_informative_data(data, tol)
    rstar = rstar_dd(data, tol) if rstar is None else rstar
    if rstar.is_trivial:
        raise NoStealthyAttackError("No stealthy attack exists: R* is trivial")

    generators = admissible_generators(data, rstar, tol)
    if generators.shape[1] == 0:
        raise NoStealthyAttackError("No stealthy attack exists: every generator of U K_0 P is zero")

    norms = np.linalg.norm(generators, axis=0)
    chosen = generators[:, int(np.argmax(norms))]
    plan = AttackPlan(
        attack_input=attack_energy * chosen / norms.max(),
        rstar=rstar,
        onset_step=onset_step,
        horizon=data.T,
        inputs=data.m,
        generators=generators,
    )
    logger.info(
        f"Attack plan: {generators.shape[1]} generators, dim R* = {rstar.dim}, "
        f"energy {plan.energy:.3g}, window [{plan.onset_step}, {plan.window_end})"
    )
    return plan


def _nominal_inputs(nominal_u: Any, m: int, total_steps: int) -> np.ndarray:
    nominal_u = np.asarray(nominal_u, dtype=float)
    if nominal_u.ndim == 1 and nominal_u.size == m:
        return np.tile(nominal_u.reshape(m, 1), (1, total_steps))
    if nominal_u.ndim == 2 and nominal_u.shape == (m, total_steps):
        return nominal_u.copy()
    raise DimensionMismatchError(
        f"Nominal input must be a length-{m} vector or an {m} x {total_steps} array, got shape {nominal_u.shape}"
    )


def simulate_attack(
    sys: LtiSystem,
    plan: AttackPlan,
    nominal_u: Any,
    x0: Any,
    total_steps: int,
    threshold: float = Config.DETECTION_THRESHOLD,
) -> AttackOutcome:
    """
    Run the nominal and attacked trajectories side by side.

    The attacked input is the nominal input plus A_T unstacked over
    [onset, onset + T). stealthy_until is the last step up to which every
    output deviation stays within threshold.

    Args:
        sys: True system
        plan: Attack plan
        nominal_u: Constant m-vector or an m x total_steps array
        x0: Common initial state
        total_steps: Number of simulated steps
        threshold: Output deviation counted as visible

    Raises:
        DimensionMismatchError: If inputs do not fit the system
        ValueError: If the attack window does not fit into total_steps
    """
    if plan.inputs != sys.m:
        raise DimensionMismatchError(f"Plan has {plan.inputs} inputs, system has {sys.m}")
    if plan.window_end > total_steps:
        raise ValueError(
            f"Attack window ends at {plan.window_end}, beyond total_steps={total_steps}"
        )

    nominal_inputs = _nominal_inputs(nominal_u, sys.m, total_steps)
    attacked_inputs = nominal_inputs.copy()
    attacked_inputs[:, plan.onset_step : plan.window_end] += plan.input_sequence()

    nominal = simulate(sys, x0, nominal_inputs)
    attacked = simulate(sys, x0, attacked_inputs)
    nominal_outputs = sys.C @ nominal.x_seq
    attacked_outputs = sys.C @ attacked.x_seq

    output_deviation = np.linalg.norm(attacked_outputs - nominal_outputs, axis=0)
    state_deviation = np.linalg.norm(attacked.x_seq - nominal.x_seq, axis=0)

    visible = np.flatnonzero(output_deviation > threshold)
    stealthy_until = int(visible[0]) - 1 if visible.size else total_steps
    if stealthy_until < plan.window_end:
        logger.warning(f"Attack becomes visible at step {stealthy_until + 1}, inside its window")
    elif stealthy_until > plan.window_end:
        logger.debug(f"Free deviation stays output-invisible through step {stealthy_until}")

    return AttackOutcome(
        nominal_states=nominal.x_seq,
        attacked_states=attacked.x_seq,
        nominal_outputs=nominal_outputs,
        attacked_outputs=attacked_outputs,
        output_deviation=output_deviation,
        state_deviation=state_deviation,
        onset_step=plan.onset_step,
        horizon=plan.horizon,
        stealthy_until=stealthy_until,
    )


def detect(outcome: AttackOutcome, threshold: float = Config.DETECTION_THRESHOLD) -> bool:
    """True iff some per-step output deviation exceeds threshold."""
    return bool(np.any(outcome.output_deviation > threshold))


def forced_response(sys: LtiSystem, attack_input: Any, horizon: int) -> np.ndarray:
    """
    States x(0..T) driven by the stacked attack alone from the origin.

    Returns:
        np.ndarray: n x (T + 1)
    """
    attack_input = np.asarray(attack_input, dtype=float).reshape(-1)
    if attack_input.size != sys.m * horizon:
        raise DimensionMismatchError(f"Attack input length {attack_input.size} != m*T = {sys.m * horizon}")
    return simulate(sys, np.zeros(sys.n), attack_input.reshape(sys.m, horizon, order='F')).x_seq


def deviation_distance(outcome: AttackOutcome, rstar: Subspace) -> np.ndarray:
    """Per-step distance of the state deviation from R*."""
    return rstar.distance(outcome.state_deviations())


def consensus_attack_experiment(
    seed: int = Config.DEFAULT_SEED,
    tol: Tolerances = DEFAULT_TOLERANCES,
    attack_energy: float = Config.ATTACK_ENERGY,
    onset_step: int = Config.ATTACK_ONSET,
    total_steps: Optional[int] = None,
) -> Tuple[AttackPlan, AttackOutcome]:
    """
    Attack on the leader-follower consensus network under constant leader input.

    Data is collected with T = n, the attack starts once the nominal run
    has settled and the run ends with the attack window unless
    total_steps says otherwise.
    """
    sys = consensus_example()
    data = collect(sys, ExperimentConfig.default_for(sys, seed=seed), tol)
    plan = design_attack(data, tol, attack_energy=attack_energy, onset_step=onset_step)
    total_steps = plan.window_end if total_steps is None else total_steps
    x0 = np.random.default_rng(seed).standard_normal(sys.n)
    outcome = simulate_attack(sys, plan, Config.CONSENSUS_NOMINAL_INPUT, x0, total_steps)
    logger.info(
        f"Consensus attack: max output deviation {outcome.max_output_deviation():.2e}, "
        f"max state deviation {outcome.max_state_deviation():.3g}"
    )
    return plan, outcome
