"""
Tests for stealthy attack design and simulation.
"""
from dataclasses import replace

import numpy as np
import pytest

from src.attack_designer import (
    AttackPlan,
    admissible_generators,
    consensus_attack_experiment,
    design_attack,
    detect,
    deviation_distance,
    forced_response,
    simulate_attack,
)
from src.data_driven import rstar_dd
from src.exceptions import DimensionMismatchError, NoStealthyAttackError
from src.systems import degenerate_system

from .helpers import collect_default, identity_output_system


@pytest.fixture(scope="module")
def consensus_run():
    return consensus_attack_experiment(seed=0)


class TestDesign:
    def test_identity_output_has_no_attack(self):
        with pytest.raises(NoStealthyAttackError):
            design_attack(collect_default(identity_output_system()))

    def test_energy(self, consensus_data):
        plan = design_attack(consensus_data, attack_energy=3.0)
        assert plan.energy == pytest.approx(3.0)
        assert plan.horizon == consensus_data.T
        assert plan.is_admissible()

    def test_non_positive_energy(self, consensus_data):
        with pytest.raises(ValueError):
            design_attack(consensus_data, attack_energy=0.0)

    def test_every_generator_is_stealthy(self, consensus, consensus_data):
        rstar = rstar_dd(consensus_data)
        generators = admissible_generators(consensus_data, rstar)
        assert generators.shape[1] > 0
        for column in generators.T:
            states = forced_response(consensus, column, consensus_data.T)
            scale = np.linalg.norm(column)
            assert np.linalg.norm(consensus.C @ states) <= 1e-8 * scale
            assert np.max(rstar.distance(states)) <= 1e-6 * scale

    def test_input_sequence_columns_are_steps(self, consensus_data):
        plan = design_attack(consensus_data)
        sequence = plan.input_sequence()
        assert sequence.shape == (consensus_data.m, consensus_data.T)
        np.testing.assert_array_equal(sequence[:, 1], plan.attack_input[consensus_data.m : 2 * consensus_data.m])

    def test_plan_length_checked(self):
        with pytest.raises(DimensionMismatchError):
            AttackPlan(np.ones(5), rstar=None, onset_step=0, horizon=2, inputs=2, generators=np.zeros((4, 0)))

    def test_degenerate_system(self):
        sys, hidden = degenerate_system(4, seed=0)
        plan = design_attack(collect_default(sys, seed=0))
        outcome = simulate_attack(sys, plan, np.zeros(sys.m), np.zeros(sys.n), total_steps=plan.window_end)
        assert outcome.max_output_deviation() <= 1e-9
        assert np.max(deviation_distance(outcome, hidden)) <= 1e-6 * plan.energy


class TestConsensusAttack:
    def test_outputs_are_unaffected(self, consensus_run):
        _, outcome = consensus_run
        assert outcome.max_output_deviation() <= 1e-9
        assert not detect(outcome)

    def test_states_are_affected(self, consensus_run):
        _, outcome = consensus_run
        assert outcome.max_state_deviation() > 1e-2

    def test_deviation_stays_in_rstar(self, consensus_run):
        plan, outcome = consensus_run
        distance = deviation_distance(outcome, plan.rstar)[plan.onset_step : plan.window_end + 1]
        assert np.max(distance) <= 1e-6

    def test_window_and_stealth(self, consensus_run):
        plan, outcome = consensus_run
        assert plan.onset_step == 24
        assert outcome.steps == plan.window_end
        assert outcome.stealthy_until == outcome.steps
        np.testing.assert_array_equal(outcome.state_deviation[: plan.onset_step + 1], 0.0)

    def test_superposition(self, consensus, consensus_run):
        plan, outcome = consensus_run
        window = outcome.state_deviations()[:, plan.onset_step : plan.window_end + 1]
        np.testing.assert_allclose(window, forced_response(consensus, plan.attack_input, plan.horizon), atol=1e-9)


class TestSimulation:
    def setup_method(self):
        self.sys, _ = degenerate_system(4, seed=1)
        self.plan = design_attack(collect_default(self.sys, seed=1), onset_step=3)
        self.x0 = np.ones(self.sys.n)
        self.nominal = np.zeros(self.sys.m)

    def test_zero_attack(self):
        outcome = simulate_attack(self.sys, self.plan.scaled(0.0), self.nominal, self.x0, total_steps=10)
        np.testing.assert_array_equal(outcome.state_deviation, 0.0)
        assert not detect(outcome)

    def test_random_attack_is_detected(self):
        rng = np.random.default_rng(0)
        noise = rng.standard_normal(self.plan.attack_input.size)
        plan = replace(self.plan, attack_input=noise).scaled(self.plan.energy)
        outcome = simulate_attack(self.sys, plan, self.nominal, self.x0, total_steps=10)
        assert detect(outcome)
        assert plan.onset_step <= outcome.stealthy_until < plan.window_end

    def test_stealthy_attack_outlives_its_window(self):
        outcome = simulate_attack(self.sys, self.plan, self.nominal, self.x0, total_steps=12)
        assert outcome.stealthy_until == 12

    def test_nominal_input_sequence(self):
        inputs = np.ones((self.sys.m, 10))
        constant = simulate_attack(self.sys, self.plan, np.ones(self.sys.m), self.x0, total_steps=10)
        sequence = simulate_attack(self.sys, self.plan, inputs, self.x0, total_steps=10)
        np.testing.assert_allclose(constant.attacked_states, sequence.attacked_states)

    def test_window_must_fit(self):
        with pytest.raises(ValueError):
            simulate_attack(self.sys, self.plan, self.nominal, self.x0, total_steps=self.plan.window_end - 1)

    def test_nominal_input_shape(self):
        with pytest.raises(DimensionMismatchError):
            simulate_attack(self.sys, self.plan, np.zeros(self.sys.m + 1), self.x0, total_steps=10)

    def test_shifted(self):
        later = self.plan.shifted(5)
        outcome = simulate_attack(self.sys, later, self.nominal, self.x0, total_steps=10)
        np.testing.assert_array_equal(outcome.state_deviation[:6], 0.0)
        assert np.max(outcome.state_deviation[6:]) > 0.0
