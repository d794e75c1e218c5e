"""
Tests for the randomized oracle-agreement suite.
"""
import pytest

from src.verification import SuiteResult, TrialResult, run_suite, run_trial, trial_seeds


class TestTrial:
    @pytest.mark.parametrize("seed", range(5))
    def test_trial_passes(self, seed):
        result = run_trial(seed)
        assert result.passed, result.to_dict()
        assert {"vstar", "sstar", "rstar", "reconstruction", "horizon_invariance"} <= set(result.checks)

    def test_failed_checks_are_reported(self):
        result = TrialResult(seed=1, checks={"vstar": True, "zeros": False})
        assert not result.passed
        assert result.failed_checks == ["zeros"]
        assert result.to_dict()["failed_checks"] == ["zeros"]

    def test_error_fails_trial(self):
        assert not TrialResult(seed=1, error_message="NotPersistentlyExcitingError: rank").passed


class TestSuite:
    def test_seeds_are_reproducible(self):
        assert trial_seeds(4, 7) == trial_seeds(4, 7)
        assert len(set(trial_seeds(4, 7))) == 4
        assert trial_seeds(2, 7) == trial_seeds(4, 7)[:2]

    def test_results_follow_trial_order(self):
        suite = run_suite(trials=4, seed=3, workers=3)
        assert [trial.seed for trial in suite.trials] == trial_seeds(4, 3)
        assert suite.passed

    @pytest.mark.parametrize("seed", [0, 1])
    def test_hundred_trials_pass(self, seed):
        suite = run_suite(trials=100, seed=seed)
        assert len(suite.trials) == 100
        assert suite.passed, [failure.to_dict() for failure in suite.failures]

    def test_worker_count_does_not_change_results(self):
        serial = run_suite(trials=3, seed=5, workers=1)
        parallel = run_suite(trials=3, seed=5, workers=3)
        assert [t.to_dict() for t in serial.trials] == [t.to_dict() for t in parallel.trials]

    def test_summary(self):
        summary = SuiteResult(trials=[TrialResult(seed=0), TrialResult(seed=1, checks={"vstar": False})], seed=0).to_dict()
        assert summary["trials"] == 2
        assert not summary["passed"]
        assert [failure["seed"] for failure in summary["failures"]] == [1]

    @pytest.mark.parametrize("kwargs", [{"trials": 0}, {"workers": 0}])
    def test_invalid_counts(self, kwargs):
        with pytest.raises(ValueError):
            run_suite(**kwargs)
