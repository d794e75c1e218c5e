"""
Tests for configuration, run parameters and CLI helpers.
"""
import pytest

from src.base_command import RunConfig
from src.command_factory import CommandFactory
from src.config import Config
from src.exceptions import DataFormatError, DegenerateSystemError
from src.utils import EXIT_FAILURE, EXIT_VALIDATION, EXIT_VERIFICATION, exit_code_for, format_duration, validate_seed


class TestConfig:
    def test_validate(self):
        assert Config.validate_config()

    def test_invalid_tolerance(self, monkeypatch):
        monkeypatch.setattr(Config, "RANK_TOL", 0.0)
        with pytest.raises(ValueError):
            Config.validate_config()

    def test_default_tolerances(self):
        tol = Config.default_tolerances()
        assert (tol.rank_rel, tol.subspace_eq, tol.residual_abs) == (
            Config.RANK_TOL,
            Config.SUBSPACE_EQ_TOL,
            Config.RESIDUAL_TOL,
        )

    def test_system_registry(self):
        assert Config.get_builtin_systems() == ["consensus", "random", "siso-zero", "degenerate"]
        assert Config.get_system_defaults("siso-zero") == {"zeros": [0.5], "poles": [0.2, -0.3]}
        assert Config.get_system_description("unknown") == ""

    def test_defaults_are_copies(self):
        Config.get_system_defaults("random")["n"] = 99
        assert Config.get_system_defaults("random")["n"] == 4


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig.from_mapping({"command": "collect"})
        assert config.system == "consensus"
        assert config.onset == Config.ATTACK_ONSET
        assert config.tolerances().rank_rel == Config.RANK_TOL

    def test_none_values_fall_back(self):
        assert RunConfig.from_mapping({"command": "verify", "trials": None}).trials == Config.VERIFY_TRIALS

    def test_unknown_key(self):
        with pytest.raises(ValueError, match="Unknown configuration keys"):
            RunConfig.from_mapping({"command": "collect", "colour": "red"})

    @pytest.mark.parametrize(
        "values",
        [
            {"horizon": 0},
            {"trials": 0},
            {"onset": -1},
            {"tol_rank": 0.0},
            {"subspace": "sstar"},
            {"dims": [1, 2, 3, 4]},
            {"system": "pendulum"},
            {"seed": -1},
            {"zeros": ["a"]},
        ],
    )
    def test_invalid_values(self, values):
        with pytest.raises(ValueError):
            RunConfig.from_mapping({"command": "collect", **values})

    def test_system_params(self):
        config = RunConfig.from_mapping({"command": "collect", "system": "random", "dims": [5, 1], "seed": 3})
        assert config.system_params() == {"n": 5, "m": 1, "seed": 3}

    def test_output_dir(self, tmp_path):
        assert RunConfig.from_mapping({"command": "attack", "out": str(tmp_path)}).output_dir("attack") == tmp_path


class TestCommandFactory:
    def test_supported_commands(self):
        assert CommandFactory.get_supported_commands() == [
            "collect",
            "subspaces",
            "zeros",
            "feedback",
            "attack",
            "verify",
            "check-env",
        ]

    def test_create(self):
        assert CommandFactory.create_command("zeros").get_command_name() == "zeros"

    def test_unknown(self):
        with pytest.raises(ValueError):
            CommandFactory.create_command("launch")


class TestUtils:
    def test_exit_codes(self):
        assert exit_code_for(DegenerateSystemError("x")) == EXIT_VERIFICATION
        assert exit_code_for(DataFormatError("x")) == EXIT_VALIDATION
        assert exit_code_for(FileNotFoundError("x")) == EXIT_FAILURE
        assert exit_code_for(RuntimeError("x")) == EXIT_FAILURE

    def test_seed(self):
        assert validate_seed("7") == 7
        with pytest.raises(ValueError):
            validate_seed(1.5)
        with pytest.raises(ValueError):
            validate_seed(True)

    def test_format_duration(self):
        assert format_duration(5.04) == "5.0s"
        assert format_duration(125) == "2m 5s"
        assert format_duration(7260) == "2h 1m"
