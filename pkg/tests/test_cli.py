"""
End-to-end tests for the ddgeo command line.
"""
import json

import pytest

from main import run_cli
from src.base_command import BaseCommand
from src.command_factory import CommandFactory
from src.serialization import read_experiment_data, read_matrix_csv


def run(capsys, *argv):
    code = run_cli(list(argv))
    captured = capsys.readouterr()
    report = json.loads(captured.out)
    return code, report, captured.err


class TestCollect:
    def test_consensus_shapes(self, tmp_path, capsys):
        code, report, _ = run(capsys, "collect", "--system", "consensus", "--seed", "0", "--out", str(tmp_path / "data"))
        assert code == 0
        assert report["command"] == "collect"
        assert report["schema_version"] == 1
        assert report["excitation"]["persistently_exciting"]
        N = 11 + 3 * 11 + 2 * 11
        assert read_matrix_csv(tmp_path / "data" / "X.csv").shape == (11 * 11, N)
        assert read_experiment_data(tmp_path / "data").trajectory is not None

    def test_same_seed_same_files(self, tmp_path, capsys):
        for name in ("first", "second"):
            code, _, _ = run(capsys, "collect", "--system", "random", "--seed", "4", "--out", str(tmp_path / name))
            assert code == 0
        for filename in ("X.csv", "U.csv", "manifest.json", "traj_x.csv"):
            assert (tmp_path / "first" / filename).read_bytes() == (tmp_path / "second" / filename).read_bytes()

    def test_too_few_experiments(self, tmp_path, capsys):
        code, report, _ = run(capsys, "collect", "--experiments", "5", "--out", str(tmp_path / "data"))
        assert code == 3
        assert report["error"]["type"] == "NotPersistentlyExcitingError"
        assert not (tmp_path / "data").exists()

    def test_invalid_horizon(self, tmp_path, capsys):
        code, _, _ = run(capsys, "collect", "--horizon", "0", "--out", str(tmp_path / "data"))
        assert code == 2


class TestAnalysis:
    @pytest.fixture
    def consensus_dir(self, tmp_path, capsys):
        run(capsys, "collect", "--system", "consensus", "--out", str(tmp_path / "consensus"))
        return str(tmp_path / "consensus")

    @pytest.fixture
    def siso_dir(self, tmp_path, capsys):
        run(capsys, "collect", "--system", "siso-zero", "--seed", "1", "--out", str(tmp_path / "siso"))
        return str(tmp_path / "siso")

    def test_subspaces_with_oracle(self, consensus_dir, capsys):
        code, report, _ = run(capsys, "subspaces", "--data", consensus_dir, "--oracle")
        assert code == 0
        assert report["passed"]
        assert all(item["max_principal_angle"] <= 1e-8 for item in report["oracle"].values())
        assert report["rstar"]["dim"] > 0

    def test_report_file(self, consensus_dir, tmp_path, capsys):
        code, report, _ = run(capsys, "subspaces", "--data", consensus_dir, "--out", str(tmp_path / "report"))
        assert code == 0
        stored = json.loads((tmp_path / "report" / "report.json").read_text())
        assert stored["vstar"] == report["vstar"]

    def test_malformed_directory(self, tmp_path, capsys):
        broken = tmp_path / "broken"
        broken.mkdir()
        (broken / "manifest.json").write_text('{"schema_version": 1, "n": 2}')
        code, report, _ = run(capsys, "subspaces", "--data", str(broken))
        assert code == 2
        assert report["error"]["type"] == "DataFormatError"

    def test_missing_data_flag(self, capsys):
        code, _, _ = run(capsys, "subspaces")
        assert code == 2

    def test_zeros(self, siso_dir, capsys):
        code, report, _ = run(capsys, "zeros", "--data", siso_dir, "--oracle")
        assert code == 0
        assert len(report["zeros"]) == 1
        assert report["zeros"][0]["re"] == pytest.approx(0.5, abs=1e-6)
        assert report["membership"] == [True]

    def test_zeros_of_degenerate_system(self, consensus_dir, capsys):
        code, report, _ = run(capsys, "zeros", "--data", consensus_dir)
        assert code == 3
        assert report["error"]["type"] == "DegenerateSystemError"

    def test_feedback(self, consensus_dir, capsys):
        code, report, _ = run(capsys, "feedback", "--data", consensus_dir, "--oracle")
        assert code == 0
        assert report["F"]["rows"] == 3 and report["F"]["cols"] == 11
        assert report["oracle"]["invariance_residual"] <= 1e-8


class TestAttack:
    def test_consensus_attack(self, tmp_path, capsys):
        out = tmp_path / "attack"
        code, report, err = run(capsys, "attack", "--system", "consensus", "--out", str(out))
        assert code == 0
        assert "stealthy: true" in err
        assert report["stealthy"]
        assert report["onset_step"] == 24
        assert report["max_output_deviation"] <= 1e-9
        lines = (out / "attack.csv").read_text().splitlines()
        assert lines[0].startswith("step,state_deviation,output_deviation,y0_nominal,y1_nominal")
        assert len(lines) == 1 + 24 + 11 + 1
        assert json.loads((out / "report.json").read_text())["stealthy"]

    def test_no_attack_exists(self, tmp_path, capsys):
        code, report, _ = run(
            capsys, "attack", "--system", "random", "--dims", "3", "1", "3", "--onset", "0", "--out", str(tmp_path / "a")
        )
        assert code == 3
        assert report["error"]["type"] == "NoStealthyAttackError"
        assert not (tmp_path / "a").exists()


class TestVerifyAndConfig:
    def test_verify(self, capsys):
        code, report, _ = run(capsys, "verify", "--trials", "3", "--workers", "2", "--seed", "1")
        assert code == 0
        assert report["passed"]
        assert report["trials"] == 3

    def test_config_file(self, tmp_path, capsys):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"system": "random", "dims": [3, 1, 1], "experiments": 12}))
        code, report, _ = run(capsys, "collect", "--config", str(config), "--out", str(tmp_path / "data"))
        assert code == 0
        assert (report["n"], report["N"]) == (3, 12)

    def test_flags_override_config_file(self, tmp_path, capsys):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"system": "random", "dims": [3, 1, 1], "seed": 1}))
        code, report, _ = run(capsys, "collect", "--config", str(config), "--seed", "2", "--out", str(tmp_path / "d"))
        assert code == 0
        assert report["seed"] == 2

    def test_unknown_config_key(self, tmp_path, capsys):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"bogus": 1}))
        code, report, _ = run(capsys, "check-env", "--config", str(config))
        assert code == 2
        assert "bogus" in report["error"]["message"]

    def test_check_env(self, capsys):
        code, report, _ = run(capsys, "check-env")
        assert code == 0
        assert "consensus" in report["builtin_systems"]
        assert report["tolerances"]["rank_rel"] == 1e-10

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            run_cli(["launch"])


class TestCommandFactory:
    @pytest.mark.parametrize("name", CommandFactory.get_supported_commands())
    def test_commands_describe_themselves(self, name):
        command = CommandFactory.create_command(name)
        assert command.get_command_name() == name
        assert command.get_description() == CommandFactory.get_command_description(name)

    def test_base_command_surface(self):
        public = {attr for attr in vars(BaseCommand) if not attr.startswith("_")}
        assert public == {
            "get_command_name",
            "get_description",
            "run",
            "execute",
            "build_system",
            "load_data",
            "load_model",
        }
