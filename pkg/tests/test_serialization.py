"""
Tests for file formats and atomic writes.
"""
import json

import numpy as np
import pytest

from src.attack_designer import design_attack, simulate_attack
from src.exceptions import DataFormatError
from src.lti_model import collect_trajectory
from src.serialization import (
    atomic_directory,
    matrix_from_json,
    matrix_to_json,
    read_experiment_data,
    read_json,
    read_matrix_csv,
    read_system,
    subspace_from_json,
    write_attack_csv,
    write_experiment_data,
    write_json,
    write_matrix_csv,
    write_system,
    zeros_from_json,
    zeros_to_json,
)
from src.subspace_core import Subspace, subspaces_equal
from src.systems import degenerate_system, random_system

from .helpers import collect_default


class TestMatrixFiles:
    def test_csv_keeps_full_precision(self, tmp_path):
        matrix = np.array([[1.0 / 3.0, -2.5e-17], [np.pi, 1e300]])
        path = write_matrix_csv(tmp_path / "M.csv", matrix)
        np.testing.assert_array_equal(read_matrix_csv(path), matrix)

    def test_csv_layout(self, tmp_path):
        path = write_matrix_csv(tmp_path / "M.csv", [[1.0, 2.0], [3.0, 4.0]])
        assert path.read_text().splitlines() == ["1,2", "3,4"]

    def test_single_row_stays_two_dimensional(self, tmp_path):
        path = write_matrix_csv(tmp_path / "row.csv", [[1.0, 2.0, 3.0]])
        assert read_matrix_csv(path).shape == (1, 3)

    def test_ragged_file(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3\n")
        with pytest.raises(DataFormatError):
            read_matrix_csv(path)

    def test_non_numeric_file(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,a\n")
        with pytest.raises(DataFormatError):
            read_matrix_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataFormatError):
            read_matrix_csv(tmp_path / "absent.csv")

    def test_json_is_row_major(self):
        obj = matrix_to_json([[1.0, 2.0], [3.0, 4.0]])
        assert obj == {"rows": 2, "cols": 2, "data": [1.0, 2.0, 3.0, 4.0]}
        np.testing.assert_array_equal(matrix_from_json(obj), [[1.0, 2.0], [3.0, 4.0]])

    def test_json_size_mismatch(self):
        with pytest.raises(DataFormatError):
            matrix_from_json({"rows": 2, "cols": 2, "data": [1.0]})


class TestJsonObjects:
    def test_subspace(self):
        V = Subspace.span(np.random.default_rng(0).standard_normal((4, 2)))
        restored = subspace_from_json(json.loads(json.dumps(V.to_dict())))
        assert subspaces_equal(restored, V)

    def test_trivial_subspace(self):
        restored = subspace_from_json(json.loads(json.dumps(Subspace.trivial(3).to_dict())))
        assert restored.is_trivial
        assert restored.ambient_dim == 3

    def test_zero_set(self):
        items = zeros_to_json([0.5, -0.25 + 1j])
        assert items == [{"re": 0.5, "im": 0.0}, {"re": -0.25, "im": 1.0}]
        np.testing.assert_array_equal(zeros_from_json(items), [0.5, -0.25 + 1j])

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(DataFormatError):
            read_json(path)

    def test_write_json_replaces(self, tmp_path):
        path = tmp_path / "report.json"
        write_json(path, {"a": 1})
        write_json(path, {"a": 2})
        assert read_json(path) == {"a": 2}
        assert [p.name for p in tmp_path.iterdir()] == ["report.json"]


class TestExperimentDirectory:
    def setup_method(self):
        self.sys = random_system(3, 2, 1, seed=0)
        self.data = collect_default(self.sys, seed=0)

    def test_round_trip(self, tmp_path):
        traj = collect_trajectory(self.sys, seed=0)
        target = write_experiment_data(
            tmp_path / "data", self.data, system={"name": "random"}, trajectory=traj, model=self.sys
        )
        bundle = read_experiment_data(target)
        np.testing.assert_array_equal(bundle.data.X, self.data.X)
        np.testing.assert_array_equal(bundle.data.U, self.data.U)
        assert bundle.manifest["system"] == {"name": "random"}
        assert bundle.manifest["N"] == self.data.N
        np.testing.assert_array_equal(bundle.trajectory.x_seq, traj.x_seq)
        np.testing.assert_array_equal(read_system(target / "model").A, self.sys.A)

    def test_without_trajectory(self, tmp_path):
        bundle = read_experiment_data(write_experiment_data(tmp_path / "data", self.data))
        assert bundle.trajectory is None

    def test_manifest_mismatch(self, tmp_path):
        target = write_experiment_data(tmp_path / "data", self.data)
        manifest = read_json(target / "manifest.json")
        manifest["T"] = self.data.T + 1
        write_json(target / "manifest.json", manifest)
        with pytest.raises(DataFormatError, match="manifest implies"):
            read_experiment_data(target)

    def test_schema_version(self, tmp_path):
        target = write_experiment_data(tmp_path / "data", self.data)
        manifest = read_json(target / "manifest.json")
        manifest["schema_version"] = 99
        write_json(target / "manifest.json", manifest)
        with pytest.raises(DataFormatError):
            read_experiment_data(target)

    def test_missing_matrix(self, tmp_path):
        target = write_experiment_data(tmp_path / "data", self.data)
        (target / "Y.csv").unlink()
        with pytest.raises(DataFormatError):
            read_experiment_data(target)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(DataFormatError):
            read_experiment_data(tmp_path / "absent")

    def test_overwrite_replaces_contents(self, tmp_path):
        target = tmp_path / "data"
        write_experiment_data(target, self.data, trajectory=collect_trajectory(self.sys))
        write_experiment_data(target, self.data)
        assert not (target / "traj_x.csv").exists()
        assert sorted(p.name for p in tmp_path.iterdir()) == ["data"]

    def test_system_files(self, tmp_path):
        write_system(tmp_path / "model", self.sys)
        np.testing.assert_array_equal(read_system(tmp_path / "model").C, self.sys.C)


class TestAtomicDirectory:
    def test_failure_leaves_nothing(self, tmp_path):
        target = tmp_path / "out"
        with pytest.raises(RuntimeError):
            with atomic_directory(target) as staging:
                (staging / "partial.csv").write_text("1")
                raise RuntimeError("interrupted")
        assert list(tmp_path.iterdir()) == []

    def test_failure_keeps_existing_target(self, tmp_path):
        target = tmp_path / "out"
        target.mkdir()
        (target / "keep.txt").write_text("old")
        with pytest.raises(RuntimeError):
            with atomic_directory(target):
                raise RuntimeError("interrupted")
        assert (target / "keep.txt").read_text() == "old"


class TestAttackCsv:
    def test_header_and_rows(self, tmp_path):
        sys, _ = degenerate_system(4, seed=0)
        plan = design_attack(collect_default(sys, seed=0), onset_step=2)
        outcome = simulate_attack(sys, plan, np.zeros(sys.m), np.zeros(sys.n), total_steps=8)
        path = write_attack_csv(tmp_path / "attack.csv", outcome)
        lines = path.read_text().splitlines()
        assert lines[0] == "step,state_deviation,output_deviation,y0_nominal,y0_attacked"
        assert len(lines) == 1 + 9
        table = np.loadtxt(path, delimiter=",", skiprows=1)
        np.testing.assert_array_equal(table[:, 0], np.arange(9))
        np.testing.assert_allclose(table[:, 1], outcome.state_deviation, rtol=1e-11)
