"""
CLI commands: collect, subspaces, zeros, feedback, attack, verify, check-env.
"""
import logging
import platform
from typing import Any, Dict

import numpy as np
import scipy

from .attack_designer import deviation_distance, design_attack, detect, simulate_attack
from .base_command import BaseCommand, RunConfig
from .config import Config
from .data_driven import feedback_dd, rstar_dd, sstar_dd, vstar_dd, zero_membership_dd, zeros_dd
from .exceptions import DataFormatError, DegenerateSystemError, NotPersistentlyExcitingError
from .geometric_oracle import (
    invariant_zeros_model,
    rstar_model,
    sstar_model,
    vstar_model,
    zero_sets_match,
)
from .lti_model import ExperimentConfig, collect, collect_trajectory, excitation_ranks
from .serialization import (
    atomic_directory,
    dumps_json,
    matrix_to_json,
    subspace_to_json,
    write_attack_csv,
    write_experiment_data,
    write_json,
    zeros_to_json,
)
from .subspace_core import principal_angle_max, projector_residual, subspaces_equal
from .utils import status
from .verification import run_suite

logger = logging.getLogger(__name__)


def _write_report(config: RunConfig, report: Dict[str, Any]) -> None:
    if config.out:
        path = write_json(config.output_dir("report") / "report.json", report)
        logger.info(f"Report written to {path}")


class CollectCommand(BaseCommand):
    """Simulate open-loop experiments and store them as a data directory."""

    def get_command_name(self) -> str:
        return "collect"

    def get_description(self) -> str:
        return "Run N experiments of horizon T and write X, X0, Y, U with a manifest"

    def run(self, config: RunConfig) -> Dict[str, Any]:
        tol = config.tolerances()
        system, descriptor = self.build_system(config)
        defaults = ExperimentConfig.default_for(system, seed=config.seed, horizon=config.horizon)
        experiment = ExperimentConfig(
            horizon=defaults.horizon,
            experiments=config.experiments or defaults.experiments,
            seed=config.seed,
        )
        data = collect(system, experiment, tol)
        report = excitation_ranks(data, tol)
        if not report.ok:
            status(f"Persistency of excitation fails: rank {report.rank} < {report.required}", ok=False)
            raise NotPersistentlyExcitingError(
                f"rank [X0; U] = {report.rank}, required n + mT = {report.required}; increase --experiments"
            )
        status(f"Persistency of excitation holds: rank {report.rank} = n + mT")

        trajectory = collect_trajectory(system, length=config.trajectory_length, seed=config.seed)
        directory = write_experiment_data(
            config.output_dir("data"),
            data,
            system=descriptor,
            trajectory=trajectory,
            model=system,
        )
        return {
            'data_dir': str(directory),
            'n': data.n,
            'm': data.m,
            'p': data.p,
            'T': data.T,
            'N': data.N,
            'seed': data.seed,
            'shapes': {name: list(getattr(data, name).shape) for name in ('X', 'X0', 'Y', 'U')},
            'excitation': {
                'rank': report.rank,
                'required': report.required,
                'state_rank': report.state_rank,
                'input_rank': report.input_rank,
                'persistently_exciting': report.ok,
            },
        }


class SubspacesCommand(BaseCommand):
    """Compute V*, S* and R* from data, optionally against the model."""

    def get_command_name(self) -> str:
        return "subspaces"

    def get_description(self) -> str:
        return "Compute V*, S* and R* from data (--oracle compares with the model)"

    def run(self, config: RunConfig) -> Dict[str, Any]:
        tol = config.tolerances()
        bundle = self.load_data(config)
        computed = {
            'vstar': vstar_dd(bundle.data, tol),
            'sstar': sstar_dd(bundle.data, tol),
        }
        computed['rstar'] = rstar_dd(bundle.data, tol)
        report: Dict[str, Any] = {name: subspace_to_json(V) for name, V in computed.items()}
        status(
            "dim V* = {}, dim S* = {}, dim R* = {}".format(*(V.dim for V in computed.values()))
        )

        if config.oracle:
            model = self.load_model(config, bundle)
            reference = {
                'vstar': vstar_model(model, tol),
                'sstar': sstar_model(model, tol),
                'rstar': rstar_model(model, tol),
            }
            comparison = {
                name: {
                    'model_dim': reference[name].dim,
                    'max_principal_angle': principal_angle_max(computed[name], reference[name]),
                    'equal': subspaces_equal(computed[name], reference[name], tol),
                }
                for name in computed
            }
            report['oracle'] = comparison
            report['passed'] = all(item['equal'] for item in comparison.values())
            status(f"Oracle agreement: {report['passed']}", ok=report['passed'])

        _write_report(config, self._frame(report))
        return report


class ZerosCommand(BaseCommand):
    """Invariant zeros from the stored single trajectory."""

    def get_command_name(self) -> str:
        return "zeros"

    def get_description(self) -> str:
        return "Compute invariant zeros from data and confirm each with the membership test"

    def run(self, config: RunConfig) -> Dict[str, Any]:
        tol = config.tolerances()
        bundle = self.load_data(config)
        if bundle.trajectory is None:
            raise DataFormatError("Data directory holds no single trajectory (traj_x.csv, traj_u.csv)")

        rstar = rstar_dd(bundle.data, tol)
        if not rstar.is_trivial:
            raise DegenerateSystemError(f"R* has dimension {rstar.dim}; zeros are not isolated")
        vstar = vstar_dd(bundle.data, tol)
        zeros = zeros_dd(bundle.trajectory, vstar, tol)
        membership = [zero_membership_dd(bundle.data, vstar, z, tol, rstar=rstar) for z in zeros]

        report: Dict[str, Any] = {
            'zeros': zeros_to_json(zeros),
            'membership': [candidate.is_zero for candidate in membership],
            'passed': all(candidate.is_zero for candidate in membership),
        }
        status(f"Invariant zeros: {np.round(zeros, 6).tolist()}")

        if config.oracle:
            reference = invariant_zeros_model(self.load_model(config, bundle), tol)
            agree = zero_sets_match(zeros, reference, Config.ZERO_MATCH_TOL)
            report['oracle'] = {'zeros': zeros_to_json(reference), 'equal': agree}
            report['passed'] = report['passed'] and agree
            status(f"Oracle agreement: {agree}", ok=agree)

        _write_report(config, self._frame(report))
        return report


class FeedbackCommand(BaseCommand):
    """Friend of V* (or R*) from the stored single trajectory."""

    def get_command_name(self) -> str:
        return "feedback"

    def get_description(self) -> str:
        return "Compute a gain F with (A + BF) V ⊆ V from one trajectory"

    def run(self, config: RunConfig) -> Dict[str, Any]:
        tol = config.tolerances()
        bundle = self.load_data(config)
        if bundle.trajectory is None:
            raise DataFormatError("Data directory holds no single trajectory (traj_x.csv, traj_u.csv)")

        V = vstar_dd(bundle.data, tol) if config.subspace == "vstar" else rstar_dd(bundle.data, tol)
        F = feedback_dd(bundle.trajectory, V, tol)
        report: Dict[str, Any] = {
            'subspace': config.subspace,
            'dim': V.dim,
            'F': matrix_to_json(F),
        }
        status(f"Feedback for {config.subspace} (dim {V.dim}) computed")

        if config.oracle:
            model = self.load_model(config, bundle)
            residual = projector_residual(V, (model.A + model.B @ F) @ V.basis)
            report['oracle'] = {'invariance_residual': residual}
            report['passed'] = residual <= tol.residual_abs
            status(f"Model invariance residual {residual:.2e}", ok=report['passed'])

        _write_report(config, self._frame(report))
        return report


class AttackCommand(BaseCommand):
    """Design a stealthy attack from data and simulate it on the true system."""

    def get_command_name(self) -> str:
        return "attack"

    def get_description(self) -> str:
        return "Design an attack in Im(U K_0 P), simulate it and export a deviation CSV"

    def run(self, config: RunConfig) -> Dict[str, Any]:
        tol = config.tolerances()
        if config.data:
            bundle = self.load_data(config)
            data, system = bundle.data, self.load_model(config, bundle)
            system_name = bundle.manifest.get('system', {}).get('name', config.system)
        else:
            system, _ = self.build_system(config)
            data = collect(system, ExperimentConfig.default_for(system, seed=config.seed, horizon=config.horizon), tol)
            system_name = config.system

        plan = design_attack(data, tol, attack_energy=config.attack_energy, onset_step=config.onset)
        total_steps = config.steps or plan.window_end
        if config.nominal_input is not None:
            nominal = np.asarray(config.nominal_input)
        elif system_name == "consensus":
            nominal = np.asarray(Config.CONSENSUS_NOMINAL_INPUT)
        else:
            nominal = np.zeros(system.m)
        x0 = np.random.default_rng(config.seed).standard_normal(system.n)

        outcome = simulate_attack(system, plan, nominal, x0, total_steps, threshold=config.threshold)
        stealthy = not detect(outcome, config.threshold)
        window = slice(plan.onset_step, plan.window_end + 1)
        containment = float(np.max(deviation_distance(outcome, plan.rstar)[window]))

        report = {
            'stealthy': stealthy,
            'passed': stealthy,
            'onset_step': plan.onset_step,
            'horizon': plan.horizon,
            'total_steps': total_steps,
            'stealthy_until': outcome.stealthy_until,
            'attack_energy': plan.energy,
            'generators': int(plan.generators.shape[1]),
            'rstar_dim': plan.rstar.dim,
            'max_output_deviation': outcome.max_output_deviation(),
            'max_state_deviation': outcome.max_state_deviation(),
            'max_distance_to_rstar': containment,
        }

        with atomic_directory(config.output_dir("attack")) as staging:
            write_attack_csv(staging / "attack.csv", outcome)
            (staging / "report.json").write_text(dumps_json(self._frame(report)), encoding='utf-8')
        report['csv'] = str(config.output_dir("attack") / "attack.csv")

        status(f"stealthy: {'true' if stealthy else 'false'}", ok=stealthy)
        status(
            f"Max state deviation {report['max_state_deviation']:.3g}, "
            f"max output deviation {report['max_output_deviation']:.2e}",
            ok=stealthy,
        )
        return report


class VerifyCommand(BaseCommand):
    """Randomized oracle-agreement suite."""

    def get_command_name(self) -> str:
        return "verify"

    def get_description(self) -> str:
        return "Run randomized trials comparing every data-driven result with the model"

    def run(self, config: RunConfig) -> Dict[str, Any]:
        suite = run_suite(config.trials, config.seed, config.workers, config.tolerances())
        report = suite.to_dict()
        status(
            f"{len(suite.trials) - len(suite.failures)}/{len(suite.trials)} trials passed",
            ok=suite.passed,
        )
        _write_report(config, self._frame(report))
        return report


class CheckEnvCommand(BaseCommand):
    """Resolved configuration and library versions."""

    def get_command_name(self) -> str:
        return "check-env"

    def get_description(self) -> str:
        return "Check configuration and print the resolved settings"

    def run(self, config: RunConfig) -> Dict[str, Any]:
        Config.validate_config()
        return {
            'python': platform.python_version(),
            'numpy': np.__version__,
            'scipy': scipy.__version__,
            'output_dir': Config.OUTPUT_DIR,
            'tolerances': {
                'rank_rel': config.tol_rank,
                'subspace_eq': config.tol_eq,
                'residual_abs': config.tol_residual,
            },
            'builtin_systems': {
                name: Config.get_system_description(name) for name in Config.get_builtin_systems()
            },
        }
