#!/usr/bin/env python3
"""
Main entry point for the data-driven geometric control toolkit.

This script provides the ddgeo command-line interface: data collection,
subspace and zero computation, feedback design, stealthy attack
simulation and the randomized verification suite.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

# Add src directory to Python path
src_path = Path(__file__).parent / "src"
sys.path.insert(0, str(src_path))

try:
    from src.base_command import CommandResult, RunConfig
    from src.command_factory import CommandFactory
    from src.config import Config
    from src.utils import EXIT_FAILURE, EXIT_VALIDATION, format_duration, status
except ImportError as e:
    print(f"❌ Import error: {e}", file=sys.stderr)
    print("Please ensure all dependencies are installed by running:", file=sys.stderr)
    print("pip install -r requirements.txt", file=sys.stderr)
    sys.exit(1)

# argparse destinations that are not RunConfig fields
_CLI_ONLY = ('debug', 'config')


def setup_logging(debug: bool = False):
    """Setup logging configuration."""
    level = logging.DEBUG if debug else getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        stream=sys.stderr,
    )


def _common_arguments() -> argparse.ArgumentParser:
    """Flags shared by every subcommand; defaults are None so config files can fill them."""
    parent = argparse.ArgumentParser(add_help=False)

    system = parent.add_argument_group("system")
    system.add_argument(
        "--system",
        choices=Config.get_builtin_systems(),
        help="Builtin system (default: consensus)",
    )
    system.add_argument("--system-dir", help="Directory with A.csv, B.csv, C.csv instead of a builtin system")
    system.add_argument("--dims", type=int, nargs="+", metavar="N", help="n [m [p]] for random/degenerate systems")
    system.add_argument("--zeros", type=float, nargs="+", help="Zeros of the siso-zero system")
    system.add_argument("--poles", type=float, nargs="+", help="Poles of the siso-zero system")

    data = parent.add_argument_group("data")
    data.add_argument("--horizon", type=int, help="Experiment horizon T (default: n)")
    data.add_argument("--experiments", type=int, help="Number of experiments N (default: n + mT + 2n)")
    data.add_argument("--trajectory-length", type=int, help="Length of the single trajectory (default: 2(n+m))")
    data.add_argument("--seed", type=int, help=f"Random seed (default: {Config.DEFAULT_SEED})")
    data.add_argument("--data", help="Experiment data directory written by 'collect'")
    data.add_argument("--out", help=f"Output directory (default: under {Config.OUTPUT_DIR})")

    numerics = parent.add_argument_group("numerics")
    numerics.add_argument("--tol-rank", type=float, help=f"Relative rank tolerance (default: {Config.RANK_TOL})")
    numerics.add_argument("--tol-eq", type=float, help=f"Subspace equality angle (default: {Config.SUBSPACE_EQ_TOL})")
    numerics.add_argument("--tol-residual", type=float, help=f"Residual tolerance (default: {Config.RESIDUAL_TOL})")
    numerics.add_argument("--oracle", action="store_true", default=None, help="Compare with the model")
    numerics.add_argument("--subspace", choices=("vstar", "rstar"), help="Subspace for 'feedback' (default: vstar)")

    attack = parent.add_argument_group("attack")
    attack.add_argument("--attack-energy", type=float, help=f"Norm of A_T (default: {Config.ATTACK_ENERGY})")
    attack.add_argument("--onset", type=int, help=f"Attack onset step (default: {Config.ATTACK_ONSET})")
    attack.add_argument("--steps", type=int, help="Simulated steps (default: onset + T)")
    attack.add_argument("--threshold", type=float, help=f"Detection threshold (default: {Config.DETECTION_THRESHOLD})")
    attack.add_argument("--nominal-input", type=float, nargs="+", help="Constant nominal input u")

    verify = parent.add_argument_group("verify")
    verify.add_argument("--trials", type=int, help=f"Randomized trials (default: {Config.VERIFY_TRIALS})")
    verify.add_argument("--workers", type=int, help=f"Worker threads (default: {Config.VERIFY_WORKERS})")

    parent.add_argument("--config", help="JSON file with run parameters (command-line flags take precedence)")
    parent.add_argument("--debug", action="store_true", help="Enable debug mode with verbose logging")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddgeo",
        description="Data-driven geometric control: V*, S*, R*, friends, invariant zeros and stealthy attacks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  ddgeo collect --system consensus --out data/consensus     # Collect data
  ddgeo subspaces --data data/consensus --oracle             # V*, S*, R* vs model
  ddgeo zeros --data data/siso                               # Invariant zeros
  ddgeo feedback --data data/consensus                       # Friend of V*
  ddgeo attack --system consensus --out runs/attack          # Stealthy attack CSV
  ddgeo verify --trials 100                                  # Randomized suite
  ddgeo check-env                                            # Resolved settings
        """,
    )
    parent = _common_arguments()
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name in CommandFactory.get_supported_commands():
        subparsers.add_parser(
            name,
            parents=[parent],
            help=CommandFactory.get_command_description(name),
        )
    return parser


def load_config_file(path: str) -> Dict[str, Any]:
    """
    Read run parameters from a JSON object.

    Raises:
        ValueError: If the file is not a JSON object
    """
    try:
        values = json.loads(Path(path).read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise ValueError(f"Config file {path} is not valid JSON: {e}") from e
    if not isinstance(values, dict):
        raise ValueError(f"Config file {path} must hold a JSON object")
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge the config file (if any) with explicit flags into a RunConfig."""
    values: Dict[str, Any] = load_config_file(args.config) if args.config else {}
    values.update({key: value for key, value in vars(args).items() if key not in _CLI_ONLY and value is not None})
    return RunConfig.from_mapping(values)


def emit(result: CommandResult) -> None:
    """Print the JSON report to stdout and a status line to stderr."""
    print(json.dumps(result.report, ensure_ascii=False, indent=2))
    duration = format_duration(result.elapsed or 0.0)
    if result.success:
        status(f"{result.command} finished in {duration}")
    else:
        status(f"{result.command} failed (exit {result.exit_code}): {result.error_message}", ok=False)


def run_cli(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run one command and return the exit code.

    Exit codes: 0 success, 1 I/O or unexpected error, 2 invalid input,
    3 numerical verification failure.
    """
    args = build_parser().parse_args(argv)
    setup_logging(args.debug)
    logger = logging.getLogger(__name__)

    print("📐 Data-Driven Geometric Control", file=sys.stderr)
    print("=" * 50, file=sys.stderr)

    try:
        config = resolve_config(args)
    except (ValueError, OSError) as e:
        logger.error(f"Invalid configuration: {e}")
        print(json.dumps({
            'schema_version': Config.SCHEMA_VERSION,
            'command': args.command,
            'error': {'type': type(e).__name__, 'message': str(e)},
        }, indent=2))
        status(f"Invalid configuration: {e}", ok=False)
        return EXIT_FAILURE if isinstance(e, OSError) else EXIT_VALIDATION

    command = CommandFactory.create_command(config.command)
    result = command.execute(config)
    emit(result)

    if args.debug and not result.success:
        logger.debug(f"Resolved configuration: {config.to_dict()}")
    return result.exit_code


def main():
    """Main function to run the command line."""
    try:
        sys.exit(run_cli())
    except KeyboardInterrupt:
        print("\n\n👋 Interrupted by user", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
