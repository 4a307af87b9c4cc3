import argparse
from pathlib import Path
from typing import Callable, Dict, List, Optional
from pydantic import ValidationError

from app.commands.common import ScenarioOutcome, apply_overrides
from app.commands.energy_commands import run_energy
from app.commands.interface_commands import run_boundedness, run_impedance, run_nonreciprocity
from app.commands.simulation_commands import run_simulate
from app.commands.spectral_commands import run_harmonics, run_hbm
from app.commands.validation_commands import run_converge, run_validate
from app.config_settings import settings
from app.exceptions import CheckFailedError, ConfigurationError, InterfaceSimError
from app.models.config_models import ExperimentConfig
from app.services.config_parser import load_config
from app.services.output_writer import write_outputs
from logger_config import logger


EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

Runner = Callable[[ExperimentConfig, int], ScenarioOutcome]

# Register scenarios
SCENARIO_RUNNERS: Dict[str, Runner] = {
    "simulate": run_simulate,
    "validate": run_validate,
    "converge": run_converge,
    "energy": run_energy,
    "hbm": run_hbm,
    "harmonics": run_harmonics,
    "impedance": run_impedance,
    "nonreciprocity": run_nonreciprocity,
    "boundedness": run_boundedness,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modint",
        description="Elastic waves across a time-modulated imperfect interface: scenarios and checks",
    )
    subparsers = parser.add_subparsers(dest="scenario", required=True, metavar="SCENARIO")
    for name, runner in SCENARIO_RUNNERS.items():
        sub = subparsers.add_parser(name, help=(runner.__doc__ or "").strip().splitlines()[0])
        sub.add_argument("--config", type=Path, default=None,
                         help=f"YAML experiment file (default: configs/{name}.yaml)")
        sub.add_argument("--out", type=Path, default=None, help="Output directory")
        sub.add_argument("--nx", type=int, default=None, help="Override the number of grid cells")
        sub.add_argument("--fm", type=float, default=None, help="Override the modulation frequency (Hz)")
        sub.add_argument("--workers", type=int, default=None, help="Process pool size for sweeps")
        sub.add_argument("--seedless", action="store_true",
                         help="Deterministic operation; no random state is drawn anywhere")
    return parser


def default_config_path(scenario: str) -> Path:
    return Path(settings.PROJECT_ROOT) / "configs" / f"{scenario}.yaml"


def run_scenario(scenario: str, config: ExperimentConfig, out_dir: Optional[Path] = None,
                 workers: Optional[int] = None, seedless: bool = False) -> ScenarioOutcome:
    """
    Run one scenario and write its tables, summary and plot script.

    Raises:
        CheckFailedError: a built-in check failed (outputs are written first)
    """
    workers = settings.MAX_WORKERS if workers is None else workers
    outcome = SCENARIO_RUNNERS[scenario](config, workers)
    target = out_dir or Path(config.run.output_dir or Path(settings.OUTPUT_DIR) / scenario)
    summary = outcome.summary(config)
    summary["seedless"] = seedless
    write_outputs(outcome.tables, target, summary=summary, name=scenario)
    outcome.raise_for_checks()
    return outcome


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    try:
        config = load_config(args.config or default_config_path(args.scenario))
        config = apply_overrides(config, nx=args.nx, fm=args.fm)
        if config.run.scenario not in (None, args.scenario):
            logger.warning(f"config is tagged for '{config.run.scenario}', running '{args.scenario}'")
        if args.workers is not None and args.workers < 1:
            raise ConfigurationError(f"--workers must be at least 1, got {args.workers}")
        run_scenario(args.scenario, config, args.out, args.workers, args.seedless)
        logger.info(f"{args.scenario}: all checks passed")
        return EXIT_OK
    except (ConfigurationError, ValidationError) as e:
        logger.error(f"Configuration error: {str(e)}")
        return EXIT_USAGE
    except CheckFailedError as e:
        logger.error(str(e))
        return EXIT_FAILED
    except InterfaceSimError as e:
        logger.error(f"Error running {args.scenario}: {str(e)}")
        return EXIT_FAILED
    except Exception as e:
        logger.exception(f"Unexpected error running {args.scenario}: {str(e)}")
        return EXIT_FAILED


if __name__ == "__main__":
    raise SystemExit(main())
