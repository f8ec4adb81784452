"""
Modeshape Command Line

Commands: analyze, deform, sweep, hmax, simulate, export.

Exit codes: 0 success, 1 usage, 2 unstable system, 3 numerical failure,
4 I/O failure.
"""

import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional

from loguru import logger
from pydantic import ValidationError

from .analysis.deformation import SWEEP_COLUMNS
from .models.request_models import RunConfig
from .service.analysis_service import AnalysisService, deformation_payload, hmax_payload
from .service.config import Config
from .utils.env_loader import load_root_env
from .utils.exceptions import ConfigError, ModeshapeError, UsageError
from .utils.logger import setup_logger
from .utils.report_writer import write_frame, write_json

CSV_COLUMNS = SWEEP_COLUMNS[:8]
EXIT_OK = 0
EXIT_UNSTABLE = 2
EXIT_NUMERICAL = 3

STIFF_CHAIN_FLAGS = {"smin": "s_min", "smax": "s_max", "coupling": "coupling",
                     "n_slow": "n_slow", "n_fast": "n_fast"}


class ModeshapeArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(message)


def _parse_assignment(text: str, separator: str, flag: str) -> tuple:
    key, sep, value = text.rpartition(separator)
    if not sep or not key:
        raise UsageError(f"{flag} expects name{separator}value, got '{text}'")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise UsageError(f"{flag} value must be numeric, got '{value}'")


def _parse_grid(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise UsageError(f"--hgrid expects comma-separated numbers, got '{text}'")


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser with one subcommand per analysis."""
    common = ModeshapeArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--model", help="Built-in model: smib, smib3, stiff-chain")
    source.add_argument("--linear", help="Linear model JSON file")
    common.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                        help="Built-in model parameter override (repeatable)")
    common.add_argument("--smin", type=float, help="stiff-chain slowest rate")
    common.add_argument("--smax", type=float, help="stiff-chain fastest rate")
    common.add_argument("--coupling", type=float, help="stiff-chain coupling gain")
    common.add_argument("--n-slow", dest="n_slow", type=int, help="stiff-chain slow states")
    common.add_argument("--n-fast", dest="n_fast", type=int, help="stiff-chain fast states")
    common.add_argument("--method", default="tm", help="theta:<t>, bem, tm, dirk2s, heun:<r>, fem")
    common.add_argument("--h", type=float, help="Step size (s)")
    common.add_argument("--hmin", type=float, help="Smallest grid step (s)")
    common.add_argument("--hmax", type=float, help="Largest grid step (s)")
    common.add_argument("--hpoints", type=int, help="Log-spaced grid points")
    common.add_argument("--hgrid", type=_parse_grid, help="Explicit comma-separated grid")
    common.add_argument("--eps-s", dest="eps_s", type=float, help="Max eps_s (%%)")
    common.add_argument("--eps-p", dest="eps_p", type=float, help="Max |eps_p| (%%)")
    common.add_argument("--table", action="store_true", help="Standard threshold scenarios")
    common.add_argument("--n-modes", dest="n_modes", type=int, help="Tracked modes")
    common.add_argument("--top-pf", dest="top_pf", type=int, help="States per mode")
    common.add_argument("--pf-floor", dest="pf_floor", type=float, help="Negligible |p|")
    common.add_argument("--tend", dest="t_end", type=float, help="Simulation end time (s)")
    common.add_argument("--perturb", action="append", default=[], metavar="STATE:+VALUE",
                        help="Initial state perturbation (repeatable)")
    common.add_argument("--consistency-solve", dest="consistency_solve", action="store_true",
                        help="Re-solve inconsistent initial algebraic variables")
    common.add_argument("--out", help="Output file (stdout when omitted)")
    common.add_argument("--format", choices=["csv", "json"], help="Output format")
    common.add_argument("--workers", type=int, help="Concurrent grid points")
    common.add_argument("--config", help="Configuration file")
    common.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING, ERROR")

    parser = ModeshapeArgumentParser(
        prog="modeshape",
        description="Eigenvalue and mode-shape deformation of DAE models under numerical integration")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True
    for name, summary in (
        ("analyze", "Eigenvalues, damping, stiffness ratio and participation factors"),
        ("deform", "eps_s and eps_p of a method at one step size"),
        ("sweep", "eps_s and eps_p over a step-size grid"),
        ("hmax", "Maximum admissible step size under thresholds"),
        ("simulate", "Time-domain simulation"),
        ("export", "Write the linearized built-in model as JSON"),
    ):
        commands.add_parser(name, parents=[common], help=summary, description=summary)
    return parser


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    """
    Translate parsed arguments into a validated RunConfig.

    Raises:
        ConfigError: the combination of flags is invalid
    """
    params: Dict[str, float] = dict(_parse_assignment(p, "=", "--param") for p in args.param)
    for flag, key in STIFF_CHAIN_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            params[key] = value
    perturb: Dict[str, float] = {}
    for item in args.perturb:
        name, value = _parse_assignment(item, ":", "--perturb")
        perturb[name] = perturb.get(name, 0.0) + value

    fields = {
        "model": args.model, "linear": args.linear, "params": params, "method": args.method,
        "h": args.h, "hmin": args.hmin, "hmax": args.hmax, "hpoints": args.hpoints,
        "hgrid": args.hgrid, "eps_s": args.eps_s, "eps_p": args.eps_p, "table": args.table,
        "n_modes": args.n_modes, "top_pf": args.top_pf, "pf_floor": args.pf_floor,
        "t_end": args.t_end, "perturb": perturb, "consistency_solve": args.consistency_solve,
        "out": args.out, "format": args.format, "workers": args.workers,
    }
    try:
        return RunConfig(**{k: v for k, v in fields.items() if v is not None})
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
                             for err in e.errors())
        raise ConfigError(f"Invalid configuration: {problems}") from e


def _sibling(out: Optional[str], suffix: str, extension: Optional[str] = None) -> Optional[Path]:
    if out is None:
        return None
    path = Path(out)
    return path.with_name(f"{path.stem}{suffix}{extension or path.suffix or '.csv'}")


def cmd_analyze(service: AnalysisService) -> int:
    """
    Eigenvalues, participation matrix and a summary with the stiffness
    ratio. CSV output writes <stem>_participation.csv and <stem>_summary.json
    next to --out. Exit 2 when unstable.
    """
    run = service.run
    result = service.analyze()
    if run.format == "json":
        write_json(result.to_dict(), run.out, service.digits)
    else:
        write_frame(result.eigenvalues, run.out, digits=service.digits)
        write_frame(result.participation, _sibling(run.out, "_participation"), digits=service.digits)
        summary = {"model": service.resolve_model().J.name, **result.summary()}
        write_json(summary, _sibling(run.out, "_summary", ".json"), service.digits)
    stiffness = "undefined" if result.stiffness is None else f"{result.stiffness:.{service.digits}g}"
    logger.info(f"{len(result.eigenvalues)} eigenvalues, stiffness ratio {stiffness}, "
                f"{'stable' if result.stable else 'UNSTABLE'}")
    return EXIT_OK if result.stable else EXIT_UNSTABLE


def cmd_deform(service: AnalysisService) -> int:
    """Deformation report at a single step size."""
    run = service.run
    report = service.deform()
    names = service.resolve_model().state_names
    if run.format == "json":
        write_json(deformation_payload(report, names), run.out, service.digits)
    else:
        write_frame(report.to_frame(names)[CSV_COLUMNS], run.out, digits=service.digits)
    logger.info(f"{report.method.label} h={report.h:g}: spectral radius {report.spectral_radius:.6g}, "
                f"commutator defect {report.commutator_defect:.3e}")
    return EXIT_OK


def cmd_sweep(service: AnalysisService) -> int:
    """Sweep table; exit 0 when at least one row succeeded."""
    run = service.run
    frame = service.sweep()
    public = frame[CSV_COLUMNS]
    write_frame(public, run.out, fmt=run.format, digits=service.digits)
    failed = frame["flags"].str.contains("failed")
    logger.info(f"Sweep wrote {len(frame)} rows ({int(failed.sum())} failed)")
    if len(frame) and failed.all():
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_hmax(service: AnalysisService) -> int:
    """Maximum admissible step size JSON."""
    results = service.hmax()
    write_json(hmax_payload(results), service.run.out, service.digits)
    for result in results:
        logger.info(f"{result.method} {result.criteria}: {result.to_dict()['hmax']}")
    return EXIT_OK


def cmd_simulate(service: AnalysisService) -> int:
    """Trajectory CSV; exit 3 when a step failed."""
    run = service.run
    trajectory = service.simulate()
    write_frame(trajectory.to_frame(), run.out, fmt=run.format, digits=service.digits)
    summary = trajectory.summary()
    line = (f"steps={summary['steps']} newton_total={summary['newton_total']} "
            f"newton_max={summary['newton_max']} converged={summary['converged']}")
    if run.out is not None:
        print(line)
    logger.info(line)
    return EXIT_OK if trajectory.converged else EXIT_NUMERICAL


def cmd_export(service: AnalysisService) -> int:
    """Linear model JSON at full precision."""
    write_json(service.export(), service.run.out, digits=None)
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "deform": cmd_deform,
    "sweep": cmd_sweep,
    "hmax": cmd_hmax,
    "simulate": cmd_simulate,
    "export": cmd_export,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one command.

    Args:
        argv: Command-line arguments (sys.argv[1:] when omitted)

    Returns:
        Process exit code
    """
    try:
        args = build_parser().parse_args(argv)
        setup_logger(args.log_level)
        load_root_env()
        settings = Config(args.config)
        logging_cfg = settings.get_logging_config()
        setup_logger(args.log_level or logging_cfg.get('level'),
                     logging_cfg.get('log_dir'),
                     logging_cfg.get('file_rotation', '1 day'),
                     logging_cfg.get('file_retention', '7 days'))
        if not settings.validate_config():
            raise ConfigError("Invalid configuration file")
        run = run_config_from_args(args)
        return COMMANDS[args.command](AnalysisService(run, settings))
    except ModeshapeError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
