"""
Command-Line Interface
Subcommands for instance generation, enumeration, sampling studies and report inspection.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical
divergence, 4 oracle budget exceeded.
"""

from typing import Any, Dict, List, Optional
import argparse
import logging
import os
import sys

from pydantic import ValidationError

from cim_service import SamplingService
from crystal import DivergenceError
from data_io import (
    load_config,
    load_problem,
    load_report,
    read_trajectory_csv,
    records_to_frame,
    save_level_set,
    save_problem,
    save_report,
    write_csv,
)
from gaussian_core import NumericalDegeneracyError
from ising import OracleBudgetError, generate_sk1, solve_levels
from models import RunConfig
from report_explainer import ReportExplainer

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ORACLE = 4

SEED_ENV = "CIM_SEED"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cim", description="Measurement-feedback coherent Ising machine sampler")
    parser.add_argument("--log-level", default="INFO", help="Root logging level (DEBUG, INFO, WARNING, ...)")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate-sk1", help="Write a random SK1 problem file")
    gen.add_argument("--n", type=int, required=True, help="Number of spins")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    enum = sub.add_parser("enumerate", help="Write the lowest energy levels of a problem")
    enum.add_argument("--problem", required=True)
    enum.add_argument("--levels", type=int, default=2)
    enum.add_argument("--method", choices=["brute", "pt"], default="brute")
    enum.add_argument("--replicas", type=int, default=32)
    enum.add_argument("--sweeps", type=int, default=100_000)
    enum.add_argument("--seed", type=int, default=0)
    enum.add_argument("--out", required=True)

    for name, help_text in [
        ("sample", "Run a trajectory ensemble and write a sampling report"),
        ("scan", "Scan (alpha_fb, pump_r) and write a scan report"),
        ("scaling", "Run the size-scaling study"),
        ("simulate", "Write one trajectory as CSV"),
        ("converge", "Compare discrete and continuous-time trajectories"),
        ("finesse", "T_samp of the first ground configuration versus T_decay"),
        ("compare", "Scan alternative machine models on one problem"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", help="JSON run configuration")
        cmd.add_argument("--problem", help="Problem file (overrides the config)")
        cmd.add_argument("--targets", help="Level-set file (skips the oracle)")
        cmd.add_argument("--trajectories", type=int)
        cmd.add_argument("--roundtrips", type=int)
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--mode", help="gaussian, coherent or meanfield")
        cmd.add_argument("--workers", type=int)
        cmd.add_argument("--levels", type=int)
        cmd.add_argument("--method", choices=["brute", "pt"])
        cmd.add_argument("--out", help="Report path (CSV path for simulate)")
        cmd.add_argument("--emit-trajectory", dest="emit_trajectory", help="CSV path for raw homodyne records")
        if name == "simulate":
            cmd.add_argument("--index", type=int, default=0, help="Trajectory index (selects the random stream)")

    explain = sub.add_parser("explain", help="Summarize an existing report")
    source = explain.add_mutually_exclusive_group(required=True)
    source.add_argument("--report", help="Report JSON written by another subcommand")
    source.add_argument("--trajectory", help="Raw homodyne-record CSV written by sample --emit-trajectory")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < config file < command-line flags < CIM_SEED."""
    config = load_config(args.config) if args.config else RunConfig()
    data: Dict[str, Any] = config.model_dump()

    if args.problem:
        data["problem"] = {"path": args.problem}
    sampling = data["sampling"]
    for flag, key in [("trajectories", "n_traj"), ("roundtrips", "t_sim"), ("seed", "seed"),
                      ("workers", "workers"), ("levels", "levels"), ("method", "oracle")]:
        value = getattr(args, flag, None)
        if value is not None:
            sampling[key] = value
    if args.mode is not None:
        data["machine"]["mode"] = args.mode
    if args.emit_trajectory:
        sampling["emit_trajectory"] = True
        data["output"]["trajectory_csv"] = args.emit_trajectory
    if args.out:
        data["output"]["report"] = args.out

    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            sampling["seed"] = int(env_seed)
        except ValueError as e:
            raise ValueError(f"{SEED_ENV} must be an integer, got {env_seed!r}") from e

    return RunConfig.model_validate(data)


def cmd_generate(args: argparse.Namespace) -> int:
    problem = generate_sk1(args.n, args.seed)
    save_problem(problem, args.out)
    return EXIT_OK


def cmd_enumerate(args: argparse.Namespace) -> int:
    problem = load_problem(args.problem)
    levels = solve_levels(problem, args.levels, args.method, args.replicas, args.sweeps, args.seed)
    save_level_set(levels, args.out)
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    service = SamplingService(config, targets_path=args.targets)
    report, records = service.sample()
    save_report(report, config.output.report)
    if config.output.trajectory_csv:
        write_csv(records_to_frame(records), config.output.trajectory_csv)
    print(service.explainer.explain_sampling(report))
    return EXIT_OK


def cmd_scan(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    service = SamplingService(config, targets_path=args.targets)
    report = service.scan()
    save_report(report, config.output.report)
    print(service.explainer.explain_scan(report))
    return EXIT_OK


def cmd_scaling(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    service = SamplingService(config)
    report = service.scaling()
    save_report(report, config.output.report)
    print(service.explainer.explain_scaling(report))
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    frame, _ = SamplingService(config).simulate(args.index)
    write_csv(frame, args.out or "trajectory.csv")
    return EXIT_OK


def cmd_converge(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    service = SamplingService(config)
    report = service.converge()
    save_report(report, config.output.report)
    print(service.explainer.explain_convergence(report))
    return EXIT_OK


def cmd_finesse(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    service = SamplingService(config, targets_path=args.targets)
    report = service.finesse()
    save_report(report, config.output.report)
    print(service.explainer.explain_finesse(report))
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    service = SamplingService(config, targets_path=args.targets)
    report = service.compare()
    save_report(report, config.output.report)
    print(service.explainer.explain_comparison(report))
    return EXIT_OK


def cmd_explain(args: argparse.Namespace) -> int:
    explainer = ReportExplainer()
    if args.trajectory:
        print(explainer.explain_trajectories(read_trajectory_csv(args.trajectory)))
    else:
        print(explainer.explain(load_report(args.report)))
    return EXIT_OK


COMMANDS = {
    "generate-sk1": cmd_generate,
    "enumerate": cmd_enumerate,
    "sample": cmd_sample,
    "scan": cmd_scan,
    "scaling": cmd_scaling,
    "simulate": cmd_simulate,
    "converge": cmd_converge,
    "finesse": cmd_finesse,
    "compare": cmd_compare,
    "explain": cmd_explain,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one subcommand and map failures to exit codes."""
    args = build_parser().parse_args(argv)

    try:
        logging.getLogger().setLevel(args.log_level.upper())
        return COMMANDS[args.command](args)
    except ValidationError as e:
        for error in e.errors():
            location = ".".join(str(part) for part in error["loc"])
            print(f"Invalid configuration at {location}: {error['msg']}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleBudgetError as e:
        print(f"Oracle budget exceeded: {e}", file=sys.stderr)
        return EXIT_ORACLE
    except (DivergenceError, NumericalDegeneracyError) as e:
        print(f"Numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, FileNotFoundError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_CONFIG
