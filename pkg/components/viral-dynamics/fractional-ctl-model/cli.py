"""
Command-line front end for the fractional CTL model.

Subcommands:
- simulate     trajectory CSVs (and SVG charts) per (kind, alpha)
- equilibria   R0, phi0, regime and equilibria with residuals
- sweep        R0 surface over two parameters as long-format CSV
- regimes      coexistence map over two parameters
- sensitivity  sensitivity indices of R0 with a finite-difference check
- validate     solver and analysis validation suite

Exit status is 0 on success, 1 on numerical, I/O or validation failure and 2
on invalid configuration or arguments.
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from artifact_writer import (
    render_dynamics_svg,
    render_surface_svg,
    trajectory_file_name,
    write_regime_csv,
    write_sweep_csv,
    write_trajectory_csv,
)
from ctl_model import ParameterError, summarize
from equilibrium_analysis import (
    SENSITIVITY_PARAMETERS,
    equilibrium_report,
    finite_difference_indices,
    sensitivity_indices,
)
from fractional_solver import SolverError
from parameter_sweep import SweepError, r0_surface, regime_map, trajectory_suite
from run_config import ConfigError, RunConfig, RunConfigLoader
from validation_suite import MODEL_HORIZON, WeightPerturbationHook, run_validation_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", action="append", default=[], help="YAML or JSON run configuration (repeatable)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--kind", action="append", choices=["f1", "f2", "f3", "f4"], help="proliferation law (repeatable)")
    common.add_argument("--alpha", action="append", type=float, help="fractional order (repeatable)")
    common.add_argument("--h", type=float, help="step size in days")
    common.add_argument("--t-end", type=float, help="integration horizon in days")
    common.add_argument("--svg", action="store_true", default=None, help="also render SVG charts")
    common.add_argument("--axis", action="append", help="name:low:high:count[:log] (two required for sweeps)")
    common.add_argument("--workers", type=int, help="worker threads for sweeps and suites")
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")

    parser = argparse.ArgumentParser(
        prog="ctl-model",
        description="Fractional-order within-host SARS-CoV-2 / CTL model",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("simulate", parents=[common], help="integrate trajectories")
    subparsers.add_parser("equilibria", parents=[common], help="equilibrium report")
    subparsers.add_parser("sweep", parents=[common], help="R0 surface")
    subparsers.add_parser("regimes", parents=[common], help="coexistence map")
    subparsers.add_parser("sensitivity", parents=[common], help="sensitivity indices")
    validate = subparsers.add_parser("validate", parents=[common], help="validation suite")
    validate.add_argument("--perturb-weights", type=float, help=argparse.SUPPRESS)
    return parser


def load_config(args: argparse.Namespace) -> RunConfigLoader:
    overrides: Dict[str, Any] = {
        "outputs.directory": args.out,
        "model.kinds": args.kind,
        "model.alphas": args.alpha,
        "solver.step_size": args.h,
        "solver.t_end": args.t_end,
        "outputs.svg": args.svg,
        "sweep.axes": args.axis,
        "sweep.workers": args.workers,
        "logging.level": args.log_level,
    }
    return RunConfigLoader(config_files=args.config, overrides=overrides)


def _axes(run: RunConfig):
    if len(run.axes) != 2:
        raise SweepError(f"Exactly two axes are required, got {len(run.axes)}")
    return run.axes[0], run.axes[1]


def cmd_simulate(run: RunConfig, resolved: Dict[str, Any]) -> int:
    suite = trajectory_suite(
        run.params,
        run.alphas,
        run.kinds,
        run.initial_state,
        run.solver,
        workers=run.workers,
    )
    for suite_run in suite.runs:
        path = run.outputs.directory / trajectory_file_name(suite_run.kind, suite_run.alpha)
        write_trajectory_csv(path, suite_run.trajectory, suite_run.kind, resolved)
        summary = summarize(suite_run.trajectory)
        settle = ", ".join(
            f"{name}={ratio:.2e}" for name, ratio in summary.settle_ratios.items()
        )
        print(
            f"{suite_run.kind.value} alpha={suite_run.alpha:g}: "
            f"peak V={summary.peak_viral_load:.6g} at t={summary.peak_viral_load_time:g}, "
            f"terminal {summary.terminal_state.to_dict()}, settle ({settle}) -> {path}"
        )

    if run.outputs.svg:
        for alpha in run.alphas:
            runs = [(r.kind, r.trajectory) for r in suite.runs if r.alpha == alpha]
            render_dynamics_svg(
                run.outputs.directory / f"dynamics_alpha{alpha:g}.svg", alpha, runs
            )
    return EXIT_OK


def cmd_equilibria(run: RunConfig, resolved: Dict[str, Any]) -> int:
    report = equilibrium_report(run.params, run.kinds[0])
    print(f"R0      = {report.r0:.12g}")
    print(f"phi0    = {report.phi0:.12g}")
    print(f"regime  = {report.regime.value}")
    for name, state in report.equilibria().items():
        values = ", ".join(f"{key}={value:.12g}" for key, value in state.to_dict().items())
        print(f"{name}: ({values})  residual={report.residuals[name]:.3e}")
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK


def cmd_sweep(run: RunConfig, resolved: Dict[str, Any]) -> int:
    axis_x, axis_y = _axes(run)
    grid = r0_surface(run.params, axis_x, axis_y, workers=run.workers)
    path = run.outputs.directory / f"r0_surface_{axis_x.name}_{axis_y.name}.csv"
    write_sweep_csv(path, grid, resolved)
    if run.outputs.svg:
        render_surface_svg(path.with_suffix(".svg"), grid, axis_x.log, axis_y.log)
    print(f"R0 range [{grid.values.min():.6g}, {grid.values.max():.6g}] -> {path}")
    return EXIT_OK


def cmd_regimes(run: RunConfig, resolved: Dict[str, Any]) -> int:
    axis_x, axis_y = _axes(run)
    grid = regime_map(run.params, axis_x, axis_y, workers=run.workers)
    path = run.outputs.directory / f"regimes_{axis_x.name}_{axis_y.name}.csv"
    write_regime_csv(path, grid, resolved)
    counts: Dict[str, int] = {}
    for row in grid.regimes:
        for regime in row:
            counts[regime.value] = counts.get(regime.value, 0) + 1
    print(f"Regime counts {counts} -> {path}")
    return EXIT_OK


def cmd_sensitivity(run: RunConfig, resolved: Dict[str, Any]) -> int:
    closed = sensitivity_indices(run.params)
    estimate = finite_difference_indices(run.params)
    print(f"{'parameter':<10}{'sign':<6}{'index':>14}{'finite diff':>16}{'rel diff':>12}")
    for name in SENSITIVITY_PARAMETERS:
        value = closed.indices[name]
        difference = abs(value - estimate.indices[name]) / abs(value)
        print(
            f"{name:<10}{closed.sign(name):<6}{value:>+14.6f}"
            f"{estimate.indices[name]:>+16.9f}{difference:>12.2e}"
        )
    return EXIT_OK


def cmd_validate(
    run: RunConfig, resolved: Dict[str, Any], args: argparse.Namespace
) -> int:
    hooks = []
    if args.perturb_weights is not None:
        hooks.append(WeightPerturbationHook(args.perturb_weights))
    report = run_validation_suite(
        step_size=args.h,
        model_horizon=args.t_end or MODEL_HORIZON,
        hooks=hooks,
    )
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        print(
            f"[{status}] {check.name}: measured {check.measured:.3e} "
            f"(allowed {check.allowed:.3e}) {check.detail}"
        )
    if not report.passed:
        for check in report.failures():
            print(
                f"validation failed: {check.name} measured {check.measured:.3e} "
                f"allowed {check.allowed:.3e}",
                file=sys.stderr,
            )
        return EXIT_FAILURE
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "equilibria": cmd_equilibria,
    "sweep": cmd_sweep,
    "regimes": cmd_regimes,
    "sensitivity": cmd_sensitivity,
}


def _configure_logging(level: str):
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        loader = load_config(args)
        run = loader.build()
    except (ConfigError, SweepError, ParameterError) as e:
        _configure_logging("INFO")
        logger.error(f"Invalid configuration: {e}")
        return EXIT_USAGE
    _configure_logging(run.log_level)

    resolved = loader.resolved()
    try:
        if args.command == "validate":
            return cmd_validate(run, resolved, args)
        return COMMANDS[args.command](run, resolved)
    except (SweepError, ParameterError) as e:
        logger.error(f"Invalid request: {e}")
        return EXIT_USAGE
    except SolverError as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_FAILURE
    except OSError as e:
        logger.error(f"I/O failure: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
