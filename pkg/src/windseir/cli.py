"""Command-line interface.

Subcommands: ``run`` (simulate a scenario), ``check`` (validate a config and
echo it with defaults applied), ``eig`` (principal eigenvalue and persistence
criterion on the scenario domain), ``plot`` (render figures from a run
directory).  The scenario argument is a config file path or a bundled preset
name.  Exit codes: 0 success, 2 configuration error, 3 invariant/stability
violation, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .config import compile_scenario, load_config, to_dict
from .errors import ConfigError, ConvergenceError, InvariantViolation
from .grid import full_mask
from .output import write_snapshot
from .plots import emit_plots
from .presets import PRESET_NAMES, preset_config
from .scenario import run_scenario
from .spectral import persistence_criterion, principal_eigenvalue

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_IO = 4


def resolve_config(arg: str):
    if arg in PRESET_NAMES:
        return preset_config(arg)
    path = Path(arg)
    if path.exists():
        return load_config(path)
    raise ConfigError(
        f"{arg!r} is neither a config file nor a preset (presets: {', '.join(PRESET_NAMES)})"
    )


def _cmd_run(args) -> int:
    cfg = resolve_config(args.scenario)
    artifacts = run_scenario(cfg, output_root=args.out)
    print(f"run complete: {artifacts.run_dir}")
    print(f"  steps: {artifacts.result.n_steps}  dt: {artifacts.result.dt:.6g} months")
    for ev in artifacts.events:
        print(
            f"  outbreak in subregion {ev.subregion_id} "
            f"(x={ev.center[0]:g} km) at t={ev.t_onset:.2f} months"
        )
    if not artifacts.events:
        print("  no outbreak events")
    print(f"  report: {artifacts.report}")
    return EXIT_OK


def _cmd_check(args) -> int:
    cfg = resolve_config(args.scenario)
    compile_scenario(cfg)
    sys.stdout.write(yaml.safe_dump(to_dict(cfg), sort_keys=False))
    return EXIT_OK


def _cmd_eig(args) -> int:
    cfg = resolve_config(args.scenario)
    scenario = compile_scenario(cfg)
    mask = full_mask(scenario.grid)
    result = principal_eigenvalue(
        scenario.params.d,
        scenario.params.beta,
        mask,
        scenario.grid.cell_size,
        tol=args.tol,
        max_iter=args.max_iter,
    )
    check = persistence_criterion(
        scenario.params.beta, scenario.grid, float(scenario.params.d.max())
    )
    print(f"principal eigenvalue: {result.lambda1:.8g} per month")
    print(f"  iterations: {result.iterations}, residual: {result.residual:.3e}")
    print(
        f"persistence criterion: integral(beta) = {check.lhs:.6g} "
        f"{'>' if check.satisfied else '<='} pi^2 D_max / 2 = {check.rhs:.6g} "
        f"-> {'satisfied' if check.satisfied else 'not satisfied'}"
    )
    if args.out:
        write_snapshot(args.out, result.eigenfunction, scenario.grid, 0.0)
        print(f"eigenfunction written to {args.out}")
    return EXIT_OK


def _cmd_plot(args) -> int:
    written = emit_plots(args.run_dir)
    for path in written:
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="windseir",
        description="wind-aided vector-host epidemic simulator on a structured grid",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and write its artifacts")
    p_run.add_argument("scenario", help="config file path or preset name")
    p_run.add_argument("--out", default=None, help="output root for relative run directories")
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check", help="validate a config; echo it with defaults applied")
    p_check.add_argument("scenario")
    p_check.set_defaults(func=_cmd_check)

    p_eig = sub.add_parser("eig", help="principal eigenvalue and persistence criterion")
    p_eig.add_argument("scenario")
    p_eig.add_argument("--tol", type=float, default=1e-8, help="Rayleigh-quotient change tolerance")
    p_eig.add_argument("--max-iter", type=int, default=2_000_000)
    p_eig.add_argument("--out", default=None, help="write the eigenfunction grid here")
    p_eig.set_defaults(func=_cmd_eig)

    p_plot = sub.add_parser("plot", help="render figures from a run directory")
    p_plot.add_argument("run_dir")
    p_plot.set_defaults(func=_cmd_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvariantViolation, ConvergenceError) as exc:
        print(f"runtime violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
