"""Command-line entry point: ``geoexp {integrate,sweep,verify,plot-script}``.

Exit codes: 0 success, 1 usage error, 2 solver divergence, 3 failed verification.
"""

from __future__ import annotations

import argparse
import os
import sys

from ..models import DEFAULT_NU
from .config import (DEFAULT_HORIZON_TIME, DEFAULT_MAX_STEPS, ConfigError, ExperimentConfig,
                     SweepConfig, parse_ints, parse_methods, read_config_file)
from .experiments import SUITES, run_integrate, run_suite, run_sweep
from .plotting import SchemaError, build_plot_script, inspect_csv

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _flag(v: str) -> bool:
    low = str(v).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {v!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="geoexp", description="Geometric exponential integrators: experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--config", help="key=value file; command-line flags take precedence")
    common.add_argument("--model", choices=("nls", "kdv"), default="nls")
    common.add_argument("--nu", type=float, default=DEFAULT_NU, help="KdV dispersion")
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iterations", type=int, default=100)
    common.add_argument("--linear", type=_flag, nargs="?", const=True, default=False,
                        help="drop the nonlinear potential")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-o", "--output")

    pi = sub.add_parser("integrate", parents=[common], help="run one trajectory to CSV")
    pi.add_argument("--N", type=int, default=41)
    pi.add_argument("--method", default="exp_midpoint")
    pi.add_argument("--solver", default="fixed_point")
    pi.add_argument("--h", type=float, default=0.01)
    pi.add_argument("--steps", type=int, default=100)
    pi.add_argument("--reference", type=_flag, nargs="?", const=True, default=False,
                    help="add traj_error against an exp_midpoint run at h/100")

    ps = sub.add_parser("sweep", parents=[common], help="maximum converging timestep sweep")
    ps.add_argument("--Ns", default="11,21,41,81")
    ps.add_argument("--methods", default="midpoint",
                    help="comma list; method:solver selects a solver per entry")
    ps.add_argument("--solver", default="fixed_point", help="solver for entries without ':'")
    ps.add_argument("--h-min", type=float, default=1e-6)
    ps.add_argument("--h-max", type=float)
    ps.add_argument("--horizon-steps", type=int, default=100)
    ps.add_argument("--horizon-time", type=float, default=DEFAULT_HORIZON_TIME)
    ps.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    ps.add_argument("--full-grid", type=_flag, nargs="?", const=True, default=False)
    ps.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    pv = sub.add_parser("verify", help="run a pinned verification suite")
    pv.add_argument("suite", choices=(*SUITES, "all"))
    pv.add_argument("--seed", type=int, default=0)

    pp = sub.add_parser("plot-script", help="write a matplotlib script for harness CSVs")
    pp.add_argument("csv", nargs="+")
    pp.add_argument("-o", "--output", default="plots.py")
    return p


def _apply_config_file(parser, sub_name, argv):
    """Parse once to find --config, then re-parse with file values as defaults."""
    args = parser.parse_args(argv)
    path = getattr(args, "config", None)
    if not path:
        return args
    try:
        values = read_config_file(path)
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    subparser = parser._subparsers._group_actions[0].choices[sub_name]
    known = {a.dest for a in subparser._actions}
    unknown = set(values) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    # re-run each value through its action's type so files and flags agree
    converted = {}
    for action in subparser._actions:
        if action.dest in values:
            raw = values[action.dest]
            try:
                converted[action.dest] = action.type(raw) if action.type else raw
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config key {action.dest}: {exc}") from exc
    subparser.set_defaults(**converted)
    return parser.parse_args(argv)


def _cmd_integrate(a, err):
    try:
        cfg = ExperimentConfig(model=a.model, N=a.N, nu=a.nu, method=a.method, solver=a.solver,
                               h=a.h, steps=a.steps, tol=a.tol if a.tol is not None else 1e-12,
                               max_iterations=a.max_iterations,
                               output=a.output or "trajectory.csv", seed=a.seed,
                               reference=a.reference, linear=a.linear)
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    with _open_output(cfg.output) as fh:
        ok, bad_step = run_integrate(cfg, fh)
    if not ok:
        err.write(f"solver failed at step {bad_step}; partial CSV kept in {cfg.output}\n")
        return EXIT_DIVERGED
    return EXIT_OK


def _cmd_sweep(a, err):
    try:
        cfg = SweepConfig(model=a.model, Ns=parse_ints(a.Ns), nu=a.nu,
                          methods=parse_methods(a.methods, a.solver), h_min=a.h_min,
                          h_max=a.h_max, horizon_steps=a.horizon_steps,
                          horizon_time=a.horizon_time, max_steps=a.max_steps,
                          tol=a.tol if a.tol is not None else 1e-10,
                          max_iterations=a.max_iterations, full_grid=a.full_grid,
                          linear=a.linear, workers=a.workers, seed=a.seed,
                          output=a.output or "sweep.csv")
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    with _open_output(cfg.output) as fh:
        results = run_sweep(cfg, fh, progress=lambda msg: err.write(msg + "\n"))
    # a combination with no converging timestep at all is reported as divergence
    return EXIT_DIVERGED if any(r.h_max is None for r in results) else EXIT_OK


def _cmd_verify(a, out):
    checks = run_suite(a.suite, seed=a.seed)
    for c in checks:
        out.write(c.line() + "\n")
    failed = sum(not c.passed for c in checks)
    out.write(f"{len(checks) - failed}/{len(checks)} checks passed\n")
    return EXIT_VERIFY if failed else EXIT_OK


def _cmd_plot_script(a, out):
    infos = []
    for path in a.csv:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc}") from exc
        try:
            infos.append(inspect_csv(path, text))
        except SchemaError as exc:
            raise UsageError(str(exc)) from exc
    script = build_plot_script(infos)
    with _open_output(a.output) as fh:
        fh.write(script)
    out.write(f"wrote {a.output}\n")
    return EXIT_OK


def _open_output(path):
    try:
        return open(path, "w", newline="")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            args = _apply_config_file(build_parser(), args.command, argv)
        if args.command == "integrate":
            return _cmd_integrate(args, sys.stderr)
        if args.command == "sweep":
            return _cmd_sweep(args, sys.stderr)
        if args.command == "verify":
            return _cmd_verify(args, sys.stdout)
        return _cmd_plot_script(args, sys.stdout)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
