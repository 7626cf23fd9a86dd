"""Command-line entry point: ``mpip solve | cond-experiment | bench``."""

from __future__ import annotations

import argparse
import logging
import os
import pathlib
import sys
import time

from . import __version__
from .experiments import (
    DEFAULT_KS,
    HALF,
    SINGLE,
    bench,
    cond_experiment,
    format_bench_table,
    write_bench_csv,
    write_cond_csv,
    write_timings_csv,
)
from .ipm import ITERATION_LIMIT, OPTIMAL, SolverParams, solve
from .linalg import SPACINGS
from .mps import MpsError, ModelError, read_mps, recover_original_solution, to_standard_form
from .policy import MODES

EXIT_OK, EXIT_USAGE, EXIT_NOT_OPTIMAL = 0, 1, 2

# CLI flag -> SolverParams field
PARAM_FLAGS = {
    "beta1": "beta1", "beta2": "beta2", "beta3": "beta3", "beta4": "beta4",
    "gamma": "gamma", "gamma-p": "gamma_p", "gamma-d": "gamma_d",
    "tau1": "tau1", "tau2": "tau2", "rho": "rho", "delta": "delta",
    "eps": "eps", "eps-p": "eps_p", "eps-d": "eps_d", "omega": "omega", "c-m": "c_m",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_solver_flags(p):
    for flag, field in PARAM_FLAGS.items():
        p.add_argument(f"--{flag}", dest=field, type=float, default=None, metavar="X")
    p.add_argument("--max-iterations", type=int, default=None)
    p.add_argument("--mode", choices=MODES, default="auto")
    p.add_argument("--switch-factor", type=float, default=0.75)


def _params(args) -> SolverParams:
    kw = {f: getattr(args, f) for f in PARAM_FLAGS.values() if getattr(args, f) is not None}
    if args.max_iterations is not None:
        kw["max_iterations"] = args.max_iterations
    return SolverParams(**kw)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mpip", description="Mixed-precision interior-point solver for dense LPs.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve an LP stored in MPS format")
    s.add_argument("mps", type=pathlib.Path)
    _add_solver_flags(s)
    s.add_argument("--trace", type=pathlib.Path, help="write the per-iteration trace as CSV")
    s.add_argument("--seed", type=int, default=0, help="accepted for reproducibility; the solver is deterministic")
    s.add_argument("--presolve-drop-zero-rows", action="store_true")
    s.add_argument("--fixed-iterations", action="store_true",
                   help="ignore the tolerance tests and run exactly --max-iterations steps")
    s.add_argument("--solution", type=pathlib.Path, help="write 'name value' lines for the original variables")

    c = sub.add_parser("cond-experiment", help="condition numbers of shifted low-precision Cholesky preconditioners")
    c.add_argument("--m", type=int, default=200)
    c.add_argument("--k", type=float, nargs="+", default=list(DEFAULT_KS))
    c.add_argument("--c-m", type=float, default=10.0)
    c.add_argument("--precisions", nargs="+", choices=(SINGLE, HALF), default=[SINGLE, HALF])
    c.add_argument("--spacing", choices=SPACINGS, default="linear")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", type=pathlib.Path)

    b = sub.add_parser("bench", help="double vs. mixed-precision comparison over a problem list")
    b.add_argument("problems", nargs="*")
    b.add_argument("--data-dir", type=pathlib.Path, default=None)
    b.add_argument("--modes", nargs="+", choices=MODES, default=["double", "auto"])
    _add_solver_flags(b)
    b.add_argument("--out", type=pathlib.Path, default=pathlib.Path("bench"),
                   help="output prefix: PREFIX.csv, PREFIX.txt, PREFIX_timings.csv")
    return ap


def _configure_logging():
    level = os.environ.get("MPIP_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def cmd_solve(args) -> int:
    try:
        params = _params(args)
        if args.fixed_iterations and args.max_iterations is None:
            raise ValueError("--fixed-iterations needs --max-iterations")
    except ValueError as exc:
        print(f"mpip solve: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        model = read_mps(args.mps)
        lp, vmap = to_standard_form(model)
    except FileNotFoundError:
        print(f"mpip solve: no such file: {args.mps}", file=sys.stderr)
        return EXIT_USAGE
    except (MpsError, ModelError, OSError) as exc:
        print(f"mpip solve: {args.mps}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.presolve_drop_zero_rows:
        lp = lp.drop_zero_rows()
    t0 = time.perf_counter()
    res = solve(lp, params, mode=args.mode, switch_factor=args.switch_factor,
                stop_on_solution=not args.fixed_iterations)
    elapsed = time.perf_counter() - t0
    kswitch = "-" if res.k_switch is None else res.k_switch
    print(
        f"{model.name or args.mps.name}: status={res.status} objective={res.objective:.10g} "
        f"iterations={res.iterations} time={elapsed:.2f}s k_switch={kswitch}"
        + (f" ({res.message})" if res.message else "")
    )
    if args.trace:
        res.trace.save(args.trace)
    if args.solution:
        values = recover_original_solution(vmap, res.iterate.x)
        with open(args.solution, "w") as fh:
            for name, v in values.items():
                fh.write(f"{name} {v!r}\n")
    if res.status == OPTIMAL or (args.fixed_iterations and res.status == ITERATION_LIMIT):
        return EXIT_OK
    return EXIT_NOT_OPTIMAL


def cmd_cond(args) -> int:
    try:
        rows = cond_experiment(args.m, args.k, args.c_m, args.precisions, args.seed, args.spacing)
    except ValueError as exc:
        print(f"mpip cond-experiment: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_cond_csv(rows, fh)
    else:
        write_cond_csv(rows, sys.stdout)
    return EXIT_OK


def cmd_bench(args) -> int:
    if not args.problems:
        print("mpip bench: no problems given", file=sys.stderr)
        return EXIT_USAGE
    try:
        params = _params(args)
    except ValueError as exc:
        print(f"mpip bench: {exc}", file=sys.stderr)
        return EXIT_USAGE
    timings = []
    rows = bench(args.problems, args.modes, params, args.data_dir, args.switch_factor, timings)
    prefix = args.out
    if prefix.parent and not prefix.parent.exists():
        prefix.parent.mkdir(parents=True)
    with open(f"{prefix}.csv", "w", newline="") as fh:
        write_bench_csv(rows, fh)
    table = format_bench_table(rows)
    pathlib.Path(f"{prefix}.txt").write_text(table)
    with open(f"{prefix}_timings.csv", "w", newline="") as fh:
        write_timings_csv(timings, fh)
    sys.stdout.write(table)
    for r in rows:
        if r.error:
            print(f"{r.name}: {r.error}", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    if args.command == "solve":
        return cmd_solve(args)
    if args.command == "cond-experiment":
        return cmd_cond(args)
    return cmd_bench(args)


if __name__ == "__main__":
    sys.exit(main())
