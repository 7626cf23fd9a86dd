"""Condition-number study of shifted low-precision Cholesky, and the benchmark harness."""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
import pathlib
import time
from typing import IO, Iterable, Sequence

import numpy as np
import scipy.linalg

from . import linalg
from .ipm import OPTIMAL, SolverParams, solve
from .mps import read_mps, to_standard_form
from .trace import COLUMNS as TRACE_COLUMNS

log = logging.getLogger(__name__)

SINGLE = "single"
HALF = "half"
DEFAULT_KS = (0.1, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16)


@dataclasses.dataclass(frozen=True)
class CondRow:
    k: float
    precision: str
    kappa_m: float
    kappa_precond: float
    predicted: float
    breakdown: bool = False
    note: str = ""


COND_COLUMNS = tuple(f.name for f in dataclasses.fields(CondRow))


def preconditioned_matrix(M: np.ndarray, L: np.ndarray) -> np.ndarray:
    """``L^-1 M L^-T`` evaluated in binary64, symmetrized."""
    L = np.asarray(L, dtype=np.float64)
    X = scipy.linalg.solve_triangular(L, M, lower=True)
    P = scipy.linalg.solve_triangular(L, X.T, lower=True)
    return 0.5 * (P + P.T)


def cond_row(M: np.ndarray, k: float, precision: str, c_m: float, kappa_m: float | None = None) -> CondRow:
    kappa_m = linalg.cond_2(M) if kappa_m is None else kappa_m
    if precision == SINGLE:
        u, target = linalg.U_S, M
        factor = lambda: linalg.shifted_cholesky(M, c_m, linalg.U_S)  # noqa: E731
    elif precision == HALF:
        # unit diagonal keeps every entry inside the binary16 range
        u = linalg.U_H
        s = 1.0 / np.sqrt(np.diag(M))
        target = M * s[:, None] * s[None, :]
        factor = lambda: linalg.emulated_half_cholesky(target, c_m)  # noqa: E731
    else:
        raise ValueError(f"unknown precision {precision!r}")
    predicted = 1.0 + kappa_m * u
    try:
        L = factor().L
    except (linalg.CholeskyBreakdown, linalg.PrecisionOverflow) as exc:
        return CondRow(k, precision, kappa_m, math.nan, predicted, True, str(exc))
    P = preconditioned_matrix(target, L)
    if not np.all(np.isfinite(P)):
        return CondRow(k, precision, kappa_m, math.nan, predicted, True, "non-finite preconditioned matrix")
    return CondRow(k, precision, kappa_m, linalg.cond_2(P), predicted)


def cond_experiment(
    m: int = 200,
    ks: Iterable[float] = DEFAULT_KS,
    c_m: float = 10.0,
    precisions: Sequence[str] = (SINGLE, HALF),
    seed: int = 0,
    spacing: str = "linear",
) -> list[CondRow]:
    """For each ``k``: an SPD matrix with spectrum in ``[1, 10**k]`` and its
    preconditioned condition number under each precision's shifted factor.

    With log-uniform interior eigenvalues the binary32 factor of a 200 x 200
    matrix breaks down for ``k >= 13`` at ``c_m = 10``; equally spaced ones
    factor through ``k = 16``, hence the default.
    """
    rows = []
    for k in ks:
        if not 0.1 <= k <= 16:
            raise ValueError(f"k={k} outside [0.1, 16]")
        M = linalg.spd_from_spectrum(m, 1.0, 10.0**k, seed=seed, spacing=spacing)
        kappa_m = linalg.cond_2(M)
        for p in precisions:
            row = cond_row(M, k, p, c_m, kappa_m)
            log.info("k=%g %s kappa=%.3e precond=%.3e predicted=%.3e", k, p, row.kappa_m, row.kappa_precond, row.predicted)
            rows.append(row)
    return rows


def within_factor(measured: float, predicted: float, factor: float = 10.0) -> bool:
    return bool(np.isfinite(measured)) and predicted / factor <= measured <= predicted * factor


def write_cond_csv(rows: Iterable[CondRow], stream: IO[str]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(COND_COLUMNS)
    for r in rows:
        w.writerow([getattr(r, c) if not isinstance(getattr(r, c), float) else repr(getattr(r, c)) for c in COND_COLUMNS])


@dataclasses.dataclass
class BenchRow:
    name: str
    m: int = 0
    n: int = 0
    iter_double: int | None = None
    time_double: float | None = None
    iter_mixed: int | None = None
    time_mixed: float | None = None
    mean_cg: float | None = None
    k_switch: int | None = None
    objective_double: float | None = None
    objective_mixed: float | None = None
    status_double: str = ""
    status_mixed: str = ""
    error: str = ""


BENCH_COLUMNS = tuple(f.name for f in dataclasses.fields(BenchRow))


def resolve_problem(name: str, data_dir: pathlib.Path | None) -> pathlib.Path:
    p = pathlib.Path(name)
    if p.exists():
        return p
    if data_dir is not None:
        for cand in (f"{name}", f"{name}.mps", f"{name}.mps.gz", f"{name.lower().replace('-', '_')}.mps.gz"):
            q = data_dir / cand
            if q.exists():
                return q
    raise FileNotFoundError(f"cannot find problem {name!r}")


def bench(
    problems: Sequence[str],
    modes: Sequence[str] = ("double", "auto"),
    params: SolverParams | None = None,
    data_dir: pathlib.Path | None = None,
    switch_factor: float = 0.75,
    timings: list[tuple[str, str, object]] | None = None,
) -> list[BenchRow]:
    """Solve each problem under each mode; failures are recorded per row.

    ``timings`` (if given) collects ``(problem, mode, trace_row)`` triples.
    """
    if not problems:
        raise ValueError("empty problem list")
    rows = []
    for name in problems:
        row = BenchRow(pathlib.Path(name).name.split(".")[0])
        rows.append(row)
        try:
            lp, _ = to_standard_form(read_mps(resolve_problem(name, data_dir)))
        except Exception as exc:  # noqa: BLE001 - batch keeps going
            row.error = f"{type(exc).__name__}: {exc}"
            log.warning("%s: %s", name, row.error)
            continue
        row.m, row.n = lp.m, lp.n
        for mode in modes:
            t0 = time.perf_counter()
            try:
                res = solve(lp, params, mode=mode, switch_factor=switch_factor)
            except Exception as exc:  # noqa: BLE001
                row.error += f"{mode}: {type(exc).__name__}: {exc}; "
                continue
            elapsed = time.perf_counter() - t0
            if timings is not None:
                timings.extend((row.name, mode, r) for r in res.trace.rows)
            if mode == "double":
                row.iter_double, row.time_double = res.iterations, elapsed
                row.objective_double, row.status_double = res.objective, res.status
            else:
                row.iter_mixed, row.time_mixed = res.iterations, elapsed
                row.objective_mixed, row.status_mixed = res.objective, res.status
                row.mean_cg, row.k_switch = res.mean_cg_iters, res.k_switch
            log.info("%s %s: %s in %d iterations, %.2fs", row.name, mode, res.status, res.iterations, elapsed)
            if res.status != OPTIMAL:
                row.error += f"{mode}: {res.status} {res.message}; "
    return rows


def write_bench_csv(rows: Iterable[BenchRow], stream: IO[str]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for r in rows:
        w.writerow(["" if getattr(r, c) is None else getattr(r, c) for c in BENCH_COLUMNS])


def format_bench_table(rows: Iterable[BenchRow]) -> str:
    head = ("problem", "m", "n", "iter(d)", "time(d)", "iter(m)", "time(m)", "CG avg", "k_switch")
    body = []
    for r in rows:
        body.append((
            r.name, f"{r.m:,}", f"{r.n:,}", _opt(r.iter_double), _opt(r.time_double, "{:.2f}s"),
            _opt(r.iter_mixed), _opt(r.time_mixed, "{:.2f}s"), _opt(r.mean_cg, "{:.2f}"),
            "inf" if r.k_switch is None and r.iter_mixed is not None else _opt(r.k_switch),
        ))
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(head)]
    lines = ["  ".join(h.ljust(w) if i == 0 else h.rjust(w) for i, (h, w) in enumerate(zip(head, widths)))]
    lines.append("  ".join("-" * w for w in widths))
    for b in body:
        lines.append("  ".join(v.ljust(w) if i == 0 else v.rjust(w) for i, (v, w) in enumerate(zip(b, widths))))
    return "\n".join(lines) + "\n"


def _opt(v, fmt="{}"):
    return "-" if v is None else fmt.format(v)


def write_timings_csv(timings: Iterable[tuple[str, str, object]], stream: IO[str]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(("problem", "run_mode") + TRACE_COLUMNS)
    for name, mode, r in timings:
        w.writerow([name, mode] + [getattr(r, c) for c in TRACE_COLUMNS])
