import io
import math

import numpy as np
import pytest

from mpip import experiments, linalg
from mpip.experiments import (
    HALF,
    SINGLE,
    BenchRow,
    bench,
    cond_experiment,
    cond_row,
    format_bench_table,
    within_factor,
    write_bench_csv,
    write_cond_csv,
)

from conftest import CLASSIC_DIR


def test_near_identity():
    rows = cond_experiment(m=200, ks=[0.1])
    for r in rows:
        assert r.kappa_m == pytest.approx(10**0.1, rel=1e-6)
        assert abs(r.kappa_precond - 1) <= 0.1


@pytest.mark.parametrize("precision,u", [(SINGLE, linalg.U_S), (HALF, linalg.U_H)])
def test_k8_tracks_prediction(precision, u):
    (row,) = cond_experiment(m=200, ks=[8], precisions=[precision])
    assert row.predicted == pytest.approx(1 + 1e8 * u, rel=1e-6)
    assert within_factor(row.kappa_precond, row.predicted)


def test_breakdown_is_a_flagged_row(monkeypatch):
    def breaking(*a):
        raise linalg.CholeskyBreakdown(3, "binary32")

    monkeypatch.setattr(linalg, "shifted_cholesky", breaking)
    row = cond_row(np.eye(4), 1.0, SINGLE, 10.0)
    assert row.breakdown and math.isnan(row.kappa_precond) and "pivot 3" in row.note


def test_half_overflow_is_a_flagged_row(monkeypatch):
    def overflowing(*a):
        raise linalg.PrecisionOverflow("too big")

    monkeypatch.setattr(linalg, "emulated_half_cholesky", overflowing)
    assert cond_row(np.eye(3), 1.0, HALF, 10.0).breakdown


def test_k_range_checked():
    with pytest.raises(ValueError):
        cond_experiment(m=10, ks=[17])
    with pytest.raises(ValueError):
        cond_row(np.eye(2), 1, "quad", 10)


def test_cond_csv():
    buf = io.StringIO()
    write_cond_csv(cond_experiment(m=20, ks=[1, 2]), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(experiments.COND_COLUMNS)
    assert len(lines) == 5


def test_within_factor():
    assert within_factor(50, 10) and within_factor(2, 10) and not within_factor(101, 10)
    assert not within_factor(math.nan, 10)


def test_bench_rows():
    rows = bench([str(CLASSIC_DIR / "afiro.mps.gz"), "no-such-problem"], data_dir=CLASSIC_DIR)
    afiro, missing = rows
    assert (afiro.name, afiro.m, afiro.n) == ("afiro", 27, 51)
    assert afiro.status_double == afiro.status_mixed == "optimal"
    assert afiro.objective_mixed == pytest.approx(afiro.objective_double, rel=1e-8)
    assert afiro.error == ""
    assert "FileNotFoundError" in missing.error
    table = format_bench_table(rows)
    assert table.splitlines()[0].split() == ["problem", "m", "n", "iter(d)", "time(d)", "iter(m)", "time(m)",
                                             "CG", "avg", "k_switch"]
    buf = io.StringIO()
    write_bench_csv(rows, buf)
    assert buf.getvalue().splitlines()[0] == ",".join(experiments.BENCH_COLUMNS)


def test_bench_resolves_names_in_data_dir():
    (row,) = bench(["afiro"], modes=("double",), data_dir=CLASSIC_DIR)
    assert row.iter_double and row.iter_mixed is None


def test_bench_empty():
    with pytest.raises(ValueError):
        bench([])


def test_bench_table_no_switch_is_inf():
    r = BenchRow("p", 1, 2, 3, 0.1, 3, 0.1, 1.5, None)
    assert format_bench_table([r]).splitlines()[2].split()[-1] == "inf"


def test_timings_collected():
    timings = []
    bench(["afiro"], modes=("auto",), data_dir=CLASSIC_DIR, timings=timings)
    assert timings and all(name == "afiro" and mode == "auto" for name, mode, _ in timings)
    buf = io.StringIO()
    experiments.write_timings_csv(timings, buf)
    assert buf.getvalue().startswith("problem,run_mode,k,")
