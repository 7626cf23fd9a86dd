import os
import pathlib

import numpy as np
import pytest

from mpip.mps import StandardFormLP

ROOT = pathlib.Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "tests" / "fixtures"
CLASSIC_DIR = ROOT / "tests" / "data" / "netlib"
NETLIB_DIR = pathlib.Path(os.environ.get("NETLIB_DIR", ROOT / "data" / "netlib"))


def netlib_path(name: str) -> pathlib.Path:
    return NETLIB_DIR / f"{name}.mps.gz"


def random_feasible_lp(rng: np.random.Generator, m: int, n: int, rank_deficient: bool = False) -> StandardFormLP:
    """Dense LP with a strictly feasible primal point and a strictly feasible dual slack."""
    A = rng.standard_normal((m, n))
    if rank_deficient and m >= 2:
        A[-1] = A[0] * rng.uniform(0.5, 2.0)
    x = rng.uniform(0.5, 2.0, n)
    y = rng.standard_normal(m)
    z = rng.uniform(0.5, 2.0, n)
    return StandardFormLP(A, A @ x, A.T @ y + z)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def tiny_text():
    return (FIXTURES / "tiny.mps").read_text()


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for a criterion, echo it, and assert on it."""

    def report(criterion: int, passed: bool, detail: str) -> None:
        line = f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
