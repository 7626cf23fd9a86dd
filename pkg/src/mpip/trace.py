"""Per-iteration convergence records."""

from __future__ import annotations

import csv
import dataclasses
import io
import math
from typing import IO, Iterable

COLUMNS = (
    "k", "primal_res", "dual_res", "mu", "alpha_p", "alpha_d", "cg_iters",
    "mode", "t_build", "t_factor", "t_cg", "t_total",
)
TIMING_COLUMNS = ("t_build", "t_factor", "t_cg", "t_total")


@dataclasses.dataclass(frozen=True)
class TraceRow:
    k: int
    primal_res: float
    dual_res: float
    mu: float
    alpha_p: float = math.nan
    alpha_d: float = math.nan
    cg_iters: int = 0
    mode: str = ""
    t_build: float = 0.0
    t_factor: float = 0.0
    t_cg: float = 0.0
    t_total: float = 0.0


@dataclasses.dataclass
class ConvergenceTrace:
    rows: list[TraceRow] = dataclasses.field(default_factory=list)

    def append(self, row: TraceRow) -> None:
        if self.rows and row.k <= self.rows[-1].k:
            raise ValueError("trace rows must have strictly increasing k")
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]

    def write_csv(self, stream: IO[str]) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def save(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.write_csv(fh)

    @classmethod
    def read_csv(cls, stream: Iterable[str]) -> "ConvergenceTrace":
        reader = csv.DictReader(stream)
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise ValueError(f"unexpected trace columns {reader.fieldnames}")
        trace = cls()
        for rec in reader:
            kw = {}
            for f in dataclasses.fields(TraceRow):
                v = rec[f.name]
                kw[f.name] = v if f.name == "mode" else (int(v) if f.type == "int" else float(v))
            trace.append(TraceRow(**kw))
        return trace


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)
