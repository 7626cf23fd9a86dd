"""Reading MPS files and reducing them to ``min c'x  s.t.  Ax = b, x >= 0``.

Fixed-format files (NETLIB style) are accepted, and so are whitespace
separated ("free") files as long as names contain no blanks.  Names with
embedded blanks are recovered from the fixed column positions.
"""

from __future__ import annotations

import dataclasses
import gzip
import io
import logging
import math
import os
from typing import Iterable, TextIO

import numpy as np

logger = logging.getLogger(__name__)

ROW_TYPES = ("N", "L", "G", "E")
BOUND_TYPES = ("LO", "UP", "FX", "FR", "MI", "PL")
INTEGER_BOUND_TYPES = ("BV", "LI", "UI", "SC")
INFINITY = 1e30

_UNSUPPORTED_SECTIONS = (
    "QUADOBJ", "QMATRIX", "QSECTION", "QCMATRIX", "SOS", "CSECTION", "INDICATORS",
    "LAZYCONS", "USERCUTS",
)


class MpsError(ValueError):
    """Base class for everything that can go wrong while reading MPS data."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MpsParseError(MpsError):
    """Malformed input: missing ENDATA, bad field counts, non-numeric values."""


class MpsUnsupportedError(MpsError):
    """Valid MPS that uses a feature outside plain continuous LP."""


class MpsSemanticError(MpsError):
    """A data line references a row or column that was never declared."""


class ModelError(ValueError):
    """The model cannot be brought to standard form (e.g. lower > upper)."""


@dataclasses.dataclass
class MpsModel:
    name: str
    objective: str
    rows: list[tuple[str, str]]
    columns: list[tuple[str, str, float]]
    rhs: dict[str, float]
    ranges: dict[str, float]
    bounds: list[tuple[str, str, float | None]]

    @property
    def constraint_rows(self) -> list[tuple[str, str]]:
        return [(r, t) for r, t in self.rows if t != "N"]

    @property
    def column_names(self) -> list[str]:
        return list(dict.fromkeys(col for col, _, _ in self.columns))


@dataclasses.dataclass(frozen=True)
class StandardFormLP:
    """Dense standard-form problem ``min c'x  s.t.  Ax = b, x >= 0``."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    name: str = ""
    objective_constant: float = 0.0

    def __post_init__(self):
        A = np.ascontiguousarray(self.A, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64).reshape(-1)
        c = np.asarray(self.c, dtype=np.float64).reshape(-1)
        if A.ndim != 2 or A.shape != (b.size, c.size):
            raise ValueError(f"inconsistent shapes A{A.shape}, b({b.size}), c({c.size})")
        if A.size == 0:
            raise ValueError("empty problem")
        for label, arr in (("A", A), ("b", b), ("c", c)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{label} contains non-finite entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def objective(self, x: np.ndarray) -> float:
        return float(self.c @ x) + self.objective_constant

    def zero_rows(self) -> np.ndarray:
        return np.flatnonzero(~np.any(self.A != 0.0, axis=1))

    def drop_zero_rows(self) -> "StandardFormLP":
        keep = np.any(self.A != 0.0, axis=1)
        return dataclasses.replace(self, A=self.A[keep], b=self.b[keep])


@dataclasses.dataclass(frozen=True)
class VariableEntry:
    """How one original variable is expressed through standard-form columns.

    ``kind`` is one of ``direct``, ``shifted`` (x = offset + x'), ``mirrored``
    (x = offset - x'), ``split`` (x = x+ - x-) or ``fixed`` (no column).
    """

    name: str
    kind: str
    columns: tuple[int, ...]
    offset: float = 0.0


@dataclasses.dataclass(frozen=True)
class VariableMap:
    variables: tuple[VariableEntry, ...]
    row_slacks: dict[str, int | None]
    n: int
    objective_constant: float = 0.0


# ---------------------------------------------------------------------------
# parsing


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _number(tok: str, lineno: int) -> float:
    try:
        value = float(tok)
    except ValueError:
        raise MpsParseError(f"expected a number, got {tok!r}", lineno) from None
    if math.isnan(value):
        raise MpsParseError("NaN value", lineno)
    return value


def _fixed(line: str, spans: Iterable[tuple[int, int]]) -> list[str]:
    return [line[a:b].strip() for a, b in spans]


# 1-based MPS columns 2-3, 5-12, 15-22, 25-36, 40-47, 50-61
_F1, _F2, _F3, _F4, _F5, _F6 = (1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)


class _Parser:
    def __init__(self):
        self.name = ""
        self.objective: str | None = None
        self.extra_objectives: set[str] = set()
        self.rows: list[tuple[str, str]] = []
        self.row_type: dict[str, str] = {}
        self.columns: list[tuple[str, str, float]] = []
        self.col_set: set[str] = set()
        self.rhs: dict[str, float] = {}
        self.ranges: dict[str, float] = {}
        self.bounds: list[tuple[str, str, float | None]] = []
        self.set_names: dict[str, str] = {}

    # handlers raise on a bad free-form reading; parse_mps then retries the
    # line with fixed column positions
    def row_line(self, toks: list[str], lineno: int) -> None:
        if len(toks) != 2:
            raise MpsParseError("ROWS entry needs a type and a name", lineno)
        kind, name = toks[0].upper(), toks[1]
        if kind not in ROW_TYPES:
            raise MpsUnsupportedError(f"unknown row type {toks[0]!r}", lineno)
        if name in self.row_type:
            raise MpsSemanticError(f"duplicate row {name!r}", lineno)
        if kind == "N":
            if self.objective is None:
                self.objective = name
            else:
                logger.warning("ignoring additional objective row %s", name)
                self.extra_objectives.add(name)
                self.row_type[name] = "N"
                return
        self.row_type[name] = kind
        self.rows.append((name, kind))

    def _check_row(self, name: str, lineno: int) -> None:
        if name not in self.row_type:
            raise MpsSemanticError(f"unknown row {name!r}", lineno)

    def column_line(self, toks: list[str], lineno: int) -> None:
        if len(toks) >= 2 and toks[1].strip("'").upper() == "MARKER":
            raise MpsUnsupportedError("integer MARKER sections are not supported", lineno)
        if len(toks) not in (3, 5):
            raise MpsParseError("COLUMNS entry needs 3 or 5 fields", lineno)
        col = toks[0]
        pairs = [(toks[1], toks[2])] + ([(toks[3], toks[4])] if len(toks) == 5 else [])
        parsed = []
        for row, val in pairs:
            self._check_row(row, lineno)
            parsed.append((row, _number(val, lineno)))
        self.col_set.add(col)
        for row, val in parsed:
            if row in self.extra_objectives:
                continue
            self.columns.append((col, row, val))

    def _set_line(self, toks: list[str], lineno: int, section: str) -> list[tuple[str, float]]:
        if len(toks) in (3, 5):
            set_name, rest = toks[0], toks[1:]
        elif len(toks) in (2, 4):
            set_name, rest = "", toks
        else:
            raise MpsParseError(f"{section} entry needs 2 to 5 fields", lineno)
        pairs = []
        for i in range(0, len(rest), 2):
            row = rest[i]
            self._check_row(row, lineno)
            pairs.append((row, _number(rest[i + 1], lineno)))
        # validate before recording the set name so a failed free-format read leaves no trace
        first = self.set_names.setdefault(section, set_name)
        if set_name != first:
            logger.warning("ignoring %s set %s (using %s)", section, set_name, first)
            return []
        return pairs

    def rhs_line(self, toks: list[str], lineno: int) -> None:
        for row, val in self._set_line(toks, lineno, "RHS"):
            if row in self.extra_objectives:
                continue
            self.rhs[row] = val

    def range_line(self, toks: list[str], lineno: int) -> None:
        for row, val in self._set_line(toks, lineno, "RANGES"):
            if self.row_type[row] == "N":
                raise MpsSemanticError(f"RANGES on objective row {row!r}", lineno)
            self.ranges[row] = val

    def bound_line(self, toks: list[str], lineno: int) -> None:
        if not toks:
            raise MpsParseError("empty BOUNDS entry", lineno)
        kind = toks[0].upper()
        if kind in INTEGER_BOUND_TYPES:
            raise MpsUnsupportedError(f"integer bound type {kind} is not supported", lineno)
        if kind not in BOUND_TYPES:
            raise MpsUnsupportedError(f"unknown bound type {toks[0]!r}", lineno)
        needs_value = kind in ("LO", "UP", "FX")
        rest = toks[1:]
        value: float | None = None
        if needs_value:
            if len(rest) == 3:
                set_name, col, value = rest[0], rest[1], _number(rest[2], lineno)
            elif len(rest) == 2:
                set_name, col, value = "", rest[0], _number(rest[1], lineno)
            else:
                raise MpsParseError(f"{kind} bound needs a column and a value", lineno)
        else:
            # a trailing value on FR/MI/PL is legal and ignored
            if len(rest) == 3 and _is_number(rest[2]):
                rest = rest[:2]
            if len(rest) == 2:
                set_name, col = rest
            elif len(rest) == 1:
                set_name, col = "", rest[0]
            else:
                raise MpsParseError(f"{kind} bound needs a column", lineno)
        if col not in self.col_set:
            raise MpsSemanticError(f"bound on unknown column {col!r}", lineno)
        first = self.set_names.setdefault("BOUNDS", set_name)
        if set_name != first:
            logger.warning("ignoring BOUNDS set %s (using %s)", set_name, first)
            return
        self.bounds.append((kind, col, value))


def _fixed_fields(line: str, section: str) -> list[str]:
    if section == "ROWS":
        toks = _fixed(line, (_F1, _F2))
    elif section == "COLUMNS":
        toks = _fixed(line, (_F2, _F3, _F4, _F5, _F6))
    elif section in ("RHS", "RANGES"):
        toks = _fixed(line, (_F2, _F3, _F4, _F5, _F6))
        if not toks[0]:
            toks = toks[1:]
    else:
        toks = _fixed(line, (_F1, _F2, _F3, _F4))
        if not toks[1]:
            toks = [toks[0]] + toks[2:]
    while toks and not toks[-1]:
        toks.pop()
    return toks


def parse_mps(text: str | bytes) -> MpsModel:
    """Parse an MPS document.

    Raises :class:`MpsParseError`, :class:`MpsUnsupportedError` or
    :class:`MpsSemanticError`; never anything else for bad input.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("ascii")
        except UnicodeDecodeError as exc:
            raise MpsParseError(f"non-ASCII byte at offset {exc.start}") from None
    p = _Parser()
    handlers = {
        "ROWS": p.row_line,
        "COLUMNS": p.column_line,
        "RHS": p.rhs_line,
        "RANGES": p.range_line,
        "BOUNDS": p.bound_line,
    }
    section: str | None = None
    seen_name = False
    ended = False
    lineno = 0
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.rstrip("\r\n")
        if "\t" in line:
            line = line.expandtabs(8) if line[:1] != "\t" else " " + line.lstrip("\t")
        if not line.strip() or line.startswith("*"):
            continue
        if line[0] != " ":
            toks = line.split()
            head = toks[0].upper()
            if head == "NAME":
                if seen_name or section is not None:
                    raise MpsParseError("unexpected NAME record", lineno)
                seen_name = True
                p.name = toks[1] if len(toks) > 1 else ""
                section = "NAME"
                continue
            if head == "OBJSENSE":
                sense = toks[1].upper() if len(toks) > 1 else None
                section = "OBJSENSE"
                if sense is not None:
                    _objsense(sense, lineno)
                continue
            if head == "ENDATA":
                ended = True
                break
            if head in handlers:
                order = ("ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS")
                if section in order and order.index(head) < order.index(section):
                    raise MpsParseError(f"section {head} out of order", lineno)
                if head != "ROWS" and p.objective is None and not p.rows:
                    raise MpsParseError(f"section {head} before ROWS", lineno)
                section = head
                continue
            if head in _UNSUPPORTED_SECTIONS:
                raise MpsUnsupportedError(f"section {head} is not supported", lineno)
            if section is None:
                raise MpsParseError(f"unknown record {toks[0]!r}", lineno)
            # free-format files may start data lines in column 1
        if section == "OBJSENSE":
            _objsense(line.split()[0].upper(), lineno)
            continue
        if section not in handlers:
            raise MpsParseError("data line outside of a data section", lineno)
        handler = handlers[section]
        toks = line.split()
        try:
            handler(toks, lineno)
        except (MpsParseError, MpsSemanticError) as free_error:
            fixed = _fixed_fields(line, section)
            if not fixed or fixed == toks:
                raise
            try:
                handler(fixed, lineno)
            except MpsError:
                raise free_error from None
    if not ended:
        raise MpsParseError("missing ENDATA", lineno)
    if p.objective is None:
        raise MpsParseError("no objective (N) row")
    return MpsModel(
        name=p.name,
        objective=p.objective,
        rows=p.rows,
        columns=p.columns,
        rhs=p.rhs,
        ranges=p.ranges,
        bounds=p.bounds,
    )


def _objsense(sense: str, lineno: int) -> None:
    if sense.startswith("MAX"):
        raise MpsUnsupportedError("maximization (OBJSENSE MAX) is not supported", lineno)
    if sense not in ("MIN", "MINIMIZE"):
        raise MpsParseError(f"unknown OBJSENSE {sense!r}", lineno)


def read_mps(path: str | os.PathLike) -> MpsModel:
    """Read a ``.mps`` (or gzip-compressed ``.mps.gz``) file."""
    path = os.fspath(path)
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rb") as fh:
        data = fh.read()
    return parse_mps(data)


# ---------------------------------------------------------------------------
# standard form


def _column_bounds(model: MpsModel) -> dict[str, tuple[float, float]]:
    lower: dict[str, float] = {}
    upper: dict[str, float] = {}
    fixed: set[str] = set()
    explicit_lower: set[str] = set()
    for kind, col, value in model.bounds:
        if value is not None and abs(value) >= INFINITY:
            value = math.copysign(math.inf, value)
        if col in fixed and kind != "FX":
            if kind in ("FR", "MI", "PL") or value != lower[col]:
                raise ModelError(f"bound {kind} conflicts with FX on column {col}")
            continue
        if kind == "LO":
            lower[col] = value
            explicit_lower.add(col)
        elif kind == "UP":
            if value < 0 and lower.get(col, 0.0) == 0.0 and col not in explicit_lower:
                logger.warning("negative upper bound on %s with zero lower bound: lower set to -inf", col)
                lower[col] = -math.inf
            upper[col] = value
        elif kind == "FX":
            if col in fixed and value != lower[col]:
                raise ModelError(f"conflicting FX bounds on column {col}")
            lower[col] = upper[col] = value
            fixed.add(col)
        elif kind == "FR":
            lower[col], upper[col] = -math.inf, math.inf
        elif kind == "MI":
            lower[col] = -math.inf
            explicit_lower.add(col)
        elif kind == "PL":
            upper[col] = math.inf
    out = {}
    for col in model.column_names:
        lo, up = lower.get(col, 0.0), upper.get(col, math.inf)
        if lo > up:
            raise ModelError(f"column {col}: lower bound {lo} exceeds upper bound {up}")
        if lo == math.inf or up == -math.inf:
            raise ModelError(f"column {col}: infinite bound on the wrong side")
        out[col] = (lo, up)
    return out


def to_standard_form(model: MpsModel) -> tuple[StandardFormLP, VariableMap]:
    """Convert to ``min c'x + const  s.t.  Ax = b, x >= 0``.

    Rows keep the file order and come first; rows bounding range slacks and
    then rows bounding variables with finite upper bounds are appended.
    Columns: original variables (free ones occupy two adjacent columns),
    then one slack per inequality/ranged row, then upper-bound slacks.
    """
    bounds = _column_bounds(model)
    names = model.column_names
    cons = model.constraint_rows
    row_index = {name: i for i, (name, _) in enumerate(cons)}

    objective = {}
    entries: dict[str, list[tuple[int, float]]] = {c: [] for c in names}
    for col, row, val in model.columns:
        if row == model.objective:
            objective[col] = objective.get(col, 0.0) + val
        else:
            entries[col].append((row_index[row], val))

    b = np.array([model.rhs.get(name, 0.0) for name, _ in cons], dtype=np.float64)
    constant = -model.rhs.get(model.objective, 0.0)

    # column layout
    variables: list[VariableEntry] = []
    ncol = 0
    ub_rows: list[tuple[int, float]] = []  # (column, upper limit) pairs needing a row
    for col in names:
        lo, up = bounds[col]
        if lo == up:
            variables.append(VariableEntry(col, "fixed", (), lo))
        elif lo == -math.inf and up == math.inf:
            variables.append(VariableEntry(col, "split", (ncol, ncol + 1)))
            ncol += 2
        elif lo == -math.inf:
            variables.append(VariableEntry(col, "mirrored", (ncol,), up))
            ncol += 1
        else:
            kind = "direct" if lo == 0.0 else "shifted"
            variables.append(VariableEntry(col, kind, (ncol,), lo))
            if up < math.inf:
                ub_rows.append((ncol, up - lo))
            ncol += 1

    row_slacks: dict[str, int | None] = {}
    range_rows: list[tuple[int, float]] = []
    slack_sign: list[tuple[int, int, float]] = []  # (row, column, sign)
    for i, (name, kind) in enumerate(cons):
        r = model.ranges.get(name)
        if kind == "E" and not r:
            row_slacks[name] = None
            continue
        if kind == "E":
            # b <= a'x <= b + |r| when r > 0, b - |r| <= a'x <= b when r < 0
            if r < 0:
                b[i] += r
            slack_sign.append((i, ncol, -1.0))
        else:
            slack_sign.append((i, ncol, 1.0 if kind == "L" else -1.0))
        if r:
            range_rows.append((ncol, abs(r)))
        row_slacks[name] = ncol
        ncol += 1

    extra = range_rows + ub_rows
    m = len(cons) + len(extra)
    n = ncol + len(extra)
    if n == 0:
        raise ModelError("model has no columns")
    A = np.zeros((m, n), dtype=np.float64)
    c = np.zeros(n, dtype=np.float64)
    bb = np.zeros(m, dtype=np.float64)
    bb[: len(cons)] = b

    for var in variables:
        cj = objective.get(var.name, 0.0)
        col_entries = entries[var.name]
        if var.kind == "fixed":
            constant += cj * var.offset
            for i, a in col_entries:
                bb[i] -= a * var.offset
            continue
        j = var.columns[0]
        sign = -1.0 if var.kind == "mirrored" else 1.0
        c[j] = sign * cj
        constant += cj * var.offset
        for i, a in col_entries:
            A[i, j] += sign * a
            bb[i] -= a * var.offset
        if var.kind == "split":
            c[j + 1] = -cj
            A[:, j + 1] = -A[:, j]

    for i, j, sign in slack_sign:
        A[i, j] = sign
    for k, (j, limit) in enumerate(extra):
        row = len(cons) + k
        A[row, j] = 1.0
        A[row, ncol + k] = 1.0
        bb[row] = limit

    name = model.name or ""
    lp = StandardFormLP(A=A, b=bb, c=c, name=name, objective_constant=constant)
    vmap = VariableMap(tuple(variables), row_slacks, n, constant)
    return lp, vmap


def recover_original_solution(vmap: VariableMap, x: np.ndarray) -> dict[str, float]:
    """Map a standard-form point back to the model's variables (slacks dropped)."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size != vmap.n:
        raise ValueError(f"expected a vector of length {vmap.n}, got {x.size}")
    out = {}
    for var in vmap.variables:
        if var.kind == "fixed":
            out[var.name] = var.offset
        elif var.kind == "split":
            out[var.name] = float(x[var.columns[0]] - x[var.columns[1]])
        elif var.kind == "mirrored":
            out[var.name] = var.offset - float(x[var.columns[0]])
        else:
            out[var.name] = var.offset + float(x[var.columns[0]])
    return out


def row_activities(model: MpsModel, values: dict[str, float]) -> dict[str, float]:
    """Row activities a'x of every row (objective row included, without constant)."""
    act = {name: 0.0 for name, _ in model.rows}
    for col, row, val in model.columns:
        act[row] += val * values[col]
    return act


def objective_value(model: MpsModel, values: dict[str, float]) -> float:
    return row_activities(model, values)[model.objective] - model.rhs.get(model.objective, 0.0)


def row_limits(model: MpsModel, name: str, kind: str) -> tuple[float, float]:
    """Lower and upper limit of a constraint row after applying RANGES."""
    rhs = model.rhs.get(name, 0.0)
    r = model.ranges.get(name)
    if kind == "E":
        if not r:
            return rhs, rhs
        return (rhs, rhs + r) if r > 0 else (rhs + r, rhs)
    if kind == "L":
        return (rhs - abs(r) if r else -math.inf), rhs
    return rhs, (rhs + abs(r) if r else math.inf)


# ---------------------------------------------------------------------------
# output


def write_mps(model: MpsModel, stream: TextIO) -> None:
    """Write ``model`` as free-format MPS with values in round-trip precision."""
    w = stream.write
    w(f"NAME          {model.name}\n")
    w("ROWS\n")
    w(f" N  {model.objective}\n")
    for name, kind in model.rows:
        if kind != "N":
            w(f" {kind}  {name}\n")
    w("COLUMNS\n")
    for col, row, val in model.columns:
        w(f"    {col}  {row}  {val!r}\n")
    if model.rhs:
        w("RHS\n")
        for row, val in model.rhs.items():
            w(f"    RHS  {row}  {val!r}\n")
    if model.ranges:
        w("RANGES\n")
        for row, val in model.ranges.items():
            w(f"    RNG  {row}  {val!r}\n")
    if model.bounds:
        w("BOUNDS\n")
        for kind, col, val in model.bounds:
            tail = "" if val is None else f"  {val!r}"
            w(f" {kind} BND  {col}{tail}\n")
    w("ENDATA\n")


def model_from_arrays(
    name: str,
    c: np.ndarray,
    A_ub: np.ndarray | None = None,
    b_ub: np.ndarray | None = None,
    A_eq: np.ndarray | None = None,
    b_eq: np.ndarray | None = None,
) -> MpsModel:
    """Build an :class:`MpsModel` for ``min c'x, A_ub x <= b_ub, A_eq x = b_eq, x >= 0``."""
    c = np.asarray(c, dtype=np.float64)
    n = c.size
    blocks = []
    if A_ub is not None and np.size(A_ub):
        blocks.append(("L", np.atleast_2d(A_ub), np.asarray(b_ub, dtype=np.float64)))
    if A_eq is not None and np.size(A_eq):
        blocks.append(("E", np.atleast_2d(A_eq), np.asarray(b_eq, dtype=np.float64)))
    rows, rhs = [], {}
    mats = []
    for kind, A, b in blocks:
        for i in range(A.shape[0]):
            rname = f"R{len(rows) + 1:07d}"
            rows.append((rname, kind))
            if b[i] != 0.0:
                rhs[rname] = float(b[i])
        mats.append(A)
    full = np.vstack(mats) if mats else np.zeros((0, n))
    columns = []
    for j in range(n):
        cname = f"C{j + 1:07d}"
        if c[j] != 0.0:
            columns.append((cname, "COST", float(c[j])))
        nz = np.flatnonzero(full[:, j])
        if nz.size == 0 and c[j] == 0.0 and rows:
            # keep the column declared so variable counts survive the round trip
            columns.append((cname, rows[0][0], 0.0))
        columns.extend((cname, rows[i][0], float(full[i, j])) for i in nz)
    return MpsModel(name, "COST", [("COST", "N")] + rows, columns, rhs, {}, [])


def dump_standard_form(lp: StandardFormLP, stream: TextIO) -> None:
    """Debug dump: ``m n`` header, then A row-major, then b, then c."""
    stream.write(f"{lp.m} {lp.n}\n")
    for row in lp.A:
        stream.write(" ".join(repr(float(v)) for v in row) + "\n")
    stream.write(" ".join(repr(float(v)) for v in lp.b) + "\n")
    stream.write(" ".join(repr(float(v)) for v in lp.c) + "\n")
