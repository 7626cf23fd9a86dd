"""Dense kernels in binary64, binary32 and software-emulated binary16.

binary64/binary32 factorizations and triangular solves go through LAPACK
(``?potrf``/``?trtrs``/``?potrs``), whose arithmetic happens in the dtype of
the operands.  binary16 has no hardware support here, so its Cholesky is an
unblocked loop that rounds the result of every scalar operation to the
nearest half-precision value.
"""

from __future__ import annotations

import dataclasses

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

U_D = 2.0**-53
U_S = 2.0**-24
U_H = 2.0**-11

BINARY64 = "binary64"
BINARY32 = "binary32"
BINARY16 = "binary16"

_DTYPES = {BINARY64: np.float64, BINARY32: np.float32, BINARY16: np.float16}
_ROUNDOFF = {BINARY64: U_D, BINARY32: U_S, BINARY16: U_H}
HALF_MAX = float(np.finfo(np.float16).max)
SINGLE_MAX = float(np.finfo(np.float32).max)


class CholeskyBreakdown(ArithmeticError):
    """Non-positive pivot; ``pivot`` is the 1-based index of the failing column."""

    def __init__(self, pivot: int, precision: str):
        self.pivot = pivot
        self.precision = precision
        super().__init__(f"Cholesky breakdown at pivot {pivot} ({precision})")


class PrecisionOverflow(OverflowError):
    """A value does not fit the range of the reduced precision format."""


class EigenNotConverged(ArithmeticError):
    pass


@dataclasses.dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular ``L`` with ``L L' = M + shift * diag(M)`` (or ``+ shift * I``)."""

    L: np.ndarray
    precision: str
    shift: float = 0.0

    @property
    def unit_roundoff(self) -> float:
        return _ROUNDOFF[self.precision]


def precision_for_roundoff(u: float) -> str:
    for name, value in _ROUNDOFF.items():
        if u == value:
            return name
    raise ValueError(f"unit roundoff {u!r} matches no supported precision")


def to_single(a: np.ndarray) -> np.ndarray:
    """Round to binary32, refusing to turn finite values into infinities."""
    a = np.asarray(a)
    if a.dtype == np.float32:
        return a
    if np.any(np.abs(a) > SINGLE_MAX):
        raise PrecisionOverflow("value exceeds the binary32 range; use the binary64 path")
    return a.astype(np.float32)


def round_half(a: np.ndarray | float) -> np.ndarray:
    """Round binary64 values to the nearest binary16 value (kept as float64).

    Results of +, -, *, / and sqrt on binary16 inputs computed in binary64
    and rounded once are correctly rounded, since 53 >= 2 * 11 + 2.
    """
    with np.errstate(over="ignore"):
        h = np.asarray(a, dtype=np.float64).astype(np.float16)
    if not np.all(np.isfinite(h)):
        raise PrecisionOverflow(f"value exceeds the binary16 range of +-{HALF_MAX:g}")
    return h.astype(np.float64)


def cholesky(M: np.ndarray, precision: str = BINARY64) -> CholeskyFactor:
    """Cholesky factor of the lower triangle of ``M`` computed in ``precision``."""
    if precision == BINARY16:
        return emulated_half_cholesky(M, 0.0)
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ValueError("expected a non-empty square matrix")
    if precision == BINARY32:
        a = to_single(M)
        potrf = lapack.spotrf
    elif precision == BINARY64:
        a = np.asarray(M, dtype=np.float64)
        potrf = lapack.dpotrf
    else:
        raise ValueError(f"unknown precision {precision!r}")
    L, info = potrf(a, lower=1, clean=1, overwrite_a=0)
    if info > 0:
        raise CholeskyBreakdown(int(info), precision)
    if info < 0:
        raise ValueError(f"potrf: illegal argument {-info}")
    return CholeskyFactor(L, precision)


def shifted_cholesky(M: np.ndarray, c_m: float, u: float) -> CholeskyFactor:
    """Factor ``M + c_m * u * diag(M)`` in the precision whose unit roundoff is ``u``."""
    precision = precision_for_roundoff(u)
    if precision == BINARY16:
        return emulated_half_cholesky(M, c_m)
    dtype = _DTYPES[precision]
    M = to_single(M) if dtype == np.float32 else np.asarray(M, dtype=np.float64)
    d = np.diag(M).astype(np.float64)
    if np.any(d <= 0):
        raise ValueError("shifted Cholesky needs a positive diagonal")
    shifted = M.copy()
    idx = np.diag_indices_from(shifted)
    shifted[idx] = (d + c_m * u * d).astype(dtype)
    factor = cholesky(shifted, precision)
    return CholeskyFactor(factor.L, precision, c_m * u)


def tri_solve(factor: CholeskyFactor, w: np.ndarray, side: str = "forward") -> np.ndarray:
    """``L^{-1} w`` (forward) or ``L^{-T} w`` (backward) in the factor's precision."""
    if side not in ("forward", "backward"):
        raise ValueError("side must be 'forward' or 'backward'")
    L = factor.L
    if np.any(np.diag(L) == 0):
        raise ZeroDivisionError("triangular factor has a zero diagonal entry")
    if factor.precision == BINARY16:
        return _half_tri_solve(L, np.asarray(w, dtype=np.float64), side)
    dtype = _DTYPES[factor.precision]
    rhs = to_single(w) if dtype == np.float32 else np.asarray(w, dtype=np.float64)
    return scipy.linalg.solve_triangular(
        L, rhs, lower=True, trans="T" if side == "backward" else "N", check_finite=False
    )


def _half_tri_solve(L: np.ndarray, w: np.ndarray, side: str) -> np.ndarray:
    L = round_half(L)
    x = round_half(w).copy()
    m = L.shape[0]
    if side == "forward":
        for j in range(m):
            x[j] = round_half(x[j] / L[j, j])
            x[j + 1:] = round_half(x[j + 1:] - round_half(L[j + 1:, j] * x[j]))
    else:
        for j in reversed(range(m)):
            x[j] = round_half(x[j] / L[j, j])
            x[:j] = round_half(x[:j] - round_half(L[j, :j] * x[j]))
    return x


def precond_apply(factor: CholeskyFactor, v: np.ndarray) -> np.ndarray:
    """``L^{-T} L^{-1} v`` with ``v`` rounded to binary32, solved in binary32."""
    if factor.precision != BINARY32:
        raise ValueError("the preconditioner expects a binary32 factor")
    v32 = to_single(np.asarray(v, dtype=np.float64))
    out = scipy.linalg.cho_solve((factor.L, True), v32, check_finite=False)
    return out.astype(np.float64)


def emulated_half_cholesky(H: np.ndarray, c_m: float) -> CholeskyFactor:
    """Cholesky of ``H + c_m * u_h * I`` with every operation rounded to binary16.

    The returned factor stores the binary16 values widened to float64.
    """
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] == 0:
        raise ValueError("expected a non-empty square matrix")
    m = H.shape[0]
    a = round_half(np.tril(H))
    a[np.diag_indices(m)] = round_half(np.diag(a) + round_half(c_m * U_H))
    L = np.zeros_like(a)
    for j in range(m):
        pivot = a[j, j]
        if not pivot > 0:
            raise CholeskyBreakdown(j + 1, BINARY16)
        ljj = round_half(np.sqrt(pivot))
        col = round_half(a[j + 1:, j] / ljj)
        L[j, j] = ljj
        L[j + 1:, j] = col
        if j + 1 < m:
            trail = a[j + 1:, j + 1:]
            update = round_half(np.outer(col, col))
            a[j + 1:, j + 1:] = np.tril(round_half(trail - update))
    return CholeskyFactor(L, BINARY16, c_m * U_H)


SPACINGS = ("log-uniform", "linear")


def spd_from_spectrum(
    m: int, lam_min: float, lam_max: float, count: int | None = None, seed: int = 0,
    spacing: str = "log-uniform",
) -> np.ndarray:
    """Random symmetric positive definite ``Q diag(lam) Q'``.

    The spectrum holds ``lam_min``, ``lam_max`` and ``count - 2`` interior
    values, drawn log-uniformly in between or (``spacing="linear"``) equally
    spaced; when ``count < m`` the remaining eigenvalues are set to
    ``lam_min``.  ``Q`` comes from the QR factorization of a seeded standard
    normal matrix.
    """
    if spacing not in SPACINGS:
        raise ValueError(f"spacing must be one of {SPACINGS}")
    if m < 1:
        raise ValueError("m must be positive")
    if not 0 < lam_min <= lam_max:
        raise ValueError("need 0 < lam_min <= lam_max")
    count = m if count is None else count
    if m >= 2 and not 2 <= count <= m:
        raise ValueError("count must lie in [2, m]")
    if lam_min == lam_max:
        return lam_min * np.eye(m)
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((m, m)))
    Q *= np.sign(np.diag(R))
    if m == 1:
        lam = np.array([lam_min])
    else:
        if spacing == "linear":
            interior = np.linspace(lam_min, lam_max, count)[1:-1]
        else:
            interior = np.exp(rng.uniform(np.log(lam_min), np.log(lam_max), size=count - 2))
        lam = np.concatenate([[lam_min, lam_max], interior, np.full(m - count, lam_min)])
    M = (Q * lam) @ Q.T
    return 0.5 * (M + M.T)


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairings of a cyclic-by-rounds Jacobi sweep: every (p, q) exactly once."""
    size = n + (n % 2)
    players = list(range(size))
    rounds = []
    for _ in range(size - 1):
        pairs = [(players[i], players[size - 1 - i]) for i in range(size // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        p, q = (np.array(v, dtype=np.intp) for v in zip(*pairs)) if pairs else (np.empty(0, np.intp),) * 2
        rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigenvalues(M: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of symmetric ``M`` by cyclic Jacobi rotations in binary64.

    Each sweep visits all pairs once, in rounds of disjoint pairs that are
    rotated together.  Iteration stops when every off-diagonal entry satisfies
    ``|a_pq| <= tol * sqrt(|a_pp a_qq|)``, which keeps small eigenvalues of
    definite matrices accurate in a relative sense.
    """
    A = np.array(M, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    n = A.shape[0]
    if n == 1:
        return A[0].copy()
    A = 0.5 * (A + A.T)
    rounds = _round_robin(n)
    iu = np.triu_indices(n, 1)
    tiny = np.finfo(np.float64).tiny
    for _ in range(max_sweeps):
        d = np.abs(np.diag(A))
        scale = np.sqrt(np.outer(d, d))[iu]
        off = np.abs(A[iu])
        floor = tol * np.finfo(np.float64).eps * np.max(d, initial=0.0)
        if np.all(off <= np.maximum(tol * scale, floor)):
            return np.diag(A).copy()
        for p, q in rounds:
            apq = A[p, q]
            app = A[p, p]
            aqq = A[q, q]
            active = np.abs(apq) > np.maximum(tol * np.sqrt(np.abs(app * aqq)), tiny)
            if not np.any(active):
                continue
            p, q, apq, app, aqq = p[active], q[active], apq[active], app[active], aqq[active]
            theta = (aqq - app) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t[theta == 0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rp, rq = A[p, :], A[q, :]
            A[p, :] = c[:, None] * rp - s[:, None] * rq
            A[q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = A[:, p], A[:, q]
            A[:, p] = cp * c - cq * s
            A[:, q] = cp * s + cq * c
            A[p, q] = 0.0
            A[q, p] = 0.0
            A[p, p] = app - t * apq
            A[q, q] = aqq + t * apq
    raise EigenNotConverged(f"Jacobi did not converge in {max_sweeps} sweeps")


def cond_2(M: np.ndarray) -> float:
    """Spectral condition number ``lam_max / |lam_min|`` of symmetric ``M``."""
    lam = jacobi_eigenvalues(M)
    lo = np.min(np.abs(lam))
    if lo == 0:
        return np.inf
    return float(np.max(lam) / lo)
