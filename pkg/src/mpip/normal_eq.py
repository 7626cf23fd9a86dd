"""Regularized normal equations ``(A D^-1 A' + delta I) dy = w`` and direction recovery.

Two routes produce ``dy``: a mixed-precision one (binary32 shifted Cholesky
used as preconditioner for binary64 conjugate gradients) and a binary64
direct factorization.  Either way ``dx`` and ``dz`` are recovered in binary64
so that the complementarity block and the dual block hold to roundoff.
"""

from __future__ import annotations

import dataclasses
import time
from typing import Callable

import numpy as np
from scipy.linalg import blas, lapack

from .linalg import (
    U_D,
    U_S,
    CholeskyBreakdown,
    CholeskyFactor,
    PrecisionOverflow,
    precond_apply,
    shifted_cholesky,
    to_single,
)

MIXED = "mixed"
DOUBLE = "double"


class FallbackToDouble(RuntimeError):
    """The mixed-precision route gave up; ``stats`` holds what it did so far."""

    def __init__(self, reason: str, stats: "CgStats"):
        self.reason = reason
        self.stats = stats
        super().__init__(reason)


class LinearSolverError(RuntimeError):
    """Even the binary64 route failed (matrix not numerically positive definite)."""


class CgNotConverged(RuntimeError):
    def __init__(self, x: np.ndarray, stats: "CgStats"):
        self.x = x
        self.stats = stats
        super().__init__(f"CG stopped after {stats.iterations} iterations, residual {stats.residual:.3e}")


@dataclasses.dataclass(frozen=True)
class NewtonRhs:
    xi: np.ndarray
    zeta: np.ndarray
    eta: np.ndarray


@dataclasses.dataclass
class CgStats:
    iterations: int = 0
    residual: float = 0.0
    t_build: float = 0.0
    t_factor: float = 0.0
    t_cg: float = 0.0
    retried: bool = False


@dataclasses.dataclass
class NewtonDirection:
    dx: np.ndarray
    dy: np.ndarray
    dz: np.ndarray
    r_norm: float
    s_norm: float
    comp_norm: float
    tol: float
    cg_iters: int
    mode: str
    stats: CgStats


def assemble_rhs(A, x, z, xi, zeta, eta, rho):
    """``D = z/x + rho`` and ``w = xi + A D^-1 (zeta - eta/x)``."""
    if np.any(x <= 0):
        raise ValueError("x must be strictly positive")
    D = z / x + rho
    if np.any(D <= 0):
        raise ValueError("z/x + rho must be strictly positive")
    w = xi + A @ ((zeta - eta / x) / D)
    return D, w


def normal_operator(A: np.ndarray, D: np.ndarray, delta: float) -> Callable[[np.ndarray], np.ndarray]:
    """``v -> A D^-1 A' v + delta v`` in binary64 without forming the m x m matrix."""
    Dinv = 1.0 / D

    def apply(v):
        return A @ (Dinv * (A.T @ v)) + delta * v

    return apply


def pcg(operator, preconditioner, w, tol, max_iters):
    """Preconditioned CG from the zero vector.

    The recurrence residual drives the search directions; convergence is
    declared on the true residual ``||w - operator(x)||``, recomputed every
    iteration.  Raises :class:`CgNotConverged` (carrying the iterate with the
    smallest true residual) after ``max_iters`` iterations.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    t0 = time.perf_counter()
    x = np.zeros_like(w)
    r = w.copy()
    res = float(np.linalg.norm(r))
    best_x, best_res = x.copy(), res
    k = 0
    if res <= tol:
        return x, CgStats(0, res, t_cg=time.perf_counter() - t0)
    z = preconditioner(r)
    p = z.copy()
    rz = float(r @ z)
    while k < max_iters:
        q = operator(p)
        pq = float(p @ q)
        if pq <= 0 or rz <= 0 or not np.isfinite(pq):
            break
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        k += 1
        res = float(np.linalg.norm(w - operator(x)))
        if res < best_res:
            best_x, best_res = x.copy(), res
        if res <= tol:
            return x, CgStats(k, res, t_cg=time.perf_counter() - t0)
        z = preconditioner(r)
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise CgNotConverged(best_x, CgStats(k, best_res, t_cg=time.perf_counter() - t0))


def _gram_lower(B: np.ndarray, delta: float) -> np.ndarray:
    """Lower triangle of ``B B' + delta I`` in the dtype of ``B`` (BLAS syrk)."""
    syrk = blas.ssyrk if B.dtype == np.float32 else blas.dsyrk
    # B' is Fortran-ordered for C-ordered B, so syrk(trans=1) reads it in place
    M = syrk(1.0, B.T, trans=1, lower=1)
    M[np.diag_indices_from(M)] += M.dtype.type(delta)
    return M


def _factor_with_retry(M, c_m, u, stats):
    try:
        return shifted_cholesky(M, c_m, u)
    except CholeskyBreakdown:
        stats.retried = True
        return shifted_cholesky(M, 4.0 * c_m, u)


def mixed_precision_solve(A, D, w, delta, c_m, tol, max_iters=None, A32=None):
    """Solve the normal equations by binary32-preconditioned binary64 CG.

    ``A32`` may carry a cached binary32 copy of ``A``.  Raises
    :class:`FallbackToDouble` on a Cholesky breakdown that survives one retry
    with ``4 c_m`` or when CG does not converge in ``max_iters`` (default 2m).
    """
    m = A.shape[0]
    max_iters = 2 * m if max_iters is None else max_iters
    stats = CgStats()
    t0 = time.perf_counter()
    try:
        A32 = to_single(A) if A32 is None else A32
        Dt = np.sqrt(1.0 / D)
        Mt = A32 * to_single(Dt)
        M = _gram_lower(Mt, delta)
    except PrecisionOverflow as exc:
        stats.t_build = time.perf_counter() - t0
        raise FallbackToDouble(str(exc), stats) from exc
    t1 = time.perf_counter()
    stats.t_build = t1 - t0
    try:
        factor = _factor_with_retry(M, c_m, U_S, stats)
    except CholeskyBreakdown as exc:
        stats.t_factor = time.perf_counter() - t1
        raise FallbackToDouble(str(exc), stats) from exc
    stats.t_factor = time.perf_counter() - t1
    op = normal_operator(A, D, delta)
    try:
        dy, cg = pcg(op, lambda v: precond_apply(factor, v), w, tol, max_iters)
    except CgNotConverged as exc:
        stats.iterations, stats.residual, stats.t_cg = exc.stats.iterations, exc.stats.residual, exc.stats.t_cg
        raise FallbackToDouble(str(exc), stats) from exc
    except PrecisionOverflow as exc:
        raise FallbackToDouble(str(exc), stats) from exc
    stats.iterations, stats.residual, stats.t_cg = cg.iterations, cg.residual, cg.t_cg
    return dy, stats


def _symv_lower(M, v):
    return blas.dsymv(1.0, M, v, lower=1)


def double_precision_solve(A, D, w, delta, c_m=30.0):
    """Solve the normal equations with a binary64 Cholesky factorization.

    One step of residual correction is taken when the residual exceeds
    ``1e3 u_d ||M||_F ||dy||``.  Raises :class:`LinearSolverError` when the
    factorization breaks down even with ``4 c_m``.
    """
    dy, _ = _double_solve(A, D, w, delta, c_m)
    return dy


def factor_normal_matrix(A, D, delta, c_m=30.0):
    """Form ``A D^-1 A' + delta I`` (lower triangle) in binary64 and factor it."""
    B = A * np.sqrt(1.0 / D)
    M = _gram_lower(B, delta)
    try:
        factor = _factor_with_retry(M, c_m, U_D, CgStats())
    except CholeskyBreakdown as exc:
        raise LinearSolverError(f"binary64 normal equations: {exc}") from exc
    return M, factor


def solve_factored(M, factor: CholeskyFactor, w):
    """Triangular solves plus one correction step when the residual is large.

    Returns ``(dy, corrected)``.
    """
    dy = _potrs(factor, w)
    r = w - _symv_lower(M, dy)
    # ||M||_F from the stored lower triangle
    off = np.tril(M, -1)
    norm_m = np.sqrt(2.0 * np.sum(off * off) + np.sum(np.diag(M) ** 2))
    if np.linalg.norm(r) > 1e3 * U_D * norm_m * np.linalg.norm(dy):
        return dy + _potrs(factor, r), True
    return dy, False


def _double_solve(A, D, w, delta, c_m):
    stats = CgStats()
    t0 = time.perf_counter()
    B = A * np.sqrt(1.0 / D)
    M = _gram_lower(B, delta)
    del B
    t1 = time.perf_counter()
    stats.t_build = t1 - t0
    try:
        factor = _factor_with_retry(M, c_m, U_D, stats)
    except CholeskyBreakdown as exc:
        raise LinearSolverError(f"binary64 normal equations: {exc}") from exc
    t2 = time.perf_counter()
    stats.t_factor = t2 - t1
    dy, corrected = solve_factored(M, factor, w)
    stats.iterations = int(corrected)
    stats.t_cg = time.perf_counter() - t2
    return dy, stats


def _potrs(factor: CholeskyFactor, w):
    x, info = lapack.dpotrs(factor.L, w, lower=1)
    if info != 0:
        raise LinearSolverError(f"potrs failed with info={info}")
    return x


def recover_direction(A, x, z, D, dy, zeta, eta, rho):
    """``dx = D^-1 (A' dy - zeta + eta/x)`` and ``dz = zeta + rho dx - A' dy``."""
    if np.any(x <= 0):
        raise ValueError("x must be strictly positive")
    Aty = A.T @ dy
    dx = (Aty - zeta + eta / x) / D
    dz = zeta + rho * dx - Aty
    return dx, dz


def residual_norms(A, delta, rho, dx, dy, dz, rhs: NewtonRhs, x, z):
    """Residuals of the three blocks of the regularized Newton system."""
    r = np.linalg.norm(A @ dx + delta * dy - rhs.xi)
    s = np.linalg.norm(-rho * dx + A.T @ dy + dz - rhs.zeta)
    comp = np.linalg.norm(z * dx + x * dz - rhs.eta)
    return float(r), float(s), float(comp)


def cg_tolerance(primal_residual: float, tau1: float, w: np.ndarray) -> float:
    """``(1 - tau1) ||A x - b||`` floored at ``1e-16 (1 + ||w||)``."""
    return max((1.0 - tau1) * primal_residual, 1e-16 * (1.0 + float(np.linalg.norm(w))))


def newton_direction(
    A, x, z, rhs: NewtonRhs, rho, delta, tol, mode, c_m=30.0, A32=None, cg_max_iters=None
) -> NewtonDirection:
    """Inexact regularized Newton direction via the normal equations.

    ``tol`` is a number or a function of the right-hand side ``w``.
    ``mode`` is ``"mixed"`` or ``"double"``; a mixed solve that signals
    :class:`FallbackToDouble` is not retried here, the caller decides.
    """
    D, w = assemble_rhs(A, x, z, rhs.xi, rhs.zeta, rhs.eta, rho)
    if callable(tol):
        tol = tol(w)
    if mode == MIXED:
        dy, stats = mixed_precision_solve(A, D, w, delta, c_m, tol, cg_max_iters, A32)
        iters = stats.iterations
    elif mode == DOUBLE:
        dy, stats = _double_solve(A, D, w, delta, c_m)
        iters = 0
    else:
        raise ValueError(f"unknown mode {mode!r}")
    dx, dz = recover_direction(A, x, z, D, dy, rhs.zeta, rhs.eta, rho)
    r, s, comp = residual_norms(A, delta, rho, dx, dy, dz, rhs, x, z)
    return NewtonDirection(dx, dy, dz, r, s, comp, tol, iters, mode, stats)
