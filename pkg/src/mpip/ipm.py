"""Regularized inexact infeasible primal-dual interior-point method for dense LPs.

Solves ``min c'x  s.t.  Ax = b, x >= 0`` together with its dual, keeping every
iterate inside the wide neighborhood

    (x, z) > 0,   x_i z_i >= gamma x'z/n,
    x'z >= gamma_p ||Ax - b||  or  ||Ax - b|| <= eps_p,
    x'z >= gamma_d ||A'y + z - c||  or  ||A'y + z - c|| <= eps_d.

Newton directions come from the regularized normal equations and need only
satisfy ``||r|| <= (1 - tau1) ||Ax - b||`` on the primal block.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import time

import numpy as np

from . import policy as pol
from .linalg import U_D, to_single
from .mps import StandardFormLP
from .normal_eq import (
    DOUBLE,
    MIXED,
    FallbackToDouble,
    LinearSolverError,
    NewtonDirection,
    NewtonRhs,
    cg_tolerance,
    factor_normal_matrix,
    newton_direction,
    solve_factored,
)
from .trace import ConvergenceTrace, TraceRow

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
DIVERGED = "diverged"
ITERATION_LIMIT = "iteration-limit"
SOLVER_FAILURE = "solver-failure"


class StepStall(RuntimeError):
    """Neither the trial step nor the safeguarded step makes progress."""


@dataclasses.dataclass(frozen=True)
class SolverParams:
    beta1: float = 0.1
    beta2: float = 0.9
    beta3: float = 0.95
    beta4: float = 0.99995
    gamma: float = 1e-8
    gamma_p: float = 1e-8
    gamma_d: float = 1e-8
    tau1: float = 0.95
    tau2: float = 1.0
    rho: float = 1e-10
    delta: float = 1e-10
    eps: float | None = None
    eps_p: float | None = None
    eps_d: float | None = None
    omega: float = 1e40
    c_m: float = 30.0
    max_iterations: int = 300

    def __post_init__(self):
        if not 0 < self.beta1 < self.beta2 < self.beta3 < 1:
            raise ValueError("need 0 < beta1 < beta2 < beta3 < 1")
        if not 0 < self.beta4 < 1:
            raise ValueError("beta4 must lie in (0, 1)")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if self.gamma_p <= 0 or self.gamma_d <= 0:
            raise ValueError("gamma_p and gamma_d must be positive")
        for name in ("tau1", "tau2"):
            t = getattr(self, name)
            if not 0 < t <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")
            if self.beta1 + t - 1 <= 0:
                raise ValueError(f"beta1 + {name} - 1 must be positive")
        if self.rho < 0 or self.delta < 0:
            raise ValueError("rho and delta must be nonnegative")
        for name in ("eps", "eps_p", "eps_d"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")
        if self.omega <= 0 or self.c_m <= 0:
            raise ValueError("omega and c_m must be positive")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")

    def tolerances(self, lp: StandardFormLP) -> tuple[float, float, float]:
        """``(eps, eps_p, eps_d)``; unset ones scale with ``n``, ``||b||`` and ``||c||``."""
        eps = 1e-8 * lp.n if self.eps is None else self.eps
        eps_p = 1e-8 * _nonzero(np.linalg.norm(lp.b)) if self.eps_p is None else self.eps_p
        eps_d = 1e-8 * _nonzero(np.linalg.norm(lp.c)) if self.eps_d is None else self.eps_d
        return eps, eps_p, eps_d


def _nonzero(v: float) -> float:
    # zero data would make the tolerance unattainable
    return v if v > 0 else 1.0


@dataclasses.dataclass
class Iterate:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    k: int = 0

    @property
    def mu(self) -> float:
        return float(self.x @ self.z) / self.x.size


@dataclasses.dataclass
class StepRecord:
    alpha_p: float
    alpha_d: float
    alpha_star: float
    alpha_bar: float | None
    trial_accepted: bool


@dataclasses.dataclass
class SolveResult:
    status: str
    iterate: Iterate
    objective: float
    iterations: int
    trace: ConvergenceTrace
    k_switch: int | None = None
    message: str = ""
    violations: list[str] = dataclasses.field(default_factory=list)
    alpha_bar_steps: int = 0
    solve_time: float = 0.0

    @property
    def mean_cg_iters(self) -> float:
        cg = [r.cg_iters for r in self.trace.rows if r.mode == MIXED]
        return float(np.mean(cg)) if cg else 0.0


class _Residuals:
    """Primal/dual residuals at the current iterate, reused along a direction."""

    def __init__(self, lp, it):
        self.rp = lp.A @ it.x - lp.b
        self.rd = lp.A.T @ it.y + it.z - lp.c
        self.norm_p = float(np.linalg.norm(self.rp))
        self.norm_d = float(np.linalg.norm(self.rd))


def primal_residual(lp, x) -> float:
    return float(np.linalg.norm(lp.A @ x - lp.b))


def dual_residual(lp, y, z) -> float:
    return float(np.linalg.norm(lp.A.T @ y + z - lp.c))


def is_solution(it: Iterate, lp: StandardFormLP, eps, eps_p, eps_d) -> bool:
    if np.any(it.x < 0) or np.any(it.z < 0):
        return False
    return (
        float(it.x @ it.z) <= eps
        and primal_residual(lp, it.x) <= eps_p
        and dual_residual(lp, it.y, it.z) <= eps_d
    )


def _neighborhood_test(x, z, norm_p, norm_d, gamma, gamma_p, gamma_d, eps_p, eps_d) -> bool:
    if not (np.all(x > 0) and np.all(z > 0)):
        return False
    xz = float(x @ z)
    if np.min(x * z) < gamma * xz / x.size:
        return False
    if not (xz >= gamma_p * norm_p or norm_p <= eps_p):
        return False
    return xz >= gamma_d * norm_d or norm_d <= eps_d


def in_neighborhood(it: Iterate, lp, gamma, gamma_p, gamma_d, eps_p, eps_d) -> bool:
    return _neighborhood_test(
        it.x, it.z, primal_residual(lp, it.x), dual_residual(lp, it.y, it.z),
        gamma, gamma_p, gamma_d, eps_p, eps_d,
    )


def max_step(v: np.ndarray, dv: np.ndarray) -> float:
    """Largest ``a`` with ``v + a dv >= 0``; ``inf`` when ``dv >= 0``."""
    neg = dv < 0
    if not np.any(neg):
        return math.inf
    return float(np.min(-v[neg] / dv[neg]))


class _Line:
    """Everything along ``it + a*dir`` evaluable in O(m + n) per point."""

    def __init__(self, lp, it, d: NewtonDirection, res: _Residuals | None = None):
        res = res or _Residuals(lp, it)
        self.x, self.z, self.dx, self.dz = it.x, it.z, d.dx, d.dz
        self.rp, self.Adx = res.rp, lp.A @ d.dx
        self.rd, self.Atdy_dz = res.rd, lp.A.T @ d.dy + d.dz
        self.xz0 = float(it.x @ it.z)
        self.n = it.x.size

    def point(self, ap, ad):
        return self.x + ap * self.dx, self.z + ad * self.dz

    def norms(self, ap, ad):
        return (
            float(np.linalg.norm(self.rp + ap * self.Adx)),
            float(np.linalg.norm(self.rd + ad * self.Atdy_dz)),
        )


def fgh_eval(alpha, it, d, gamma, gamma_p, gamma_d, beta2, lp, line: _Line | None = None):
    """``(min_i f_i, g_p, g_d, h, ||A x(a) - b||, ||A'y(a) + z(a) - c||)`` at a common step."""
    line = line or _Line(lp, it, d)
    x, z = line.point(alpha, alpha)
    xz = float(x @ z)
    norm_p, norm_d = line.norms(alpha, alpha)
    f = float(np.min(x * z)) - gamma * xz / line.n
    g_p = xz - gamma_p * norm_p
    g_d = xz - gamma_d * norm_d
    h = (1.0 - alpha * (1.0 - beta2)) * line.xz0 - xz
    return f, g_p, g_d, h, norm_p, norm_d


def _admissible(alpha, it, d, params, eps_p, eps_d, lp, line) -> bool:
    x, z = line.point(alpha, alpha)
    if not (np.all(x > 0) and np.all(z > 0)):
        return False
    f, g_p, g_d, h, norm_p, norm_d = fgh_eval(
        alpha, it, d, params.gamma, params.gamma_p, params.gamma_d, params.beta2, lp, line
    )
    return f >= 0 and h >= 0 and (g_p >= 0 or norm_p <= eps_p) and (g_d >= 0 or norm_d <= eps_d)


GRID_POINTS = 64
BISECTION_STEPS = 40
INSIDE_FACTOR = 1.0 - 1e-12


def alpha_bar(it, d, params: SolverParams, lp, line: _Line | None = None) -> float:
    """Largest common step in [0, 1] keeping every intermediate point admissible.

    The first failure on a uniform grid is bracketed and refined by bisection;
    the result is pulled slightly inward.
    """
    line = line or _Line(lp, it, d)
    _, eps_p, eps_d = params.tolerances(lp)
    lo = 0.0
    for j in range(1, GRID_POINTS + 1):
        a = j / GRID_POINTS
        if not _admissible(a, it, d, params, eps_p, eps_d, lp, line):
            hi = a
            break
        lo = a
    else:
        return INSIDE_FACTOR
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if _admissible(mid, it, d, params, eps_p, eps_d, lp, line):
            lo = mid
        else:
            hi = mid
    return lo * INSIDE_FACTOR


def step_bounds(it: Iterate, d: NewtonDirection) -> tuple[float, float, float]:
    """Ratio-test steps for x and z capped at 1, and their minimum."""
    ap = min(1.0, max_step(it.x, d.dx))
    ad = min(1.0, max_step(it.z, d.dz))
    return ap, ad, min(ap, ad)


def take_step(it: Iterate, d: NewtonDirection, params: SolverParams, lp, line: _Line | None = None):
    """Trial step ``beta4 * alpha*`` per variable block, else the safeguarded common step."""
    line = line or _Line(lp, it, d)
    _, eps_p, eps_d = params.tolerances(lp)
    ap_star, ad_star, a_star = step_bounds(it, d)
    ap, ad = params.beta4 * ap_star, params.beta4 * ad_star
    x, z = line.point(ap, ad)
    norm_p, norm_d = line.norms(ap, ad)
    if _neighborhood_test(x, z, norm_p, norm_d, params.gamma, params.gamma_p, params.gamma_d, eps_p, eps_d) and (
        float(x @ z) <= (1.0 - a_star * (1.0 - params.beta3)) * line.xz0
    ):
        new = Iterate(x, it.y + ad * d.dy, z, it.k + 1)
        return new, StepRecord(ap, ad, a_star, None, True)
    ab = alpha_bar(it, d, params, lp, line)
    if ab <= 0.0:
        raise StepStall(f"no admissible step at iteration {it.k}; try smaller rho and delta")
    x, z = line.point(ab, ab)
    new = Iterate(x, it.y + ab * d.dy, z, it.k + 1)
    return new, StepRecord(ab, ab, a_star, ab, False)


def initial_point(lp: StandardFormLP, rho: float, delta: float, c_m: float = 30.0) -> Iterate:
    """Least-squares seeds shifted into the positive orthant.

    The seeds use ``(A A' + delta I)`` so that rank-deficient ``A`` is fine.
    """
    A, b, c = lp.A, lp.b, lp.c
    m, n = A.shape
    M, factor = factor_normal_matrix(A, np.ones(n), delta, c_m)
    x = A.T @ solve_factored(M, factor, b)[0]
    y = solve_factored(M, factor, A @ c)[0]
    z = c - A.T @ y
    dx = max(-1.5 * float(np.min(x)), 0.0)
    dz = max(-1.5 * float(np.min(z)), 0.0)
    xs, zs = x + dx, z + dz
    cross = float(xs @ zs)
    sx, sz = float(np.sum(xs)), float(np.sum(zs))
    if cross > 0 and sx > 0 and sz > 0:
        x0 = xs + 0.5 * cross / sz
        z0 = zs + 0.5 * cross / sx
    else:
        x0, z0 = xs, zs
    if not (float(x0 @ z0) > 0 and np.all(x0 > 0) and np.all(z0 > 0) and np.all(np.isfinite(x0 + z0))):
        return Iterate(np.ones(n), np.zeros(m), np.ones(n))
    return Iterate(x0, y, z0)


def _rel(v: float, ref: float) -> float:
    return v / max(ref, 1.0)


def solve(
    lp: StandardFormLP,
    params: SolverParams | None = None,
    mode: str = pol.AUTO,
    switch_factor: float = 0.75,
    stop_on_solution: bool = True,
    check_invariants: bool = False,
    start: Iterate | None = None,
) -> SolveResult:
    """Run the interior-point iteration.

    ``mode`` selects the linear solver policy (``mixed``, ``double`` or
    ``auto``).  With ``stop_on_solution=False`` the tolerance tests are skipped
    so the method runs exactly ``max_iterations`` steps (unless it fails).
    ``check_invariants`` records every per-iteration invariant violation in
    ``SolveResult.violations``.
    """
    params = params or SolverParams()
    eps, eps_p, eps_d = params.tolerances(lp)
    state = pol.PolicyState(policy=mode, switch_factor=switch_factor)
    A, b, c = lp.A, lp.b, lp.c
    norm_b, norm_c = float(np.linalg.norm(b)), float(np.linalg.norm(c))
    norm_A = float(np.linalg.norm(A)) if check_invariants else 0.0
    A32 = None
    trace = ConvergenceTrace()
    violations: list[str] = []
    n_bar = 0
    t_start = time.perf_counter()

    def finish(status, it, message=""):
        return SolveResult(
            status, it, lp.objective(it.x), it.k, trace, state.k_switch, message,
            violations, n_bar, time.perf_counter() - t_start,
        )

    try:
        it = start or initial_point(lp, params.rho, params.delta, params.c_m)
    except LinearSolverError as exc:
        it = Iterate(np.ones(lp.n), np.zeros(lp.m), np.ones(lp.n))
        return finish(SOLVER_FAILURE, it, str(exc))
    if check_invariants and not in_neighborhood(it, lp, params.gamma, params.gamma_p, params.gamma_d, eps_p, eps_d):
        violations.append("k=0: initial point outside the neighborhood")

    while True:
        t_iter = time.perf_counter()
        res = _Residuals(lp, it)
        mu = it.mu
        row = dict(k=it.k, primal_res=_rel(res.norm_p, norm_b), dual_res=_rel(res.norm_d, norm_c), mu=mu)
        xz = float(it.x @ it.z)
        if stop_on_solution and xz <= eps and res.norm_p <= eps_p and res.norm_d <= eps_d:
            trace.append(TraceRow(**row))
            return finish(OPTIMAL, it)
        if float(np.sum(np.abs(it.x)) + np.sum(np.abs(it.z))) > params.omega:
            trace.append(TraceRow(**row))
            return finish(DIVERGED, it, "||(x, z)||_1 exceeded omega")
        if it.k >= params.max_iterations:
            trace.append(TraceRow(**row))
            return finish(ITERATION_LIMIT, it)

        rhs = NewtonRhs(-res.rp, -res.rd, params.beta1 * mu - it.x * it.z)
        try:
            d = None
            if state.mode == MIXED:
                if A32 is None:
                    A32 = to_single(A)
                try:
                    d = _direction(lp, it, rhs, params, res.norm_p, MIXED, A32)
                    pol.record_mixed_iteration(state, d.stats.t_build + d.stats.t_factor, d.stats.t_cg)
                except FallbackToDouble as exc:
                    log.info("k=%d: mixed solver fell back to double (%s)", it.k, exc.reason)
                    pol.signal_fallback(state)
                    pol.switch_to_double(state, it.k)
                    A32 = None
            if d is None:
                d = _direction(lp, it, rhs, params, res.norm_p, DOUBLE, None)
        except LinearSolverError as exc:
            trace.append(TraceRow(**row))
            return finish(SOLVER_FAILURE, it, str(exc))
        if pol.should_switch(state):
            pol.switch_to_double(state, it.k + 1)
            A32 = None

        line = _Line(lp, it, d, res)
        ap_star, ad_star, a_star = step_bounds(it, d)
        if stop_on_solution:
            cand = Iterate(it.x + a_star * d.dx, it.y + a_star * d.dy, it.z + a_star * d.dz, it.k + 1)
            if is_solution(cand, lp, eps, eps_p, eps_d):
                _append_step(trace, row, a_star, a_star, d, t_iter)
                it = cand
                trace.append(_terminal_row(lp, it, norm_b, norm_c))
                return finish(OPTIMAL, it)
        try:
            new, step = take_step(it, d, params, lp, line)
        except StepStall as exc:
            _append_step(trace, row, 0.0, 0.0, d, t_iter)
            return finish(SOLVER_FAILURE, it, str(exc))
        if step.alpha_bar is not None:
            n_bar += 1
        if check_invariants:
            violations.extend(_check(lp, it, new, d, step, params, eps_p, eps_d, norm_A))
        _append_step(trace, row, step.alpha_p, step.alpha_d, d, t_iter)
        log.debug(
            "k=%d pres=%.2e dres=%.2e mu=%.2e ap=%.3f ad=%.3f cg=%d %s",
            it.k, row["primal_res"], row["dual_res"], mu, step.alpha_p, step.alpha_d, d.cg_iters, d.mode,
        )
        it = new


def _direction(lp, it, rhs, params, norm_p, mode, A32):
    # CG stops on ||(A D^-1 A' + delta I) dy - w||, floored against ||w||
    def tol(w):
        return cg_tolerance(norm_p, params.tau1, w)

    return newton_direction(lp.A, it.x, it.z, rhs, params.rho, params.delta, tol, mode, params.c_m, A32)


def _append_step(trace, row, ap, ad, d: NewtonDirection, t_iter):
    s = d.stats
    trace.append(TraceRow(
        **row, alpha_p=ap, alpha_d=ad, cg_iters=d.cg_iters, mode=d.mode,
        t_build=s.t_build, t_factor=s.t_factor, t_cg=s.t_cg, t_total=time.perf_counter() - t_iter,
    ))


def _terminal_row(lp, it, norm_b, norm_c):
    return TraceRow(
        k=it.k, primal_res=_rel(primal_residual(lp, it.x), norm_b),
        dual_res=_rel(dual_residual(lp, it.y, it.z), norm_c), mu=it.mu,
    )


def acc_r_slack(lp_norm_A: float, d: NewtonDirection, xi_norm: float, delta: float) -> float:
    """Roundoff allowance when re-evaluating ``||A dx + delta dy - xi||`` in binary64."""
    scale = lp_norm_A * float(np.linalg.norm(d.dx)) + delta * float(np.linalg.norm(d.dy)) + xi_norm
    return 1e3 * U_D * scale


def _check(lp, it, new, d, step, params, eps_p, eps_d, norm_A) -> list[str]:
    out = []
    k = it.k
    if not (np.all(new.x > 0) and np.all(new.z > 0)):
        out.append(f"k={k}: iterate left the open orthant")
    if not in_neighborhood(new, lp, params.gamma, params.gamma_p, params.gamma_d, eps_p, eps_d):
        out.append(f"k={k}: iterate outside the neighborhood")
    bound_alpha = step.alpha_star if step.trial_accepted else step.alpha_bar
    beta = params.beta3
    if float(new.x @ new.z) > (1.0 - bound_alpha * (1.0 - beta)) * float(it.x @ it.z) * (1 + 1e-12):
        out.append(f"k={k}: complementarity did not decrease enough")
    xi_norm = primal_residual(lp, it.x)
    if d.mode == MIXED and d.r_norm > d.tol + acc_r_slack(norm_A, d, xi_norm, params.delta):
        out.append(f"k={k}: primal residual {d.r_norm:.3e} above tolerance {d.tol:.3e}")
    zeta_norm = dual_residual(lp, it.y, it.z)
    s_bound = 1e3 * U_D * (
        params.rho * np.linalg.norm(d.dx) + norm_A * np.linalg.norm(d.dy) + np.linalg.norm(d.dz) + zeta_norm
    )
    if d.s_norm > s_bound:
        out.append(f"k={k}: dual block residual {d.s_norm:.3e} above roundoff bound {s_bound:.3e}")
    if step.alpha_bar is not None and not step.alpha_bar < step.alpha_star:
        out.append(f"k={k}: alpha_bar {step.alpha_bar} not below alpha* {step.alpha_star}")
    return out
