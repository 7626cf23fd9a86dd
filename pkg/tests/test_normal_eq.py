import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpip import normal_eq
from mpip.linalg import U_D, U_S, shifted_cholesky, spd_from_spectrum, precond_apply
from mpip.normal_eq import (
    DOUBLE,
    MIXED,
    CgNotConverged,
    FallbackToDouble,
    LinearSolverError,
    NewtonRhs,
    assemble_rhs,
    cg_tolerance,
    double_precision_solve,
    mixed_precision_solve,
    newton_direction,
    normal_operator,
    pcg,
    recover_direction,
    residual_norms,
)


def _instance(rng, m=20, n=35, spread=2.0):
    A = rng.standard_normal((m, n))
    x = np.exp(rng.uniform(-spread, spread, n))
    z = np.exp(rng.uniform(-spread, spread, n))
    rhs = NewtonRhs(rng.standard_normal(m), rng.standard_normal(n), rng.standard_normal(n))
    return A, x, z, rhs


# ---------------------------------------------------------------- assemble_rhs


def test_assemble_vanishing_correction(rng):
    A, x, z, rhs = _instance(rng)
    _, w = assemble_rhs(A, x, z, rhs.xi, np.zeros(35), np.zeros(35), 1e-10)
    np.testing.assert_array_equal(w, rhs.xi)


def test_assemble_identity_scaling(rng):
    A, _, _, rhs = _instance(rng)
    e = np.ones(35)
    D, w = assemble_rhs(A, e, e, rhs.xi, rhs.zeta, rhs.eta, 0.0)
    np.testing.assert_array_equal(D, e)
    np.testing.assert_allclose(w, rhs.xi + A @ (rhs.zeta - rhs.eta), rtol=1e-14)


def test_assemble_componentwise():
    D, _ = assemble_rhs(np.eye(2), np.array([1.0, 2.0]), np.array([2.0, 1.0]), np.zeros(2), np.zeros(2),
                        np.zeros(2), 1e-10)
    np.testing.assert_array_equal(D, [2 + 1e-10, 0.5 + 1e-10])


def test_assemble_domain_error():
    with pytest.raises(ValueError):
        assemble_rhs(np.eye(2), np.array([1.0, 0.0]), np.ones(2), np.zeros(2), np.zeros(2), np.zeros(2), 0.0)


# ---------------------------------------------------------------- pcg


def test_pcg_identity_one_iteration():
    w = np.array([1.0, -2.0, 3.0])
    x, st_ = pcg(lambda v: v, lambda v: v, w, 1e-12, 10)
    np.testing.assert_allclose(x, w)
    assert st_.iterations == 1


def test_pcg_exact_preconditioner():
    d = np.array([1.0, 2.0])
    x, st_ = pcg(lambda v: d * v, lambda v: v / d, np.array([3.0, 4.0]), 1e-12, 10)
    np.testing.assert_allclose(x, [3, 2])
    assert st_.iterations == 1


def test_pcg_zero_rhs():
    x, st_ = pcg(lambda v: v, lambda v: v, np.zeros(4), 1e-12, 10)
    assert st_.iterations == 0 and not np.any(x)


def test_pcg_not_converged_carries_best():
    M = spd_from_spectrum(30, 1, 1e6, seed=0)
    w = np.ones(30)
    with pytest.raises(CgNotConverged) as err:
        pcg(lambda v: M @ v, lambda v: v, w, 1e-14, 3)
    assert err.value.stats.iterations == 3
    assert np.linalg.norm(w - M @ err.value.x) == pytest.approx(err.value.stats.residual)


def test_pcg_rejects_bad_tol():
    with pytest.raises(ValueError):
        pcg(lambda v: v, lambda v: v, np.ones(2), 0.0, 5)


@pytest.mark.parametrize("spacing", ["log-uniform", "linear"])
def test_pcg_kappa_1e10_with_single_preconditioner(spacing):
    M = spd_from_spectrum(200, 1, 1e10, seed=0, spacing=spacing)
    f = shifted_cholesky(M, 30, U_S)
    # consistent rhs: for a random w the binary64 floor u_d ||M|| ||x|| of the
    # true residual lies above 1e-8 ||w||, so no iteration count could certify it
    w = M @ np.random.default_rng(0).standard_normal(200)
    tol = 1e-8 * np.linalg.norm(w)
    x, st_ = pcg(lambda v: M @ v, lambda v: precond_apply(f, v), w, tol, 400)
    print(f"pcg kappa=1e10 ({spacing}): {st_.iterations} iterations")
    assert np.linalg.norm(w - M @ x) <= tol
    assert st_.iterations <= 30


# ---------------------------------------------------------------- mixed / double


def test_mixed_identity_system():
    w = np.array([1.0, 2.0, -3.0, 0.5])
    dy, st_ = mixed_precision_solve(np.eye(4), np.ones(4), w, 0.0, 30, 1e-12)
    np.testing.assert_allclose(dy, w, rtol=1e-12)
    assert st_.iterations <= 2


def test_mixed_zero_rhs():
    dy, st_ = mixed_precision_solve(np.eye(4), np.ones(4), np.zeros(4), 0.0, 30, 1e-12)
    assert st_.iterations == 0 and not np.any(dy)


def test_mixed_meets_tolerance(rng):
    A, x, z, rhs = _instance(rng, 40, 90)
    D = z / x
    w = rng.standard_normal(40)
    dy, st_ = mixed_precision_solve(A, D, w, 1e-10, 30, 1e-9)
    assert np.linalg.norm(normal_operator(A, D, 1e-10)(dy) - w) <= 1e-9
    assert st_.residual <= 1e-9


def test_mixed_overflow_signals_fallback():
    A = np.array([[1e200, 1.0]])
    with pytest.raises(FallbackToDouble):
        mixed_precision_solve(A, np.ones(2), np.ones(1), 0.0, 30, 1e-8)


def test_mixed_cg_limit_signals_fallback(rng):
    A, x, z, rhs = _instance(rng, 40, 90, spread=6)
    with pytest.raises(FallbackToDouble) as err:
        mixed_precision_solve(A, z / x, rng.standard_normal(40), 0.0, 30, 1e-300, max_iters=2)
    assert err.value.stats.iterations == 2


def test_mixed_breakdown_after_retry(monkeypatch):
    calls = []

    def breaking(M, c_m, u):
        calls.append(c_m)
        raise normal_eq.CholeskyBreakdown(1, "binary32")

    monkeypatch.setattr(normal_eq, "shifted_cholesky", breaking)
    with pytest.raises(FallbackToDouble) as err:
        mixed_precision_solve(np.eye(3), np.ones(3), np.ones(3), 0.0, 30, 1e-8)
    assert calls == [30, 120]
    assert err.value.stats.retried


def test_mixed_path_never_forms_double_normal_matrix(rng, monkeypatch):
    m, n = 30, 70
    A = rng.standard_normal((m, n))
    seen = []

    class Spy(np.ndarray):
        def __array_ufunc__(self, ufunc, method, *inputs, **kw):
            args = [np.asarray(a) if isinstance(a, Spy) else a for a in inputs]
            out = getattr(ufunc, method)(*args, **kw)
            seen.append((np.shape(out), np.asarray(out).dtype))
            return out

    gram = []
    real_gram = normal_eq._gram_lower
    monkeypatch.setattr(normal_eq, "_gram_lower", lambda B, d: gram.append(B.dtype) or real_gram(B, d))
    D = np.exp(rng.uniform(-2, 2, n))
    mixed_precision_solve(A.view(Spy), D, rng.standard_normal(m), 1e-10, 30, 1e-8, A32=A.astype(np.float32))
    assert gram == [np.float32]
    assert seen and all(not (shape == (m, m) and dt == np.float64) for shape, dt in seen)


def test_double_examples():
    np.testing.assert_allclose(double_precision_solve(np.eye(2), np.ones(2), np.array([3.0, 4.0]), 0.0), [3, 4])
    w = np.array([1.0, -2.0])
    np.testing.assert_allclose(double_precision_solve(np.zeros((2, 3)), np.ones(3), w, 1.0), w)


def test_double_breakdown_is_hard_error(monkeypatch):
    calls = []

    def breaking(M, c_m, u):
        calls.append(u)
        raise normal_eq.CholeskyBreakdown(2, "binary64")

    monkeypatch.setattr(normal_eq, "shifted_cholesky", breaking)
    with pytest.raises(LinearSolverError):
        double_precision_solve(np.eye(2), np.ones(2), np.ones(2), 0.0)
    assert calls == [U_D, U_D]


def test_double_against_cg(rng):
    A = rng.standard_normal((50, 80))
    D = np.exp(rng.uniform(-1, 1, 80))
    w = rng.standard_normal(50)
    dy = double_precision_solve(A, D, w, 1e-10)
    ref, _ = pcg(normal_operator(A, D, 1e-10), lambda v: v, w, 1e-12, 500)
    assert np.linalg.norm(dy - ref) <= 1e-8 * np.linalg.norm(ref)


def test_solve_factored_corrects_large_residual(rng, monkeypatch):
    A = rng.standard_normal((10, 20))
    M, f = normal_eq.factor_normal_matrix(A, np.ones(20), 0.0)
    w = rng.standard_normal(10)
    real = normal_eq._potrs
    sloppy = iter([1.001, 1.0])
    monkeypatch.setattr(normal_eq, "_potrs", lambda fac, v: next(sloppy) * real(fac, v))
    dy, corrected = normal_eq.solve_factored(M, f, w)
    assert corrected


# ---------------------------------------------------------------- recovery and residuals


def test_recover_examples(rng):
    A, x, z, _ = _instance(rng)
    n = x.size
    dx, dz = recover_direction(A, x, z, z / x, np.zeros(20), np.zeros(n), x * z, 0.0)
    np.testing.assert_allclose(dx, x, rtol=1e-14)
    np.testing.assert_allclose(dz, 0, atol=1e-14 * np.max(z))
    dy = rng.standard_normal(20)
    dx, dz = recover_direction(A, x, z, z / x + 0.3, dy, A.T @ dy, np.zeros(n), 0.3)
    np.testing.assert_array_equal(dx, 0)
    np.testing.assert_array_equal(dz, 0)


def test_recover_complementarity_identity(rng):
    A, x, z, rhs = _instance(rng)
    D = z / x + 1e-10
    dy = rng.standard_normal(20)
    dx, dz = recover_direction(A, x, z, D, dy, rhs.zeta, rhs.eta, 1e-10)
    assert np.linalg.norm(z * dx + x * dz - rhs.eta) <= 1e-12 * (np.linalg.norm(rhs.eta) + np.linalg.norm(z * dx))


def test_residual_norms_zero_direction(rng):
    A, x, z, rhs = _instance(rng)
    r, s, c = residual_norms(A, 1e-10, 1e-10, np.zeros(35), np.zeros(20), np.zeros(35), rhs, x, z)
    assert (r, s, c) == pytest.approx((np.linalg.norm(rhs.xi), np.linalg.norm(rhs.zeta), np.linalg.norm(rhs.eta)))


@pytest.mark.parametrize("c_m", [0.0, 30.0])
def test_exact_direction_on_toy(c_m):
    A = np.array([[1.0, 1.0]])
    x, z = np.array([1.0, 2.0]), np.array([0.5, 0.25])
    rhs = NewtonRhs(np.array([0.5]), np.array([0.1, -0.2]), np.array([0.3, 0.1]))
    d = newton_direction(A, x, z, rhs, 0.0, 0.0, 1e-14, DOUBLE, c_m=c_m)
    scale = np.linalg.norm(A) * np.linalg.norm(d.dx) + np.linalg.norm(rhs.xi) + np.linalg.norm(rhs.eta)
    # the binary64 factor is of M + c_m u_d diag(M), a relative perturbation of c_m u_d
    assert max(d.r_norm, d.s_norm, d.comp_norm) <= 10 * U_D * (1 + c_m) * max(scale, 1.0)
    if c_m == 0:
        assert max(d.r_norm, d.s_norm, d.comp_norm) <= 10 * U_D * max(scale, 1.0)


def test_cg_tolerance_floor():
    w = np.array([3.0, 4.0])
    assert cg_tolerance(2.0, 0.95, w) == pytest.approx(0.1)
    assert cg_tolerance(0.0, 0.95, w) == pytest.approx(6e-16)


def test_newton_direction_unknown_mode(rng):
    A, x, z, rhs = _instance(rng)
    with pytest.raises(ValueError):
        newton_direction(A, x, z, rhs, 1e-10, 1e-10, 1e-8, "quad")


def test_newton_direction_callable_tol(rng):
    A, x, z, rhs = _instance(rng)
    seen = []
    d = newton_direction(A, x, z, rhs, 1e-10, 1e-10, lambda w: seen.append(w) or 1e-6, MIXED)
    assert len(seen) == 1 and d.tol == 1e-6
    assert d.r_norm <= 1e-6 * (1 + 1e-6)


# ---------------------------------------------------------------- properties


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 25), st.integers(0, 30), st.integers(0, 10_000), st.sampled_from([MIXED, DOUBLE]))
def test_residual_identity_and_dual_exactness(m, extra, seed, mode):
    rng = np.random.default_rng(seed)
    n = m + extra
    A, x, z, rhs = _instance(rng, m, n)
    rho = delta = 1e-10
    tol = 1e-6 * (1 + np.linalg.norm(rhs.xi))
    d = newton_direction(A, x, z, rhs, rho, delta, tol, mode)
    D, w = assemble_rhs(A, x, z, rhs.xi, rhs.zeta, rhs.eta, rho)
    normal_res = np.linalg.norm(normal_operator(A, D, delta)(d.dy) - w)
    assert abs(d.r_norm - normal_res) <= 1e-8 * (1 + np.linalg.norm(rhs.xi))
    bound = 1e3 * U_D * (rho * np.linalg.norm(d.dx) + np.linalg.norm(A) * np.linalg.norm(d.dy)
                         + np.linalg.norm(d.dz) + np.linalg.norm(rhs.zeta))
    assert d.s_norm <= bound
    comp_bound = 1e3 * U_D * (np.max(z) * np.max(np.abs(d.dx)) + np.max(x) * np.max(np.abs(d.dz))
                              + np.max(np.abs(rhs.eta)))
    assert np.max(np.abs(z * d.dx + x * d.dz - rhs.eta)) <= comp_bound
    if mode == MIXED:
        assert d.r_norm <= tol * (1 + 1e-6) + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 30), st.integers(0, 10_000), st.floats(-12, -6))
def test_mode_equivalence(m, seed, log_tol):
    rng = np.random.default_rng(seed)
    n = 2 * m
    A = rng.standard_normal((m, n))
    D = np.exp(rng.uniform(-1, 1, n))
    B = A / np.sqrt(D)
    assert np.linalg.cond(B @ B.T) <= 1e6
    w = rng.standard_normal(m)
    tol = 10.0**log_tol * np.linalg.norm(w)
    dy_m, _ = mixed_precision_solve(A, D, w, 1e-10, 30, tol)
    dy_d = double_precision_solve(A, D, w, 1e-10)
    assert np.linalg.norm(dy_m - dy_d) / np.linalg.norm(dy_d) <= 10 * tol / np.linalg.norm(w)
