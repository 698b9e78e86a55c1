import math

import numpy as np
import pytest

from sgres import oracle
from sgres.errors import DomainError, EigenConvergenceError, FitError, OracleInstabilityError
from sgres.oracle import (
    bisection_eigenvalues, convergence_study, counting_function, discretize_1d,
    eigenvalues_symmetric, fit_weyl, harmonic_oscillator, sturm_count, worker_count,
)


def _residual(diag, off, lam):
    """Residual of an eigenpair whose vector comes from two inverse-iteration steps."""
    M = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    rng = np.random.default_rng(0)
    v = rng.normal(size=len(diag))
    shift = lam + 1e-10 * max(1.0, abs(lam))
    for _ in range(2):
        v = np.linalg.solve(M - shift * np.eye(len(diag)), v)
        v /= np.linalg.norm(v)
    return np.linalg.norm(M @ v - lam * v), np.linalg.norm(M, 2)


def test_two_by_two():
    np.testing.assert_allclose(eigenvalues_symmetric([2.0, 2.0], [-1.0]), [1.0, 3.0], rtol=1e-15)


def test_laplacian_closed_form():
    ev = eigenvalues_symmetric(np.full(5, 2.0), np.full(4, -1.0))
    k = np.arange(1, 6)
    np.testing.assert_allclose(ev, 2 - 2 * np.cos(k * np.pi / 6), atol=1e-14)


def test_diagonal_matrix():
    d = np.array([3.0, -1.0, 2.0, 0.5])
    np.testing.assert_array_equal(eigenvalues_symmetric(d, np.zeros(3)), np.sort(d))


def test_rejects_bad_shapes():
    with pytest.raises(ValueError):
        eigenvalues_symmetric([1.0, 2.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        eigenvalues_symmetric([1.0, np.nan], [0.0])


def test_non_convergence_reports_index(monkeypatch):
    d, e = np.array([1.0, 2.0, 3.0]), np.array([1.0, 1.0])
    assert oracle._tql(d.copy(), e, 0) >= 0
    monkeypatch.setattr(oracle, "_tql", lambda d, e, m: 1)
    with pytest.raises(EigenConvergenceError) as info:
        eigenvalues_symmetric(d, e)
    assert info.value.index == 1


def test_against_bisection_random_8x8():
    rng = np.random.default_rng(1)
    for _ in range(20):
        d, e = rng.normal(size=8) * 3, rng.normal(size=7)
        norm = np.linalg.norm(np.diag(d) + np.diag(e, 1) + np.diag(e, -1), 2)
        ql = eigenvalues_symmetric(d, e)
        bs = bisection_eigenvalues(d, e)
        assert np.max(np.abs(ql - bs)) <= 1e-10 * norm


def test_backward_stability_spot_checks():
    op = discretize_1d("<x>", 10.0, 400)
    ev = eigenvalues_symmetric(op)
    for i in (0, 7, 150, 399):
        r, norm = _residual(op.diag, op.off, ev[i])
        assert r <= 1e-10 * norm


def test_sturm_count_matches_eigenvalues():
    op = discretize_1d("<x>", 8.0, 300)
    ev = eigenvalues_symmetric(op)
    cf = counting_function(ev)
    rng = np.random.default_rng(2)
    lams = np.sort(rng.uniform(ev[0] - 1, ev[-1] + 1, 20))
    counts = sturm_count(op.diag, op.off, lams)
    # Sturm counts eigenvalues strictly below; no sample lies on an eigenvalue
    assert list(counts) == [cf(l) for l in lams]
    assert sturm_count(op.diag, op.off, float(lams[3])) == counts[3]


def test_constant_weight_spectrum():
    N, L = 50, math.pi / 2
    op = discretize_1d("1", L, N)
    k = np.arange(1, N + 1)
    expect = 1 + (2 - 2 * np.cos(k * np.pi / (N + 1))) / op.h ** 2
    np.testing.assert_allclose(eigenvalues_symmetric(op), expect, rtol=1e-12)


def test_three_point_grid():
    op = discretize_1d("1", 2.0, 3)
    assert op.h == 1.0
    np.testing.assert_allclose(eigenvalues_symmetric(op), 1 + np.array([2 - 2 ** 0.5, 2, 2 + 2 ** 0.5]),
                               rtol=1e-14)


def test_m1_matrix_is_exactly_symmetric():
    op = discretize_1d("<x>", 5.0, 40)
    M = op.dense()
    assert np.array_equal(M, M.T)
    x = op.x
    np.testing.assert_allclose(op.diag, (1 + x * x) * (1 + 2 / op.h ** 2), rtol=1e-15)


def test_discretize_validation():
    with pytest.raises(DomainError):
        discretize_1d("x1", 1.0, 10)
    with pytest.raises(ValueError):
        discretize_1d("<xi>", 1.0, 10)
    with pytest.raises(ValueError):
        discretize_1d("1", 1.0, 2)


def test_second_order_convergence():
    L = math.pi / 2  # exact eigenvalues 1 + k^2
    k = np.arange(1, 11)
    errs = []
    for N in (99, 199, 399):
        ev = eigenvalues_symmetric(discretize_1d("1", L, N))[:10]
        errs.append(np.abs(ev - (1 + k * k)))
    for a, b in zip(errs[:-1], errs[1:]):
        np.testing.assert_allclose(a / b, 4.0, atol=0.5)


def test_harmonic_oscillator_self_test():
    ev = eigenvalues_symmetric(harmonic_oscillator(10.0, 8000))[:20]
    assert np.max(np.abs(ev - (2 * np.arange(20) + 1))) <= 1e-3


def test_counting_function_inclusive():
    cf = counting_function([5.0, 1.0, 3.0])
    assert cf(3.0) == 2 and cf(0.5) == 0 and cf(5.0) == 3
    assert list(cf(np.array([1.0, 4.0]))) == [1, 2]
    with pytest.raises(ValueError):
        counting_function([1.0, np.nan])
    with pytest.raises(ValueError):
        cf(float("nan"))


def test_counting_function_is_nondecreasing():
    cf = counting_function(np.random.default_rng(4).normal(size=100))
    lam = np.linspace(-4, 4, 1000)
    assert np.all(np.diff(cf(lam)) >= 0)


def test_free_operator_has_no_stable_range():
    with pytest.raises(OracleInstabilityError):
        convergence_study("1", 50.0, [(10.0, 400), (20.0, 800), (40.0, 1600)])


def test_small_m1_study():
    r = convergence_study("<x>", 400.0, [(20.0, 2000), (40.0, 4000)])
    assert 0 < r.trust_lambda <= 401.0
    assert r.trust_lambda < min(x.wall for x in r.rungs) + 1e-9
    assert r.counting(r.trust_lambda) == len(r.counting)


def test_ladder_needs_two_rungs():
    with pytest.raises(ValueError):
        convergence_study("<x>", 100.0, [(10.0, 100)])


def test_worker_count_cap(monkeypatch):
    monkeypatch.setenv("SGRES_THREADS", "1")
    assert worker_count(8) == 1
    monkeypatch.delenv("SGRES_THREADS")
    assert worker_count(3) == 3


def test_study_is_deterministic_across_workers(monkeypatch):
    ladder = [(10.0, 600), (20.0, 1200)]
    a = convergence_study("<x>", 80.0, ladder, workers=1)
    b = convergence_study("<x>", 80.0, ladder, workers=2)
    assert np.array_equal(a.counting.eigenvalues, b.counting.eigenvalues)
    assert a.trust_lambda == b.trust_lambda


def test_fit_recovers_model():
    lam = np.geomspace(10, 1e4, 50)
    y = 0.3 * lam ** 0.5 * np.log(lam) + 0.7 * lam ** 0.5
    f = fit_weyl(y, lam, 0.5)
    assert abs(f.C_log_hat - 0.3) < 1e-10 and abs(f.C_power_hat - 0.7) < 1e-10
    assert f.residual < 1e-12 and not f.flagged


def test_fit_with_perturbation():
    lam = np.geomspace(10, 1e4, 50)
    y = 0.3 * lam ** 0.5 * np.log(lam) + 0.7 * lam ** 0.5 + 2.0 * lam ** 0.3
    f = fit_weyl(y, lam, 0.5)
    assert f.residual > 0
    assert abs(f.C_log_hat - 0.3) < 0.5 and abs(f.C_power_hat - 0.7) < 5.0


def test_fit_constant_is_flagged():
    lam = np.geomspace(10, 1e4, 50)
    f = fit_weyl(np.full(50, 3.0), lam, 0.5)
    # small against the data scale 3, and the misfit is flagged
    assert abs(f.C_log_hat) < 0.2 and abs(f.C_power_hat) < 1.0
    assert f.flagged


def test_fit_rank_deficient():
    with pytest.raises(FitError):
        fit_weyl(np.ones(5), np.full(5, 100.0), 0.5)
    with pytest.raises(FitError):
        fit_weyl(np.ones(5), np.linspace(0.5, 2, 5), 0.5)


def test_fit_accepts_counting_function():
    # N(lam) = floor(sqrt(lam)) = sqrt(lam) - 1/2 on average
    cf = counting_function(np.arange(1, 1000) ** 2.0)
    f = fit_weyl(cf, np.geomspace(100, 9e5, 60), 0.5, log_term=False)
    assert f.C_log_hat == 0.0 and f.C_power_hat == pytest.approx(1.0, rel=0.02)
