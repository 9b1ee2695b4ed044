import numpy as np
import pytest
import scipy.linalg
import scipy.special

from magnuskit.eigensolve import SLProblem, _exponents, _potential_samples, check_step_guard, find_eigenvalue, scan_eigenvalues, shoot
from magnuskit.errors import FlatMismatchError, MagnusError, NotConvergedError
from magnuskit.linalg import sl2_exp_batch
from magnuskit.problems import sl_well


def free(N=200, order=4):
    return SLProblem(lambda x: 0.0, 0.0, np.pi, N, order)


def fd_eigenvalues(V, a, b, n, k):
    """Dense second-order finite differences on n interior points."""
    x = np.linspace(a, b, n + 2)[1:-1]
    h = x[1] - x[0]
    main = 2 / h**2 + V(x)
    off = -np.ones(n - 1) / h**2
    return scipy.linalg.eigh_tridiagonal(main, off, select="i", select_range=(0, k - 1))[0]


# -- shooting ------------------------------------------------------------------------


def test_free_eigenfunction_vanishes():
    for n in (1, 2, 5):
        assert abs(shoot(free(), float(n * n))[0]) <= 1e-8


def test_below_spectrum_growth():
    phi, T = shoot(free(), -10.0)
    s = np.sqrt(10.0)
    assert phi > 0
    assert phi == pytest.approx(np.sinh(s * np.pi) / s, rel=1e-12)


def test_factors_unimodular():
    prob = sl_well("square", N=100)
    sig = _exponents(prob, 7.3, _potential_samples(prob))
    np.testing.assert_allclose(sig[:, 0, 0] + sig[:, 1, 1], 0, atol=1e-14)
    E = sl2_exp_batch(sig)
    assert np.max(np.abs(np.linalg.det(E) - 1)) <= 1e-13
    _, T = shoot(prob, 7.3)
    assert np.isrealobj(T)
    assert abs(np.linalg.det(T) - 1) <= 1e-12


# -- Newton ----------------------------------------------------------------------------------


def test_newton_free():
    assert find_eigenvalue(free(), 0.8) == pytest.approx(1.0, abs=1e-9)
    assert find_eigenvalue(free(), 8.5) == pytest.approx(9.0, abs=1e-9)


def test_newton_from_eigenvalue_is_immediate():
    assert find_eigenvalue(free(), 4.0, max_iter=2) == pytest.approx(4.0, abs=1e-12)


def test_newton_not_converged_carries_last():
    with pytest.raises(NotConvergedError) as info:
        find_eigenvalue(free(), 3.0, tol=1e-15, max_iter=1)
    assert info.value.last is not None and np.isfinite(info.value.last)


def test_newton_flat_mismatch():
    prob = SLProblem(lambda x: np.nan, 0.0, 1.0, 20)
    with pytest.raises(FlatMismatchError) as info:
        find_eigenvalue(prob, 1.0)
    assert info.value.code == "flat-mismatch"


def test_newton_arguments():
    with pytest.raises(MagnusError):
        find_eigenvalue(free(), 1.0, tol=0)
    with pytest.raises(MagnusError):
        find_eigenvalue(free(), 1.0, max_iter=0)


# -- scans ------------------------------------------------------------------------------------


def test_scan_free():
    lams = scan_eigenvalues(free(), 0.0, 30.0, 0.5)
    np.testing.assert_allclose(lams, [1, 4, 9, 16, 25], rtol=1e-6)


def test_scan_below_spectrum_is_empty():
    assert scan_eigenvalues(free(), -20.0, 0.5, 0.5) == []


def test_scan_harmonic_well():
    V = lambda x: x * x  # noqa: E731
    prob = SLProblem(V, -5.0, 5.0, 400, 4)
    lams = scan_eigenvalues(prob, 0.0, 6.0, 0.25)
    oracle = fd_eigenvalues(V, -5.0, 5.0, 2000, 3)
    np.testing.assert_allclose(lams, oracle, atol=1e-3)
    np.testing.assert_allclose(lams, [1, 3, 5], atol=1e-3)


def test_scan_values_increasing_and_simple():
    lams = scan_eigenvalues(sl_well("mathieu", N=200), -10.0, 60.0, 0.25)
    assert np.all(np.diff(lams) > 0.1)


@pytest.mark.parametrize("order", [4, 6])
def test_mathieu_against_scipy(order):
    prob = sl_well("mathieu", N=200, order=order)
    lams = scan_eigenvalues(prob, -10.0, 40.0, 0.25)
    want = [scipy.special.mathieu_b(n, 5.0) for n in range(1, len(lams) + 1)]
    assert len(lams) >= 5
    np.testing.assert_allclose(lams, want, atol=1e-6 if order == 4 else 1e-10)


def test_convergence_in_n_order4():
    ref = find_eigenvalue(sl_well("square", N=3200, order=6), 4.0)
    errs = [abs(find_eigenvalue(sl_well("square", N=n), ref) - ref) for n in (25, 50, 100)]
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((rates >= 3.7) & (rates <= 5.3))


def test_error_grows_linearly_in_lambda():
    ref_prob = sl_well("square", N=3200, order=6)
    prob = sl_well("square", N=200, order=4)
    lams = scan_eigenvalues(ref_prob, 0.5, 400.0, 0.5)
    errs = [abs(find_eigenvalue(prob, lam) - lam) for lam in lams]
    slope = np.polyfit(np.log(lams), np.log(errs), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.3)


def test_step_guard():
    with pytest.raises(MagnusError):
        check_step_guard(SLProblem(lambda x: 0.0, 0.0, np.pi, 10), 1e4)
    check_step_guard(free(), 400.0)
    with pytest.raises(MagnusError):
        scan_eigenvalues(SLProblem(lambda x: 0.0, 0.0, np.pi, 10), 0.0, 1e4, 1.0)
    with pytest.raises(MagnusError):
        scan_eigenvalues(free(), 0.0, 1.0, 0.0)


def test_problem_validation():
    with pytest.raises(MagnusError):
        SLProblem(lambda x: 0.0, 1.0, 0.0)
    with pytest.raises(MagnusError):
        SLProblem(lambda x: 0.0, 0.0, 1.0, N=2)
    with pytest.raises(MagnusError):
        SLProblem(lambda x: 0.0, 0.0, 1.0, order=8)
