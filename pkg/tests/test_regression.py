import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.linear_model import Lasso

from optsdd.errors import ConfigError, NumericalError
from optsdd.regression import (FitConfig, cv_folds, default_lambdas, fit, fit_lasso_cv, fit_sls, lambda_max,
                               lasso_path)


def design(L, P, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(L, P))
    A[:, 0] = 1.0
    return A


def orthonormal_design(L, P, seed):
    """Column 0 all ones; the others orthogonal to it and to each other, squared norm L."""
    rng = np.random.default_rng(seed)
    M = np.column_stack([np.ones(L), rng.normal(size=(L, P - 1))])
    Q, _ = np.linalg.qr(M)
    A = Q * np.sqrt(L)
    A[:, 0] = 1.0
    return A


def mp_normal_equations(A, b):
    mpmath.mp.dps = 50
    Am = mpmath.matrix(A.tolist())
    bm = mpmath.matrix(b.tolist())
    c = mpmath.lu_solve(Am.T * Am, Am.T * bm)
    return np.array([float(v) for v in c])


def test_sls_exact_recovery():
    A = design(60, 12, 1)
    c0 = np.random.default_rng(2).normal(size=12)
    np.testing.assert_allclose(fit_sls(A, A @ c0), c0, rtol=1e-8)


def test_sls_orthogonal_rhs_gives_zero():
    A = design(40, 5, 3)
    Q, _ = np.linalg.qr(A, mode="complete")
    b = Q[:, 10]
    assert np.max(np.abs(fit_sls(A, b))) < 1e-12


def test_sls_matches_extended_precision_oracle():
    A = design(50, 10, 4)
    b = np.random.default_rng(5).normal(size=50)
    c = fit_sls(A, b)
    np.testing.assert_allclose(c, mp_normal_equations(A, b), rtol=1e-8, atol=1e-12)
    r = b - A @ c
    assert np.max(np.abs(A.T @ r)) < 1e-8 * np.max(np.abs(A.T @ b))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sls_permutation_equivariant(seed):
    A = design(30, 6, seed % 1000)
    b = np.random.default_rng(seed).normal(size=30)
    perm = np.random.default_rng(seed + 1).permutation(30)
    np.testing.assert_allclose(fit_sls(A[perm], b[perm]), fit_sls(A, b), atol=1e-10)


def test_sls_errors():
    with pytest.raises(NumericalError, match="underdetermined"):
        fit_sls(design(5, 6, 0), np.zeros(5))
    A = design(20, 4, 0)
    A[:, 3] = A[:, 1]
    with pytest.raises(NumericalError, match="rank deficient"):
        fit_sls(A, np.ones(20))


def test_lasso_tiny_lambda_matches_sls():
    A = design(80, 9, 6)
    b = A @ np.arange(9.0) + np.random.default_rng(7).normal(scale=0.1, size=80)
    res = fit_lasso_cv(A, b, FitConfig(lambdas=(1e-12,)))
    np.testing.assert_allclose(res.coef, fit_sls(A, b), rtol=1e-6, atol=1e-9)


def test_lasso_full_shrinkage_keeps_mean():
    A = design(50, 8, 8)
    b = np.random.default_rng(9).normal(loc=3.0, size=50)
    lam = 10 * np.max(np.abs(A.T @ b))
    c = lasso_path(A, b, [lam])[0]
    assert np.all(c[1:] == 0)
    assert c[0] == pytest.approx(b.mean(), rel=1e-12)


def test_lambda_max_zeroes_everything():
    A = design(50, 8, 10)
    b = A @ np.linspace(1, 2, 8)
    lam = lambda_max(A, b)
    assert np.all(lasso_path(A, b, [lam * 1.0000001])[0][1:] == 0)
    assert np.any(lasso_path(A, b, [lam * 0.99])[0][1:] != 0)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_lasso_path_matches_sklearn(seed):
    A = design(70, 15, seed)
    rng = np.random.default_rng(100 + seed)
    truth = np.where(rng.random(15) < 0.4, rng.normal(size=15), 0.0)
    b = A @ truth + rng.normal(scale=0.2, size=70)
    lams = default_lambdas(A, b, 12, 1e-3)
    ours = lasso_path(A, b, lams, tol=1e-12, max_iter=200_000)
    L = A.shape[0]
    for lam, c in zip(lams, ours):
        sk = Lasso(alpha=lam / (2 * L), fit_intercept=True, tol=1e-14, max_iter=1_000_000).fit(A[:, 1:], b)
        np.testing.assert_allclose(c[1:], sk.coef_, atol=1e-6)
        assert c[0] == pytest.approx(sk.intercept_, abs=1e-6)


def test_lasso_kkt_conditions():
    A = design(100, 20, 11)
    rng = np.random.default_rng(12)
    b = A[:, :4] @ np.array([1.0, 2.0, -1.5, 0.7]) + rng.normal(scale=0.3, size=100)
    res = fit_lasso_cv(A, b, FitConfig(tol=1e-12, max_iter=200_000, fdev=0.0))
    c, lam = res.coef, res.lam
    grad = 2 * A.T @ (b - A @ c)
    active = np.flatnonzero(c[1:]) + 1
    inactive = np.setdiff1d(np.arange(1, 20), active)
    assert abs(grad[0]) < 1e-6 * lam
    np.testing.assert_allclose(grad[active], lam * np.sign(c[active]), atol=1e-6 * lam)
    assert np.all(np.abs(grad[inactive]) <= lam * (1 + 1e-6))


def test_sparsity_along_path():
    A = design(120, 30, 13)
    rng = np.random.default_rng(14)
    b = A[:, :6] @ rng.normal(size=6) + rng.normal(scale=0.5, size=120)
    path = lasso_path(A, b, default_lambdas(A, b, 40, 1e-3))
    nnz = np.count_nonzero(path[:, 1:], axis=1)
    assert np.all(np.diff(nnz) >= -1)
    assert nnz[0] == 0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_sparse_support_recovery(seed):
    L, P = 200, 50
    A = orthonormal_design(L, P, seed)
    rng = np.random.default_rng(50 + seed)
    support = np.sort(rng.choice(np.arange(1, P), 3, replace=False))
    truth = np.zeros(P)
    truth[0] = 1.0
    truth[support] = [2.0, -1.5, 1.0]
    b = A @ truth + rng.normal(scale=0.01, size=L)
    res = fit_lasso_cv(A, b, FitConfig(seed=seed))
    np.testing.assert_array_equal(np.flatnonzero(res.coef[1:]) + 1, support)
    # a different fold shuffle keeps the chosen penalty within one grid step
    other = fit_lasso_cv(A, b, FitConfig(seed=seed + 10))
    i, j = (int(np.flatnonzero(res.lambdas == v)[0]) for v in (res.lam, other.lam))
    assert abs(i - j) <= 1


def test_cv_error_tie_goes_to_larger_lambda():
    A = orthonormal_design(40, 5, 0)
    b = np.full(40, 2.0)  # every penalty gives the same fit
    res = fit_lasso_cv(A, b, FitConfig(n_folds=4, lambdas=(3.0, 2.0, 1.0)))
    assert res.lam == 3.0


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 300), st.integers(2, 12), st.integers(0, 1000))
def test_folds_partition(L, k, seed):
    if L < k:
        with pytest.raises(ConfigError):
            cv_folds(L, k, seed)
        return
    folds = cv_folds(L, k, seed)
    allidx = np.concatenate(folds)
    assert len(folds) == k
    np.testing.assert_array_equal(np.sort(allidx), np.arange(L))
    assert max(map(len, folds)) - min(map(len, folds)) <= 1


def test_fold_seed_changes_partition():
    a = cv_folds(100, 10, 0)
    b = cv_folds(100, 10, 1)
    assert any(not np.array_equal(x, y) for x, y in zip(a, b))


@pytest.mark.parametrize("kw", [dict(method="ridge"), dict(n_folds=1), dict(lambdas=()),
                                dict(lambdas=(1.0, 2.0)), dict(lambdas=(1.0, -1.0)), dict(lambda_ratio=2.0)])
def test_fit_config_validation(kw):
    with pytest.raises(ConfigError):
        FitConfig(**kw)


def test_fit_dispatch():
    A = design(60, 5, 20)
    b = A @ np.ones(5)
    np.testing.assert_allclose(fit(A, b, FitConfig(method="sls")), np.ones(5), rtol=1e-10)
    assert fit(A, b).shape == (5,)
