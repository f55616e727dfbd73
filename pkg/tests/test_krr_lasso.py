"""Kernel ridge and LASSO solver certificates."""

import numpy as np
import pytest

from statbench.data import Dataset
from statbench.learners import fit_krr, fit_lasso_cv, kkt_violation, soft_threshold
from statbench.learners.lasso import cd_path, lambda_grid_for, lasso_objective


# ---------------------------------------------------------------------------
# kernel ridge

def test_krr_single_point():
    m = fit_krr(Dataset(np.array([[0.0]]), np.array([2.0])), lengthscale=1.0, lam=0.25)
    assert m.dual_coef[0] == pytest.approx(2.0 / 1.25, rel=1e-12)


def test_krr_orthonormal_rows_diagonal_solve():
    # far-separated points make K ~ I, so alpha_i ~ y_i / (1 + n lam)
    x = np.arange(5, dtype=float).reshape(-1, 1) * 1e3
    y = np.array([1.0, -2.0, 0.5, 3.0, -1.0])
    lam = 0.1
    m = fit_krr(Dataset(x, y), lengthscale=1.0, lam=lam)
    assert np.allclose(m.dual_coef, y / (1.0 + 5 * lam), atol=1e-12)


def test_krr_huge_lambda_shrinks_to_zero():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(30, 1))
    y = 1.0 + x[:, 0]
    m = fit_krr(Dataset(x, y), lam=1e9)
    assert np.max(np.abs(m.predict(Dataset(x)).mean)) < 1e-6


def test_krr_residual_invariant():
    rng = np.random.default_rng(4)
    for lam in (1e-6, 1e-3, 1.0):
        x = rng.normal(size=(80, 2))
        y = np.sin(x[:, 0]) + rng.normal(size=80)
        m = fit_krr(Dataset(x, y), lam=lam)
        assert m.residual_inf_norm < 1e-8


def test_krr_rejects_nonpositive_lambda():
    with pytest.raises(ValueError):
        fit_krr(Dataset(np.ones((3, 1)), np.ones(3)), lam=0.0)


# ---------------------------------------------------------------------------
# lasso

def _standardized(seed, n=60, p=8):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, p))
    x = (x - x.mean(axis=0)) / x.std(axis=0)
    y = x[:, 0] - 0.5 * x[:, 3] + 0.3 * rng.normal(size=n)
    return x, y - y.mean()


def test_soft_threshold():
    assert soft_threshold(np.array([3.0]), 1.0)[0] == 2.0
    assert soft_threshold(np.array([-3.0]), 1.0)[0] == -2.0
    assert soft_threshold(np.array([0.5]), 1.0)[0] == 0.0


def test_all_zero_at_lambda_max():
    xs, yc = _standardized(0)
    lam_max = float(np.max(np.abs(xs.T @ yc)) / xs.shape[0])
    path = cd_path(xs, yc, np.array([lam_max, lam_max * 1.5]))
    assert np.all(path == 0.0)


def test_orthonormal_design_soft_threshold_oracle():
    # orthonormal columns: beta_j = S(x_j'y/n, lambda) in closed form
    rng = np.random.default_rng(1)
    n, p = 64, 6
    q, _ = np.linalg.qr(rng.normal(size=(n, p)))
    xs = q * np.sqrt(n)  # columns with x_j'x_j = n
    beta_true = np.array([2.0, 0.0, -1.0, 0.0, 0.5, 0.0])
    yc = xs @ beta_true
    lam = 0.4
    got = cd_path(xs, yc, np.array([lam]))[0]
    want = soft_threshold(xs.T @ yc / n, lam)
    assert np.allclose(got, want, atol=1e-9)


def test_kkt_certificate_along_path():
    xs, yc = _standardized(5)
    lambdas = lambda_grid_for(xs, yc)[::10]
    path = cd_path(xs, yc, lambdas)
    for lam, beta in zip(lambdas, path):
        assert kkt_violation(xs, yc, beta, float(lam)) <= 1e-6


def test_objective_monotone_over_sweeps():
    # one coordinate sweep never increases the objective
    xs, yc = _standardized(9)
    lam = 0.05
    n, p = xs.shape
    gram = xs.T @ xs / n
    xty = xs.T @ yc / n
    beta = np.zeros(p)
    prev = lasso_objective(xs, yc, beta, lam)
    for _ in range(25):
        grad = xty - gram @ beta
        for j in range(p):
            cj = grad[j] + beta[j] * gram[j, j]
            new = soft_threshold(np.array([cj]), lam)[0] / gram[j, j]
            step = new - beta[j]
            if step != 0.0:
                beta[j] = new
                grad -= gram[:, j] * step
        cur = lasso_objective(xs, yc, beta, lam)
        assert cur <= prev + 1e-12
        prev = cur


def test_cv_fit_recovers_noiseless_signal():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(300, 12))
    y = x[:, 1].copy()
    model = fit_lasso_cv(Dataset(x, y), folds=5, seed=0)
    xt = rng.normal(size=(200, 12))
    pred = model.predict(Dataset(xt)).mean
    r2 = 1.0 - np.sum((pred - xt[:, 1]) ** 2) / np.sum((xt[:, 1] - xt[:, 1].mean()) ** 2)
    assert r2 > 0.999


def test_cv_kkt_on_full_refit_grid():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(120, 10))
    y = 2.0 * x[:, 0] + rng.normal(size=120)
    model = fit_lasso_cv(Dataset(x, y), folds=4, seed=1)
    xs = (x - x.mean(axis=0)) / x.std(axis=0)
    yc = y - y.mean()
    for lam, beta in zip(model.lambda_grid[::7], model.coef_path[::7]):
        assert kkt_violation(xs, yc, beta, float(lam)) <= 1e-6


def test_constant_columns_dropped_with_warning():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(50, 4))
    x[:, 2] = 3.14
    y = x[:, 0] + 0.1 * rng.normal(size=50)
    model = fit_lasso_cv(Dataset(x, y), folds=5, seed=0)
    assert 2 in model.dropped_columns
    assert model.coef[2] == 0.0
    assert model.warnings


def test_needs_enough_rows_for_folds():
    with pytest.raises(ValueError):
        fit_lasso_cv(Dataset(np.ones((3, 2)), np.ones(3)), folds=5, seed=0)
