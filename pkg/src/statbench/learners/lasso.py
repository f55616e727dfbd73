"""LASSO with cyclic coordinate descent and 5-fold cross-validated lambda.

The solver works on the standardized problem

    min_b  1/(2n) ||y_c - Xs b||^2 + lambda * ||b||_1

where Xs has column mean 0 / variance 1 (training statistics) and y_c is
centered; the intercept is therefore unpenalized and recovered afterwards.
Coordinate updates use the Gram/covariance formulation, so a full sweep only
touches p-vectors.  KKT certificates are tracked for every fitted path point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data import Dataset
from ..rng import make_rng
from .base import FittedModel, Predictor, PredictiveDistribution

N_LAMBDAS = 100
LAMBDA_MIN_RATIO = 1e-3
KKT_TOL = 1e-6


def soft_threshold(z: np.ndarray, t: float) -> np.ndarray:
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def _standardize(x: np.ndarray, y: np.ndarray):
    """Column stats plus the indices of usable (non-constant) columns."""
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    keep = np.flatnonzero(sd > 1e-12 * np.maximum(1.0, np.abs(mu)))
    xs = (x[:, keep] - mu[keep]) / sd[keep]
    return xs, y - y.mean(), mu, sd, keep


def cd_path(xs: np.ndarray, yc: np.ndarray, lambdas: np.ndarray,
            kkt_tol: float = KKT_TOL, max_sweeps: int = 10_000) -> np.ndarray:
    """Warm-started coordinate descent down a decreasing lambda path.

    Returns the (len(lambdas), p) coefficient matrix on the standardized
    scale.  Each lambda iterates until the worst KKT violation sits a decade
    below ``kkt_tol``, so downstream certificates have slack.
    """
    n, p = xs.shape
    gram = xs.T @ xs / n
    xty = xs.T @ yc / n
    diag = np.diag(gram).copy()
    beta = np.zeros(p)
    out = np.empty((len(lambdas), p))
    stop = 0.1 * kkt_tol
    for li, lam in enumerate(lambdas):
        for _ in range(max_sweeps):
            grad = xty - gram @ beta  # refresh exactly once per sweep
            for j in range(p):
                cj = grad[j] + beta[j] * diag[j]
                new = soft_threshold(cj, lam) / diag[j]
                step = new - beta[j]
                if step != 0.0:
                    beta[j] = new
                    grad -= gram[:, j] * step
            grad = xty - gram @ beta
            active = beta != 0.0
            v_in = float(np.max(np.abs(grad[~active])) - lam) if not active.all() else 0.0
            v_ac = float(np.max(np.abs(grad[active] - lam * np.sign(beta[active])))) if active.any() else 0.0
            if max(v_in, v_ac) <= stop:
                break
        out[li] = beta
    return out


def kkt_violation(xs: np.ndarray, yc: np.ndarray, beta: np.ndarray, lam: float) -> float:
    """Worst-case slack of the stationarity conditions at beta."""
    n = xs.shape[0]
    corr = xs.T @ (yc - xs @ beta) / n
    active = beta != 0.0
    v = 0.0
    if np.any(~active):
        v = max(v, float(np.max(np.abs(corr[~active])) - lam))
    if np.any(active):
        v = max(v, float(np.max(np.abs(corr[active] - lam * np.sign(beta[active])))))
    return v


def lasso_objective(xs, yc, beta, lam) -> float:
    n = xs.shape[0]
    r = yc - xs @ beta
    return 0.5 * float(r @ r) / n + lam * float(np.sum(np.abs(beta)))


@dataclass(frozen=True)
class LassoModel(FittedModel):
    """CV-tuned LASSO on the original feature scale."""

    coef: np.ndarray
    intercept: float
    chosen_lambda: float
    lambda_grid: np.ndarray
    cv_mse: np.ndarray
    coef_path: np.ndarray          # standardized scale, full-data refit
    kept_columns: np.ndarray
    dropped_columns: np.ndarray
    fold_seed: int
    warnings: list = field(default_factory=list)

    def predict(self, query: Dataset) -> PredictiveDistribution:
        return PredictiveDistribution.point(query.features @ self.coef + self.intercept)


def lambda_grid_for(xs: np.ndarray, yc: np.ndarray) -> np.ndarray:
    n = xs.shape[0]
    lam_max = float(np.max(np.abs(xs.T @ yc)) / n)
    if lam_max <= 0:
        lam_max = 1e-3
    return np.geomspace(lam_max, LAMBDA_MIN_RATIO * lam_max, N_LAMBDAS)


def fit_lasso_cv(train: Dataset, folds: int = 5, seed: int = 0) -> LassoModel:
    """Tune lambda by K-fold CV and refit on the full training set.

    Constant feature columns are dropped (recorded on the model); held-out
    error is measured in original y units.
    """
    if folds < 2:
        raise ValueError("need at least 2 folds")
    x, y = train.features, train.require_labels()
    n = train.n
    if n < folds:
        raise ValueError("n must be at least the number of folds")
    xs_full, yc_full, mu, sdev, keep = _standardize(x, y)
    dropped = np.setdiff1d(np.arange(x.shape[1]), keep)
    warnings = []
    if dropped.size:
        warnings.append(f"dropped constant columns {dropped.tolist()}")
    lambdas = lambda_grid_for(xs_full, yc_full)

    rng = make_rng(seed, 7)
    perm = rng.permutation(n)
    fold_ids = np.array_split(perm, folds)

    cv_err = np.zeros((folds, len(lambdas)))
    for f, test_idx in enumerate(fold_ids):
        tr = np.setdiff1d(perm, test_idx)
        xs, yc, mu_f, sd_f, keep_f = _standardize(x[tr][:, keep], y[tr])
        path = cd_path(xs, yc, lambdas)
        xt = (x[test_idx][:, keep][:, keep_f] - mu_f[keep_f]) / sd_f[keep_f]
        preds = xt @ path.T + y[tr].mean()
        cv_err[f] = np.mean((y[test_idx][:, None] - preds) ** 2, axis=0)
    mean_cv = cv_err.mean(axis=0)
    best = int(np.argmin(mean_cv))
    lam = float(lambdas[best])

    path_full = cd_path(xs_full, yc_full, lambdas)
    beta_std = path_full[best]
    coef = np.zeros(x.shape[1])
    coef[keep] = beta_std / sdev[keep]
    intercept = float(y.mean() - coef @ mu)
    return LassoModel(coef, intercept, lam, lambdas, mean_cv, path_full, keep,
                      dropped, seed, warnings)


class LassoPredictor(Predictor):
    def __init__(self, folds: int = 5, seed: int = 0):
        self.folds = folds
        self.seed = seed

    def fit(self, train: Dataset) -> LassoModel:
        return fit_lasso_cv(train, self.folds, self.seed)
