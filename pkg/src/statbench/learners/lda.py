"""Linear discriminant analysis and the oracle Bayes rules it imitates.

The LDA plug-in uses the class frequencies, class means, and the pooled
covariance with divisor n - 2.  The decision rule assigns class 1 when

    log(pi / (1 - pi)) + (x - (mu0 + mu1) / 2)' Sigma^{-1} (mu1 - mu0) >= 0.

``bayes_classify`` applies this same form with the true M1 parameters, or the
paraboloid posterior probability for M2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ..data import Dataset
from ..synthgen.noisylabels import M1_MU, M1_PI, eta_m2


@dataclass(frozen=True)
class LdaModel:
    prior1: float
    mu0: np.ndarray
    mu1: np.ndarray
    cov: np.ndarray
    ridge_applied: bool

    def scores(self, x: np.ndarray) -> np.ndarray:
        return _lda_scores(x, self.prior1, self.mu0, self.mu1, self.cov)


def _lda_scores(x, prior1, mu0, mu1, cov):
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    try:
        cf = cho_factor(cov, lower=True)
        direction = cho_solve(cf, mu1 - mu0)
    except np.linalg.LinAlgError:
        direction = np.linalg.solve(cov, mu1 - mu0)
    mid = 0.5 * (mu0 + mu1)
    return np.log(prior1 / (1.0 - prior1)) + (x - mid) @ direction


def fit_lda(train: Dataset) -> LdaModel:
    """Plug-in estimates; a tiny ridge is added if the pooled cov is singular."""
    x, y = train.features, train.require_labels()
    n, p = x.shape
    n1 = int(np.sum(y == 1.0))
    n0 = n - n1
    if n0 == 0 or n1 == 0:
        raise ValueError("both classes must be present")
    if n < p + 2:
        raise ValueError("need n >= p + 2 for the pooled covariance")
    mu0 = x[y == 0.0].mean(axis=0)
    mu1 = x[y == 1.0].mean(axis=0)
    centered = x - np.where(y[:, None] == 1.0, mu1, mu0)
    cov = centered.T @ centered / (n - 2)
    ridge = False
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        cov = cov + (1e-8 * np.trace(cov) / p) * np.eye(p)
        ridge = True
    return LdaModel(n1 / n, mu0, mu1, cov, ridge)


def lda_classify(model: LdaModel, query: Dataset) -> np.ndarray:
    return (model.scores(query.features) >= 0.0).astype(np.float64)


def bayes_classify(model: str, query: Dataset) -> np.ndarray:
    """Bayes-optimal decisions for the label-noise generative models."""
    x = query.features
    if model == "M1":
        scores = _lda_scores(x, M1_PI, -M1_MU, M1_MU, np.eye(5))
        return (scores >= 0.0).astype(np.float64)
    if model == "M2":
        return (eta_m2(x) > 0.5).astype(np.float64)
    raise ValueError(f"unknown generative model {model!r}")
