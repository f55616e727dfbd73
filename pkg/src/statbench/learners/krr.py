"""Kernel ridge regression with an RBF kernel.

The dual coefficients solve (K + n * lambda * I) alpha = y.  The kernel
lengthscale defaults to the median pairwise distance of the training inputs;
no intercept is fitted, so heavy regularization shrinks predictions to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from ..data import Dataset
from .base import FittedModel, Predictor, PredictiveDistribution
from .kernels import median_heuristic, rbf_gram


class KrrNumericalError(RuntimeError):
    pass


@dataclass(frozen=True)
class KrrModel(FittedModel):
    x_train: np.ndarray
    dual_coef: np.ndarray
    lengthscale: float
    lam: float
    residual_inf_norm: float

    def predict(self, query: Dataset) -> PredictiveDistribution:
        k = rbf_gram(query.features, self.x_train, self.lengthscale)
        return PredictiveDistribution.point(k @ self.dual_coef)


def fit_krr(train: Dataset, lengthscale: float | None = None,
            lam: float = 1e-3) -> KrrModel:
    """Solve the dual system; refine once so the residual stays tiny.

    Parameters
    ----------
    train : labeled dataset
    lengthscale : RBF lengthscale; None selects the median heuristic
    lam : ridge penalty (> 0), scaled by n inside the system
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    x, y = train.features, train.require_labels()
    n = train.n
    ell = median_heuristic(x) if lengthscale is None else float(lengthscale)
    k = rbf_gram(x, x, ell)
    a = k + n * lam * np.eye(n)
    cf = None
    jitter = 0.0
    for _ in range(4):
        try:
            cf = cho_factor(a + jitter * np.eye(n), lower=True)
            break
        except np.linalg.LinAlgError:
            jitter = 1e-12 * n if jitter == 0.0 else jitter * 100.0
    if cf is None:
        raise KrrNumericalError("dual system singular beyond the jitter budget")
    a = a + jitter * np.eye(n)
    alpha = cho_solve(cf, y)
    # one step of iterative refinement keeps the residual near machine level
    alpha = alpha + cho_solve(cf, y - a @ alpha)
    res = float(np.max(np.abs(a @ alpha - y)))
    return KrrModel(x, alpha, ell, float(lam), res)


class KrrPredictor(Predictor):
    def __init__(self, lengthscale: float | None = None, lam: float = 1e-3):
        self.lengthscale = lengthscale
        self.lam = lam

    def fit(self, train: Dataset) -> KrrModel:
        return fit_krr(train, self.lengthscale, self.lam)
