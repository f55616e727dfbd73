"""Data-generating processes for the semi-supervised estimation study.

Three joint laws, one per working model.  In all of them the working model is
misspecified on purpose: the estimand is the population risk minimizer, not a
"true" parameter.

* linear:    Y = 1 + 1'X + 1'(X^3 - X^2 + exp(X)) + eps,  X ~ N_p(0, I),
             eps ~ N(0, 4), elementwise powers/exp.
* logistic:  P(Y=1|X) = sigmoid(a0 + a1'X + a2'X^2) with a0 = 11, a1 = +1,
             a2 = -1 entrywise, X ~ .5 N_p(1, S) + .5 N_p(-1, S),
             S_ij = 0.5^|i-j|.
* quantile:  Y = 1 + .5 1'X + (sum_j x_j)^2 + (1 + a3'X) eps, eps ~ N(0,1),
             a3 = (.5 repeated p - floor(p/2) times, then zeros).  The double
             sum over ordered index pairs (j, k) includes j = k, so it
             collapses to the squared coordinate sum.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cholesky

from ..data import Dataset, SemiSupPair
from ..rng import make_rng

SETTINGS = ("linear", "logistic", "quantile")

LOGISTIC_INTERCEPT = 11.0


def _banded_cov(p: int, base: float) -> np.ndarray:
    idx = np.arange(p)
    return base ** np.abs(idx[:, None] - idx[None, :])


def quantile_scale_coef(p: int) -> np.ndarray:
    """Heteroskedasticity direction a3: 0.5 on the first p - floor(p/2) coords."""
    a3 = np.zeros(p)
    a3[: p - p // 2] = 0.5
    return a3


def linear_response(x: np.ndarray, eps: np.ndarray) -> np.ndarray:
    return 1.0 + x.sum(axis=1) + (x**3 - x**2 + np.exp(x)).sum(axis=1) + eps


def logistic_prob(x: np.ndarray) -> np.ndarray:
    logit = LOGISTIC_INTERCEPT + x.sum(axis=1) - (x**2).sum(axis=1)
    return 1.0 / (1.0 + np.exp(-logit))


def quantile_response(x: np.ndarray, eps: np.ndarray) -> np.ndarray:
    s = x.sum(axis=1)
    return 1.0 + 0.5 * s + s**2 + (1.0 + x @ quantile_scale_coef(x.shape[1])) * eps


def sample(setting: str, size: int, p: int, rng: np.random.Generator,
           labeled: bool = True):
    """Draw covariates (and labels) from one setting's joint law."""
    if setting == "linear":
        x = rng.standard_normal((size, p))
        if not labeled:
            return x, None
        return x, linear_response(x, 2.0 * rng.standard_normal(size))
    if setting == "logistic":
        chol = cholesky(_banded_cov(p, 0.5), lower=True)
        sign = np.where(rng.random(size) < 0.5, 1.0, -1.0)
        x = sign[:, None] + rng.standard_normal((size, p)) @ chol.T
        if not labeled:
            return x, None
        return x, (rng.random(size) < logistic_prob(x)).astype(np.float64)
    if setting == "quantile":
        x = rng.standard_normal((size, p))
        if not labeled:
            return x, None
        return x, quantile_response(x, rng.standard_normal(size))
    raise ValueError(f"unknown semi-supervised setting {setting!r}")


def gen_semisup(setting: str, p: int, n: int, m: int, seed: int) -> SemiSupPair:
    """Draw a labeled set of size n and an unlabeled set of size m.

    Parameters
    ----------
    setting : one of 'linear', 'logistic', 'quantile'
    p : feature dimension (>= 1)
    n, m : labeled / unlabeled sample sizes (>= 1)
    seed : master seed; identical arguments give bit-identical output
    """
    if setting not in SETTINGS:
        raise ValueError(f"unknown semi-supervised setting {setting!r}")
    if p < 1:
        raise ValueError("p must be >= 1")
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    rng_l = make_rng(seed, 0)
    rng_u = make_rng(seed, 1)
    xl, yl = sample(setting, n, p, rng_l, labeled=True)
    xu, _ = sample(setting, m, p, rng_u, labeled=False)
    return SemiSupPair(Dataset(xl, yl), Dataset(xu), setting)
