"""Binary classification with homogeneous label corruption.

Two generative models:

* M1: P(Y=1)=0.9 and X|Y=r ~ N_5(mu_r, I) with mu_1 = (1.5, 0, 0, 0, 0) and
  mu_0 = -mu_1 (a correctly specified LDA problem).
* M2: X ~ Unif[0,1]^5 with eta(x) = min{4(x1-.5)^2 + 4(x2-.5)^2, 1}, a
  nonlinear decision boundary.

Each training label is flipped independently with probability rho; the test
labels stay clean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Dataset
from ..rng import make_rng

MODELS = ("M1", "M2")

M1_PI = 0.9
M1_MU = np.array([1.5, 0.0, 0.0, 0.0, 0.0])


def eta_m1(x) -> np.ndarray:
    """P(Y=1|X=x) under M1 via the Gaussian discriminant with identity cov."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    score = np.log(M1_PI / (1.0 - M1_PI)) + x @ (2.0 * M1_MU)
    return 1.0 / (1.0 + np.exp(-score))


def eta_m2(x) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    return np.minimum(4.0 * (x[:, 0] - 0.5) ** 2 + 4.0 * (x[:, 1] - 0.5) ** 2, 1.0)


def eta(model: str, x) -> np.ndarray:
    if model == "M1":
        return eta_m1(x)
    if model == "M2":
        return eta_m2(x)
    raise ValueError(f"unknown label-noise model {model!r}")


@dataclass(frozen=True)
class NoisyLabelBundle:
    train: Dataset
    train_clean_labels: np.ndarray
    test: Dataset
    rho: float
    model: str

    def eta(self, x) -> np.ndarray:
        return eta(self.model, x)


def _draw(model: str, size: int, rng: np.random.Generator):
    if model == "M1":
        y = (rng.random(size) < M1_PI).astype(np.float64)
        mu = np.where(y[:, None] == 1.0, M1_MU, -M1_MU)
        x = mu + rng.standard_normal((size, 5))
        return x, y
    x = rng.random((size, 5))
    y = (rng.random(size) < eta_m2(x)).astype(np.float64)
    return x, y


def gen_labelnoise(model: str, n: int, rho: float, n_test: int = 10_000,
                   seed: int = 0) -> NoisyLabelBundle:
    """Corrupted training set of size n plus a clean test set of size n_test."""
    if model not in MODELS:
        raise ValueError(f"unknown label-noise model {model!r}")
    if not 0.0 <= rho < 0.5:
        raise ValueError("rho must lie in [0, 0.5)")
    rng = make_rng(seed)
    x_tr, y_clean = _draw(model, n, rng)
    flip = rng.random(n) < rho
    y_noisy = np.where(flip, 1.0 - y_clean, y_clean)
    x_te, y_te = _draw(model, n_test, rng)
    return NoisyLabelBundle(
        train=Dataset(x_tr, y_noisy),
        train_clean_labels=y_clean,
        test=Dataset(x_te, y_te),
        rho=float(rho),
        model=model,
    )
