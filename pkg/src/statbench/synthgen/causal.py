"""Six simulation designs for heterogeneous treatment effect estimation.

Covariates are uniform on [-0.5, 0.5]^6.  Each setup specifies a propensity
e(x), a base surface b(x) = (mu0 + mu1)/2, and an effect tau(x) = mu1 - mu0;
potential outcomes are mu_t(x) + eps with a shared Gaussian noise draw, and
the observed outcome follows the Bernoulli(e(x)) treatment assignment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..data import Dataset
from ..rng import make_rng

SETUPS = ("A", "B", "C", "D", "E", "F")


def _softplus(z):
    return np.logaddexp(0.0, z)


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _e_A(x):
    return np.minimum(0.8, np.maximum(np.sin(np.pi * x[:, 0] * x[:, 1]), 0.2))


def _b_A(x):
    return (np.sin(np.pi * x[:, 0] * x[:, 1]) + 2.0 * (x[:, 2] - 0.5) ** 2
            + x[:, 3] + 0.5 * x[:, 4])


def _tau_A(x):
    return 0.2 + (x[:, 0] + x[:, 1]) / 2.0


def _b_B(x):
    return (np.maximum(np.maximum(x[:, 0] + x[:, 1], x[:, 2]), 0.0)
            + np.maximum(x[:, 3] + x[:, 4], 0.0))


def _tau_B(x):
    return x[:, 0] + _softplus(x[:, 1])


def _b_C(x):
    return 2.0 * _softplus(x[:, 0] + x[:, 1] + x[:, 2])


def _b_D(x):
    return 0.5 * (np.maximum(x[:, 0] + x[:, 1] + x[:, 2], 0.0)
                  + np.maximum(x[:, 3] + x[:, 4], 0.0))


def _tau_D(x):
    return (np.maximum(x[:, 0] + x[:, 1] + x[:, 2], 0.0)
            - np.maximum(x[:, 3] + x[:, 4], 0.0))


def _e_EF(x):
    return 1.0 / (1.0 + np.exp(3.0 * x[:, 1] + 3.0 * x[:, 2]))


def _b_EF(x):
    return 5.0 * np.maximum(x[:, 0] + x[:, 1], 0.0)


def _tau_E(x):
    return 2.0 * np.maximum(x[:, 0] > 0.1, x[:, 1] > 0.1).astype(np.float64) - 1.0


_TABLE: dict[str, tuple[Callable, Callable, Callable]] = {
    "A": (_e_A, _b_A, _tau_A),
    "B": (lambda x: np.full(x.shape[0], 0.5), _b_B, _tau_B),
    "C": (lambda x: _sigmoid(-(x[:, 1] + x[:, 2])), _b_C,
          lambda x: np.ones(x.shape[0])),
    "D": (lambda x: 1.0 / (1.0 + np.exp(-x[:, 0]) + np.exp(-x[:, 1])), _b_D, _tau_D),
    "E": (_e_EF, _b_EF, _tau_E),
    "F": (_e_EF, _b_EF, _tau_B),
}


def _as_matrix(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.shape[1] != 6:
        raise ValueError("causal designs use 6 covariates")
    return x


@dataclass(frozen=True)
class CateOracle:
    """True nuisance and effect functions attached to a generated dataset.

    All handles accept an (n, 6) matrix (or a single 6-vector) and return a
    length-n array.  mu0/mu1 are derived so that mu1 - mu0 = tau and
    (mu0 + mu1)/2 = b hold exactly.
    """

    setup: str

    def propensity(self, x) -> np.ndarray:
        return _TABLE[self.setup][0](_as_matrix(x))

    def base(self, x) -> np.ndarray:
        return _TABLE[self.setup][1](_as_matrix(x))

    def tau(self, x) -> np.ndarray:
        return _TABLE[self.setup][2](_as_matrix(x))

    def mu0(self, x) -> np.ndarray:
        x = _as_matrix(x)
        return self.base(x) - self.tau(x) / 2.0

    def mu1(self, x) -> np.ndarray:
        x = _as_matrix(x)
        return self.base(x) + self.tau(x) / 2.0

    def mu(self, t, x) -> np.ndarray:
        """Response surface mu_t(x) for a per-row treatment vector t."""
        x = _as_matrix(x)
        t = np.asarray(t, dtype=np.float64).ravel()
        return self.base(x) + (t - 0.5) * self.tau(x)

    def marginal_mean(self, x) -> np.ndarray:
        """m(x) = E[Y|X=x] = e(x) mu1(x) + (1 - e(x)) mu0(x)."""
        x = _as_matrix(x)
        e = self.propensity(x)
        return e * self.mu1(x) + (1.0 - e) * self.mu0(x)


@dataclass(frozen=True)
class CausalDataset:
    features: np.ndarray
    treatment: np.ndarray
    outcome: np.ndarray
    oracle: CateOracle

    @property
    def n(self) -> int:
        return self.features.shape[0]

    def as_dataset(self) -> Dataset:
        return Dataset(self.features, self.outcome)


def gen_cate(setup: str, n: int, sigma2: float, seed: int) -> CausalDataset:
    """Generate one observational dataset from the requested setup.

    The same noise draw enters both potential outcomes, so the observed
    outcome is mu_T(X) + eps with eps ~ N(0, sigma2).
    """
    if setup not in SETUPS:
        raise ValueError(f"unknown setup {setup!r}; expected one of {SETUPS}")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    rng = make_rng(seed)
    x = rng.uniform(-0.5, 0.5, size=(n, 6))
    oracle = CateOracle(setup)
    e = oracle.propensity(x)
    t = (rng.random(n) < e).astype(np.float64)
    eps = np.sqrt(sigma2) * rng.standard_normal(n)
    y = oracle.mu(t, x) + eps
    return CausalDataset(x, t, y, oracle)


def gen_cate_test_grid(setup: str, n: int, seed: int) -> Dataset:
    """Unlabeled evaluation covariates from the same marginal law."""
    rng = make_rng(seed, 99)
    return Dataset(rng.uniform(-0.5, 0.5, size=(n, 6)))
