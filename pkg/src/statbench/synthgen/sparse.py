"""Sparse linear regression designs with SNR-calibrated noise.

Y = X'beta* + eps where beta* has s unit entries, X ~ N_p(0, Sigma) with
Sigma identity or banded 0.35^|i-j|, and the noise variance is
sigma^2 = beta*' Sigma beta* / snr.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky

from ..data import Dataset
from ..rng import make_rng

BETA_TYPES = ("I", "II")
COV_TYPES = ("identity", "banded")


def beta_support(p: int, s: int, beta_type: str) -> np.ndarray:
    """0-based support indices of the s unit coefficients.

    Type I spreads them approximately evenly: round(k * p / s) for
    k = 0..s-1, clamped to [0, p-1], collisions advanced to the next free
    index.  Type II uses the first s indices.
    """
    if not 1 <= s <= p:
        raise ValueError("need 1 <= s <= p")
    if beta_type == "II":
        return np.arange(s)
    if beta_type != "I":
        raise ValueError(f"unknown beta type {beta_type!r}")
    taken = np.zeros(p, dtype=bool)
    out = []
    for k in range(s):
        j = min(max(int(round(k * p / s)), 0), p - 1)
        while taken[j]:
            j = (j + 1) % p
        taken[j] = True
        out.append(j)
    return np.sort(np.asarray(out))


def make_cov(p: int, cov_type: str) -> np.ndarray:
    if cov_type == "identity":
        return np.eye(p)
    if cov_type == "banded":
        idx = np.arange(p)
        return 0.35 ** np.abs(idx[:, None] - idx[None, :])
    raise ValueError(f"unknown covariance type {cov_type!r}")


@dataclass(frozen=True)
class SparseLinearDesign:
    beta_star: np.ndarray
    beta_type: str
    cov_type: str
    snr: float
    sigma2: float
    train: Dataset
    test: Dataset

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.beta_star)


def gen_sparse_linear(p: int, s: int, beta_type: str, cov_type: str, snr: float,
                      n: int, n_test: int, seed: int) -> SparseLinearDesign:
    if snr <= 0:
        raise ValueError("snr must be positive")
    beta = np.zeros(p)
    beta[beta_support(p, s, beta_type)] = 1.0
    sigma = make_cov(p, cov_type)
    sigma2 = float(beta @ sigma @ beta) / snr
    rng = make_rng(seed)
    chol = cholesky(sigma, lower=True)
    x = rng.standard_normal((n + n_test, p)) @ chol.T
    y = x @ beta + np.sqrt(sigma2) * rng.standard_normal(n + n_test)
    return SparseLinearDesign(
        beta_star=beta,
        beta_type=beta_type,
        cov_type=cov_type,
        snr=float(snr),
        sigma2=sigma2,
        train=Dataset(x[:n], y[:n]),
        test=Dataset(x[n:], y[n:]),
    )
