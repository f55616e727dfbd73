"""Covariate-shift design: same conditional law, shifted covariate mixture.

Source covariates put 5/6 of their mass on (0, 0.5) and 1/6 on (0.5, 1);
the target flips the weights, so the density ratio p_t/p_s is 1/5 on the
left component and 5 on the right one.  Responses are N(f(x), 1) for one of
five mean functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..data import Dataset
from ..rng import make_rng

MEAN_FNS = ("i", "ii", "iii", "iv", "v")


def _ramp(z):
    return np.minimum(1.0, np.maximum(z, 0.0))


def _f_iv(x):
    return _ramp(4.0 * x - 1.0) + _ramp(4.0 * x - 3.0) - 2.0


_MEANS: dict[str, Callable] = {
    "i": lambda x: np.cos(2.0 * np.pi * x) - 1.0,
    "ii": lambda x: np.sin(2.0 * np.pi * x),
    "iii": lambda x: np.abs(x - 0.5) - 0.5,
    "iv": _f_iv,
    "v": lambda x: x * np.sin(4.0 * np.pi * x),
}


def density_ratio(x) -> np.ndarray:
    """True p_t(x)/p_s(x); 1/5 below 0.5 and 5 above."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x < 0.5, 0.2, 5.0)


def _draw_mixture(rng: np.random.Generator, size: int, left_weight: float) -> np.ndarray:
    left = rng.random(size) < left_weight
    u = rng.random(size)
    return np.where(left, 0.5 * u, 0.5 + 0.5 * u)


@dataclass(frozen=True)
class CovShiftBundle:
    source: Dataset
    target_test: Dataset
    target_aux: Dataset
    mean_fn: str

    def true_mean(self, x) -> np.ndarray:
        return _MEANS[self.mean_fn](np.asarray(x, dtype=np.float64).ravel())

    def true_density_ratio(self, x) -> np.ndarray:
        return density_ratio(np.asarray(x, dtype=np.float64).ravel())


def gen_covshift(mean_fn: str, n: int, m: int, n_aux: int, seed: int) -> CovShiftBundle:
    """Labeled source (n), labeled target test set (m), unlabeled aux set (n_aux)."""
    if mean_fn not in MEAN_FNS:
        raise ValueError(f"unknown mean function {mean_fn!r}; expected one of {MEAN_FNS}")
    if min(n, m, n_aux) < 1:
        raise ValueError("n, m, n_aux must all be >= 1")
    f = _MEANS[mean_fn]
    rng_s = make_rng(seed, 0)
    rng_t = make_rng(seed, 1)
    rng_a = make_rng(seed, 2)
    xs = _draw_mixture(rng_s, n, 5.0 / 6.0)
    ys = f(xs) + rng_s.standard_normal(n)
    xt = _draw_mixture(rng_t, m, 1.0 / 6.0)
    yt = f(xt) + rng_t.standard_normal(m)
    xa = _draw_mixture(rng_a, n_aux, 1.0 / 6.0)
    return CovShiftBundle(
        source=Dataset(xs.reshape(-1, 1), ys),
        target_test=Dataset(xt.reshape(-1, 1), yt),
        target_aux=Dataset(xa.reshape(-1, 1)),
        mean_fn=mean_fn,
    )
