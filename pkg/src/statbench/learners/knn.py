"""k-nearest-neighbor classification with a CV-tuned neighbor count.

The candidate grid is 10 equally spaced integers between floor(n^(1/4)) and
floor(n^(3/4)), deduplicated; k is chosen by 5-fold CV accuracy with ties
resolved toward the smaller (more stable) k.  Votes are majority with ties
going to class 1, under the Euclidean metric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Dataset
from ..rng import make_rng


def knn_grid(n: int) -> np.ndarray:
    lo = int(np.floor(n ** 0.25))
    hi = int(np.floor(n ** 0.75))
    if lo < 1 or hi < lo:
        raise ValueError(f"n={n} too small to build the neighbor grid")
    ks = np.unique(np.round(np.linspace(lo, hi, 10)).astype(int))
    return ks[ks >= 1]


def _vote(x_train, y_train, x_query, k, block=512):
    """Majority vote among the k nearest training rows; ties -> class 1."""
    n = x_train.shape[0]
    k = min(k, n)
    out = np.empty(x_query.shape[0])
    t2 = np.sum(x_train**2, axis=1)
    for s in range(0, x_query.shape[0], block):
        q = x_query[s:s + block]
        d2 = t2[None, :] - 2.0 * q @ x_train.T + np.sum(q**2, axis=1)[:, None]
        nn = np.argpartition(d2, k - 1, axis=1)[:, :k]
        share = y_train[nn].mean(axis=1)
        out[s:s + block] = (share >= 0.5).astype(np.float64)
    return out


@dataclass(frozen=True)
class KnnModel:
    k: int
    x_train: np.ndarray
    y_train: np.ndarray
    grid: np.ndarray
    cv_accuracy: np.ndarray


def fit_knn_cv(train: Dataset, folds: int = 5, seed: int = 0) -> KnnModel:
    x, y = train.features, train.require_labels()
    n = train.n
    if n < 10:
        raise ValueError("need at least 10 training rows")
    ks = knn_grid(n)
    rng = make_rng(seed, 5)
    perm = rng.permutation(n)
    fold_ids = np.array_split(perm, folds)
    hits = np.zeros(len(ks))
    for test_idx in fold_ids:
        tr = np.setdiff1d(perm, test_idx)
        for i, k in enumerate(ks):
            pred = _vote(x[tr], y[tr], x[test_idx], k)
            hits[i] += np.sum(pred == y[test_idx])
    acc = hits / n
    # ties -> smaller k: argmax returns the first maximizer on the sorted grid
    k = int(ks[int(np.argmax(acc))])
    return KnnModel(k, x, y, ks, acc)


def knn_classify(model: KnnModel, query: Dataset) -> np.ndarray:
    return _vote(model.x_train, model.y_train, query.features, model.k)
