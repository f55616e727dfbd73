"""Accumulated local effects of a fitted model on one feature.

Per-bin local effects are averages of f(x with x_j set to the upper edge)
minus f(x with x_j set to the lower edge) over the points falling in the bin;
these are accumulated across the quantile bins and the curve is centered so
its count-weighted mean is zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Dataset

DEFAULT_BINS = 40


@dataclass(frozen=True)
class AleCurve:
    feature: int
    edges: np.ndarray          # K + 1 strictly increasing bin edges
    values: np.ndarray         # K centered accumulated effects, at upper edges
    counts: np.ndarray         # points per bin
    offset: float              # centering shift; -offset is the curve level at edges[0]

    def edge_values(self) -> np.ndarray:
        """Centered curve at all K + 1 edges (prepends the left anchor)."""
        return np.concatenate([[-self.offset], self.values])


def ale(model, data: Dataset, feature: int, bins: int = DEFAULT_BINS) -> AleCurve:
    """Apley--Zhu ALE estimate with quantile bin edges.

    Parameters
    ----------
    model : fitted model exposing ``predict(Dataset).mean``
    data : reference points whose rows anchor the local differences
    feature : column index
    bins : requested bin count (duplicated quantiles collapse)
    """
    if bins < 2:
        raise ValueError("need at least 2 bins")
    x = data.features
    col = x[:, feature]
    edges = np.unique(np.quantile(col, np.linspace(0.0, 1.0, bins + 1)))
    if edges.size < 2:
        raise ValueError(f"feature {feature} is constant; ALE undefined")
    k = edges.size - 1
    # right-closed bins, with the minimum folded into the first bin
    idx = np.clip(np.searchsorted(edges, col, side="left") - 1, 0, k - 1)
    local = np.zeros(k)
    counts = np.bincount(idx, minlength=k)
    hi = x.copy()
    lo = x.copy()
    hi[:, feature] = edges[idx + 1]
    lo[:, feature] = edges[idx]
    diff = model.predict(Dataset(hi)).mean - model.predict(Dataset(lo)).mean
    sums = np.bincount(idx, weights=diff, minlength=k)
    occupied = counts > 0
    local[occupied] = sums[occupied] / counts[occupied]
    acc = np.cumsum(local)
    offset = float(np.sum(counts * acc) / counts.sum())
    return AleCurve(feature, edges, acc - offset, counts, offset)
