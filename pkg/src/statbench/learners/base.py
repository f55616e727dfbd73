"""Pluggable predictor interface and its predictive-distribution payload."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..data import Dataset

QUANTILE_GRID = (0.025, 0.25, 0.5, 0.75, 0.975)


class PredictionError(ValueError):
    """Raised when a predictive distribution violates its invariants."""


@dataclass(frozen=True)
class PredictiveDistribution:
    """Per-query mean, standard deviation, and quantile rows.

    Quantiles are evaluated on QUANTILE_GRID and each row must be
    nondecreasing.  Point predictors report sd 0 and constant quantile rows.
    """

    mean: np.ndarray
    sd: np.ndarray
    quantiles: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64).ravel()
        sd = np.asarray(self.sd, dtype=np.float64).ravel()
        q = np.asarray(self.quantiles, dtype=np.float64)
        if q.ndim != 2 or q.shape != (mean.shape[0], len(QUANTILE_GRID)):
            raise PredictionError(
                f"quantiles must have shape ({mean.shape[0]}, {len(QUANTILE_GRID)})")
        if sd.shape != mean.shape:
            raise PredictionError("sd length must match mean length")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(sd)) and np.all(np.isfinite(q))):
            raise PredictionError("predictive distribution contains NaN/Inf")
        if np.any(sd < 0):
            raise PredictionError("sd must be nonnegative")
        if np.any(np.diff(q, axis=1) < 0):
            raise PredictionError("quantile rows must be nondecreasing")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "sd", sd)
        object.__setattr__(self, "quantiles", q)

    @classmethod
    def point(cls, mean: np.ndarray) -> "PredictiveDistribution":
        """Degenerate distribution used by point predictors."""
        mean = np.asarray(mean, dtype=np.float64).ravel()
        return cls(mean, np.zeros_like(mean),
                   np.repeat(mean[:, None], len(QUANTILE_GRID), axis=1))

    @classmethod
    def gaussian(cls, mean: np.ndarray, sd: np.ndarray) -> "PredictiveDistribution":
        from scipy.stats import norm

        mean = np.asarray(mean, dtype=np.float64).ravel()
        sd = np.asarray(sd, dtype=np.float64).ravel()
        z = norm.ppf(np.asarray(QUANTILE_GRID))
        return cls(mean, sd, mean[:, None] + sd[:, None] * z[None, :])


class FittedModel(ABC):
    """Immutable result of a fit; prediction is pure."""

    @abstractmethod
    def predict(self, query: Dataset) -> PredictiveDistribution:
        ...

    def predict_mean(self, x: np.ndarray) -> np.ndarray:
        """Convenience: posterior/point mean on a raw feature matrix."""
        return self.predict(Dataset(np.atleast_2d(np.asarray(x, dtype=np.float64)))).mean


class Predictor(ABC):
    """Anything that can be trained on a labeled Dataset."""

    @abstractmethod
    def fit(self, train: Dataset) -> FittedModel:
        ...


class _FittedFunction(FittedModel):
    def __init__(self, fn: Callable):
        self._fn = fn

    def predict(self, query: Dataset) -> PredictiveDistribution:
        return PredictiveDistribution.point(np.asarray(self._fn(query.features)))


class FunctionPredictor(Predictor):
    """Wraps a known function as a Predictor; fitting is a no-op.

    Used to plug exact response surfaces into meta-learner pipelines.
    """

    def __init__(self, fn: Callable):
        self._fn = fn

    def fit(self, train: Dataset) -> FittedModel:
        return _FittedFunction(self._fn)


class MeanPredictor(Predictor):
    """Predicts the training-label mean everywhere."""

    def fit(self, train: Dataset) -> FittedModel:
        c = float(np.mean(train.require_labels()))
        return _FittedFunction(lambda x: np.full(np.atleast_2d(x).shape[0], c))
