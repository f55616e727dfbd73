"""Meta-learners for conditional average treatment effects.

Every learner is a recipe over a pluggable regression Predictor plus, where
needed, a propensity estimator; the returned CateEstimate exposes tau_hat as
an evaluable handle backed by the fitted component models.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .data import Dataset
from .learners.base import FittedModel, Predictor, PredictiveDistribution
from .learners.gbrt import GbrtPredictor
from .mestim import WorkingModel, design, erm
from .synthgen.causal import CateOracle, CausalDataset

DEFAULT_CLIP = 0.01


@dataclass(frozen=True)
class CateEstimate:
    learner: str
    tau_hat: Callable  # (n, 6) matrix -> length-n array
    components: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        return self.tau_hat(np.atleast_2d(np.asarray(x, dtype=np.float64)))


# ---------------------------------------------------------------------------
# propensity estimators

class LogisticPropensity:
    """Default e-hat: logistic ERM on (X, T)."""

    def fit_propensity(self, x: np.ndarray, t: np.ndarray) -> Callable:
        est = erm(WorkingModel("logistic"), Dataset(x, t))

        def ehat(q):
            z = design(q) @ est.theta
            return 1.0 / (1.0 + np.exp(-z))

        return ehat


class OraclePropensity:
    """True e(x) pulled from the generating oracle."""

    def __init__(self, oracle: CateOracle):
        self.oracle = oracle

    def fit_propensity(self, x, t) -> Callable:
        return self.oracle.propensity


def _check_arms(data: CausalDataset, min_per_arm: int = 1):
    n1 = int(data.treatment.sum())
    n0 = data.n - n1
    if n1 < min_per_arm or n0 < min_per_arm:
        raise ValueError(f"need >= {min_per_arm} rows in each arm, got ({n0}, {n1})")


# ---------------------------------------------------------------------------
# weighted polynomial ridge, the exactness-friendly R-learner base

class PolyRidgeFit(FittedModel):
    def __init__(self, coef, degree):
        self.coef = coef
        self.degree = degree

    def predict(self, query: Dataset) -> PredictiveDistribution:
        return PredictiveDistribution.point(self.predict_raw(query.features))

    def predict_raw(self, x) -> np.ndarray:
        return _poly_features(np.atleast_2d(x), self.degree) @ self.coef


def _poly_features(x: np.ndarray, degree: int) -> np.ndarray:
    """1, x_j, then all degree-2 products (squares and upper-triangle pairs)."""
    cols = [np.ones(x.shape[0])]
    cols.extend(x.T)
    if degree >= 2:
        p = x.shape[1]
        for i in range(p):
            for j in range(i, p):
                cols.append(x[:, i] * x[:, j])
    return np.column_stack(cols)


class WeightedPolyRidge(Predictor):
    """Weighted least squares on a polynomial basis, unpenalized intercept."""

    def __init__(self, degree: int = 2, ridge: float = 1e-8):
        self.degree = degree
        self.ridge = ridge

    def _solve(self, x, y, w):
        f = _poly_features(x, self.degree)
        pen = np.full(f.shape[1], self.ridge)
        pen[0] = 0.0
        a = (f * w[:, None]).T @ f + np.diag(pen)
        b = (f * w[:, None]).T @ y
        return PolyRidgeFit(np.linalg.solve(a, b), self.degree)

    def fit(self, train: Dataset) -> PolyRidgeFit:
        return self._solve(train.features, train.require_labels(),
                           np.ones(train.n))

    def fit_weighted(self, train: Dataset, weights) -> PolyRidgeFit:
        w = np.asarray(weights, dtype=np.float64).ravel()
        return self._solve(train.features, train.require_labels(), w)


# ---------------------------------------------------------------------------
# meta-learners

def s_learner(base: Predictor, data: CausalDataset) -> CateEstimate:
    """Joint regression of Y on (T, X); tau is the T-contrast of the fit."""
    _check_arms(data)
    joint = np.hstack([data.treatment[:, None], data.features])
    fit = base.fit(Dataset(joint, data.outcome))

    def tau_hat(x):
        x = np.atleast_2d(x)
        ones = np.ones((x.shape[0], 1))
        m1 = fit.predict(Dataset(np.hstack([ones, x]))).mean
        m0 = fit.predict(Dataset(np.hstack([0.0 * ones, x]))).mean
        return m1 - m0

    return CateEstimate("S", tau_hat, {"mu_joint": fit})


def t_learner(base: Predictor, data: CausalDataset) -> CateEstimate:
    """Separate arm regressions; tau is their difference."""
    _check_arms(data, min_per_arm=2)
    treated = data.treatment == 1.0
    fit0 = base.fit(Dataset(data.features[~treated], data.outcome[~treated]))
    fit1 = base.fit(Dataset(data.features[treated], data.outcome[treated]))

    def tau_hat(x):
        x = np.atleast_2d(x)
        return fit1.predict(Dataset(x)).mean - fit0.predict(Dataset(x)).mean

    return CateEstimate("T", tau_hat, {"mu0": fit0, "mu1": fit1})


def x_learner(base: Predictor, propensity, data: CausalDataset) -> CateEstimate:
    """Cross-imputed effects recombined with the propensity as the weight.

    The combination weight uses the raw e-hat in [0, 1] (no clipping), so the
    learner degenerates exactly to the relevant arm when e-hat is 0 or 1.
    """
    _check_arms(data, min_per_arm=2)
    treated = data.treatment == 1.0
    x0, y0 = data.features[~treated], data.outcome[~treated]
    x1, y1 = data.features[treated], data.outcome[treated]
    fit0 = base.fit(Dataset(x0, y0))
    fit1 = base.fit(Dataset(x1, y1))
    d1 = y1 - fit0.predict(Dataset(x1)).mean
    d0 = fit1.predict(Dataset(x0)).mean - y0
    tau1 = base.fit(Dataset(x1, d1))
    tau0 = base.fit(Dataset(x0, d0))
    ehat = propensity.fit_propensity(data.features, data.treatment)

    def tau_hat(x):
        x = np.atleast_2d(x)
        g = np.asarray(ehat(x), dtype=np.float64)
        if np.any((g < 0.0) | (g > 1.0)):
            raise ValueError("propensity estimates left [0, 1]")
        return g * tau0.predict(Dataset(x)).mean + (1.0 - g) * tau1.predict(Dataset(x)).mean

    return CateEstimate("X", tau_hat,
                        {"mu0": fit0, "mu1": fit1, "tau0": tau0, "tau1": tau1,
                         "ehat": ehat})


def dr_pseudo_outcomes(y, t, mu0, mu1, e, clip: float = DEFAULT_CLIP) -> np.ndarray:
    """Doubly robust transformation with the propensity clipped into
    [clip, 1 - clip]."""
    e = np.clip(e, clip, 1.0 - clip)
    return (t * (y - mu1) / e - (1.0 - t) * (y - mu0) / (1.0 - e) + mu1 - mu0)


def dr_learner(base: Predictor, propensity, data: CausalDataset,
               clip: float = DEFAULT_CLIP) -> CateEstimate:
    """Regress doubly robust pseudo-outcomes on X."""
    if not 0.0 < clip < 0.5:
        raise ValueError("clip must lie in (0, 0.5)")
    _check_arms(data, min_per_arm=2)
    treated = data.treatment == 1.0
    fit0 = base.fit(Dataset(data.features[~treated], data.outcome[~treated]))
    fit1 = base.fit(Dataset(data.features[treated], data.outcome[treated]))
    ehat = propensity.fit_propensity(data.features, data.treatment)
    mu0 = fit0.predict(Dataset(data.features)).mean
    mu1 = fit1.predict(Dataset(data.features)).mean
    e = np.asarray(ehat(data.features), dtype=np.float64)
    pseudo = dr_pseudo_outcomes(data.outcome, data.treatment, mu0, mu1, e, clip)
    fit_tau = base.fit(Dataset(data.features, pseudo))

    def tau_hat(x):
        return fit_tau.predict(Dataset(np.atleast_2d(x))).mean

    return CateEstimate("DR", tau_hat,
                        {"mu0": fit0, "mu1": fit1, "ehat": ehat, "tau": fit_tau})


def r_learner(weighted_base, mhat: Predictor, ehat_est, data: CausalDataset,
              clip: float = DEFAULT_CLIP) -> CateEstimate:
    """Residual-on-residual regression solved as weighted least squares.

    With Ytil = Y - m(X) and Ttil = T - e(X), the squared-loss objective over
    tau is equivalent to regressing Ytil/Ttil on X with weights Ttil^2, which
    is how the fit is carried out here.
    """
    fit_m = mhat.fit(Dataset(data.features, data.outcome))
    ehat = ehat_est.fit_propensity(data.features, data.treatment)
    return _r_fit(weighted_base, data,
                  fit_m.predict(Dataset(data.features)).mean,
                  np.asarray(ehat(data.features), dtype=np.float64), clip,
                  name="R", extra={"mhat": fit_m, "ehat": ehat})


def oracle_r_learner(data: CausalDataset, weighted_base=None,
                     clip: float = DEFAULT_CLIP) -> CateEstimate:
    """R-learner fed the true m(x) and e(x) from the generating oracle."""
    if weighted_base is None:
        weighted_base = GbrtPredictor()
    oracle = data.oracle
    return _r_fit(weighted_base, data, oracle.marginal_mean(data.features),
                  oracle.propensity(data.features), clip,
                  name="OracleR", extra={"oracle": oracle})


def _r_fit(weighted_base, data, m_values, e_values, clip, name, extra):
    e = np.clip(e_values, clip, 1.0 - clip)
    y_til = data.outcome - m_values
    t_til = data.treatment - e
    if np.all(np.abs(t_til) < 1e-6):
        raise ValueError("all treatment residuals are (near) zero; degenerate propensities")
    target = y_til / t_til
    weights = t_til**2
    fit_tau = weighted_base.fit_weighted(Dataset(data.features, target), weights)

    def tau_hat(x):
        return fit_tau.predict(Dataset(np.atleast_2d(x))).mean

    return CateEstimate(name, tau_hat, {**extra, "tau": fit_tau})


def evaluate_cate(estimate: CateEstimate, test_x: Dataset, oracle: CateOracle) -> float:
    """Mean squared error of tau_hat against the true effect on a test set."""
    diff = estimate.tau_hat(test_x.features) - oracle.tau(test_x.features)
    return float(np.mean(diff**2))


def cate_to_csv(estimate: CateEstimate, test_x: Dataset, oracle: CateOracle,
                path) -> None:
    """Write per-point evaluations as CSV: x columns, tau_hat, tau_true."""
    import csv

    x = test_x.features
    tau_hat = estimate.tau_hat(x)
    tau_true = oracle.tau(x)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{j + 1}" for j in range(x.shape[1])] + ["tau_hat", "tau_true"])
        for i in range(x.shape[0]):
            w.writerow([repr(float(v)) for v in x[i]]
                       + [repr(float(tau_hat[i])), repr(float(tau_true[i]))])
