"""Scalar metrics: surrogate fits, bias/variance splits, and excess risk."""

from __future__ import annotations

import numpy as np

from ..data import Dataset
from ..learners.lda import bayes_classify
from ..synthgen.noisylabels import NoisyLabelBundle


def linear_surrogate(model, test: Dataset, relevant) -> tuple[float, np.ndarray]:
    """OLS of the model's predictions on the relevant feature columns.

    Returns the surrogate R^2 (fraction of prediction variance explained)
    and the coefficient vector (intercept first).
    """
    relevant = np.asarray(relevant, dtype=int)
    if relevant.size < 1:
        raise ValueError("need at least one relevant column")
    if test.n <= relevant.size + 1:
        raise ValueError("test set too small for the surrogate fit")
    preds = model.predict(test).mean
    a = np.hstack([np.ones((test.n, 1)), test.features[:, relevant]])
    if np.linalg.matrix_rank(a) < a.shape[1]:
        raise ValueError("relevant columns are collinear")
    coef, *_ = np.linalg.lstsq(a, preds, rcond=None)
    resid = preds - a @ coef
    total = preds - preds.mean()
    ss_tot = float(total @ total)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(resid @ resid) / ss_tot
    return r2, coef


def bias_variance(thetas, theta_star: np.ndarray, reduce: str = "sum"):
    """Squared bias and variance of a replicate collection of estimates.

    bias2 = ||mean theta_r - theta*||^2 and variance is the mean squared
    deviation around the replicate mean, so bias2 + variance equals the mean
    squared error exactly.  ``reduce`` picks the scalarization over
    coefficient components: "sum" (vector norms, the default), "mean"
    (per-component average), or "none" for the component-wise vectors.
    """
    arr = np.asarray([np.asarray(t, dtype=np.float64).ravel() for t in thetas])
    if arr.shape[0] < 2:
        raise ValueError("need at least 2 replicates")
    theta_star = np.asarray(theta_star, dtype=np.float64).ravel()
    if arr.shape[1] != theta_star.shape[0]:
        raise ValueError("dimension mismatch between estimates and theta*")
    center = arr.mean(axis=0)
    bias2_parts = (center - theta_star) ** 2
    var_parts = np.mean((arr - center) ** 2, axis=0)
    if reduce == "sum":
        return float(bias2_parts.sum()), float(var_parts.sum())
    if reduce == "mean":
        return float(bias2_parts.mean()), float(var_parts.mean())
    if reduce == "none":
        return bias2_parts, var_parts
    raise ValueError(f"unknown reduction {reduce!r}")


def classification_risk(decisions: np.ndarray, eta: np.ndarray) -> float:
    """Conditional risk E[eta 1{C=0} + (1-eta) 1{C=1}] over the test points."""
    decisions = np.asarray(decisions, dtype=np.float64).ravel()
    return float(np.mean(np.where(decisions == 1.0, 1.0 - eta, eta)))


def excess_risk(classify, bundle: NoisyLabelBundle) -> float:
    """Risk of ``classify`` minus the Bayes risk, both via the true eta.

    ``classify`` maps a Dataset of test covariates to {0,1} decisions.
    """
    eta = bundle.eta(bundle.test.features)
    risk = classification_risk(classify(bundle.test), eta)
    bayes = classification_risk(bayes_classify(bundle.model, bundle.test), eta)
    return risk - bayes


def zero_one_error(decisions: np.ndarray, labels: np.ndarray) -> float:
    """Raw test error, kept around as a cross-check on the conditional risk."""
    return float(np.mean(np.asarray(decisions).ravel() != np.asarray(labels).ravel()))
