"""Gaussian process regression with grid noise and marginal-likelihood tuning.

The model space is the cross of five amplitude-scaled kernel families with a
small grid of measurement-error variances.  For each (family, noise) pair the
kernel hyperparameters are tuned by quasi-Newton ascent of the log marginal
likelihood in log-parameter space, with a handful of seeded random restarts;
the overall argmax wins.  The prior mean is zero, so posterior means revert
to zero far from the training inputs for the decaying kernel families.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_solve, solve_triangular
from scipy.optimize import minimize

from ..data import Dataset
from ..rng import make_rng
from .base import FittedModel, Predictor, PredictiveDistribution
from .kernels import KERNEL_FAMILIES, Kernel, make_kernel

DEFAULT_NOISE_GRID = (0.05, 0.1, 0.15, 0.2)
N_RESTARTS = 5

LOG2PI = np.log(2.0 * np.pi)


class GprNumericalError(RuntimeError):
    """Covariance stayed non positive definite after jitter escalation."""


def _chol_with_jitter(k: np.ndarray, noise_var: float):
    """Cholesky of K + noise*I, escalating a diagonal jitter if needed."""
    n = k.shape[0]
    a = k + noise_var * np.eye(n)
    jitter = 0.0
    scale = max(np.mean(np.diag(k)), 1e-12)
    for _ in range(8):
        try:
            lower = np.linalg.cholesky(a + jitter * np.eye(n))
            return lower, jitter
        except np.linalg.LinAlgError:
            jitter = scale * 1e-10 if jitter == 0.0 else jitter * 10.0
    raise GprNumericalError(
        f"covariance not positive definite after jitter escalation (last jitter {jitter:g})")


def log_marginal_likelihood(x: np.ndarray, y: np.ndarray, kernel: Kernel,
                            theta: np.ndarray, noise_var: float,
                            with_grad: bool = False):
    """Zero-mean GP log marginal likelihood, optionally with its gradient.

    The gradient is taken with respect to the log-hyperparameters ``theta``
    (noise is not a free parameter; it comes from the grid).
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    n = y.shape[0]
    if with_grad:
        k, grads = kernel.gram(theta, x, grad=True)
    else:
        k = kernel.gram(theta, x)
    lower, _ = _chol_with_jitter(k, noise_var)
    alpha = cho_solve((lower, True), y)
    lml = -0.5 * float(y @ alpha) - float(np.sum(np.log(np.diag(lower)))) - 0.5 * n * LOG2PI
    if not with_grad:
        return lml
    kinv = cho_solve((lower, True), np.eye(n))
    outer = np.outer(alpha, alpha) - kinv
    grad = np.array([0.5 * float(np.sum(outer * g)) for g in grads])
    return lml, grad


@dataclass(frozen=True)
class GprModel(FittedModel):
    """Fitted GP: chosen kernel family, log-params, grid noise, and factors."""

    kernel_name: str
    kernel: Kernel
    theta: np.ndarray
    noise_var: float
    log_ml: float
    x_train: np.ndarray
    chol_lower: np.ndarray
    alpha: np.ndarray
    candidate_log_ml: dict = field(default_factory=dict)

    def predict(self, query: Dataset) -> PredictiveDistribution:
        xq = query.features
        kx = self.kernel.cross(self.theta, self.x_train, xq)
        mean = kx.T @ self.alpha
        v = solve_triangular(self.chol_lower, kx, lower=True)
        # all families are stationary, so the prior diagonal is constant
        kdiag = np.full(xq.shape[0], self.kernel.cross(self.theta, xq[:1], xq[:1])[0, 0])
        var_f = np.maximum(kdiag - np.sum(v**2, axis=0), 0.0)
        sd = np.sqrt(var_f + self.noise_var)  # predictive sd for a new label
        return PredictiveDistribution.gaussian(mean, sd)


def fit_gpr_fixed(train: Dataset, kernel_name: str, theta: np.ndarray,
                  noise_var: float) -> GprModel:
    """Condition a GP with fixed hyperparameters (no tuning)."""
    kernel = make_kernel(kernel_name)
    x, y = train.features, train.require_labels()
    theta = np.asarray(theta, dtype=np.float64)
    k = kernel.gram(theta, x)
    lower, _ = _chol_with_jitter(k, noise_var)
    alpha = cho_solve((lower, True), y)
    lml = log_marginal_likelihood(x, y, kernel, theta, noise_var)
    return GprModel(kernel_name, kernel, theta, float(noise_var), lml, x, lower, alpha)


def _optimize_family(x, y, kernel, noise_var, rng):
    """Best theta for one (family, noise) pair over seeded restarts."""
    bounds = kernel.bounds()
    theta0 = kernel.default_theta(x, y)
    starts = [theta0]
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    for _ in range(N_RESTARTS - 1):
        starts.append(lo + (hi - lo) * rng.random(len(bounds)))

    def neg(theta):
        try:
            lml, grad = log_marginal_likelihood(x, y, kernel, theta, noise_var,
                                                with_grad=True)
        except GprNumericalError:
            return 1e25, np.zeros(len(theta))
        return -lml, -grad

    best = (-np.inf, theta0)
    for start in starts:
        res = minimize(neg, start, jac=True, method="L-BFGS-B", bounds=bounds)
        val = -res.fun
        if np.isfinite(val) and val > best[0]:
            best = (val, res.x)
    return best


def fit_gpr(train: Dataset, noise_grid=DEFAULT_NOISE_GRID, seed: int = 0,
            families=KERNEL_FAMILIES) -> GprModel:
    """Tune kernel family, kernel hyperparameters, and grid noise by ML.

    Parameters
    ----------
    train : labeled dataset with n >= 2 rows
    noise_grid : candidate measurement-error variances (nonempty)
    seed : drives the restart draws; identical seeds reproduce the fit
    families : kernel families to search (defaults to all five)
    """
    x, y = train.features, train.require_labels()
    if train.n < 2:
        raise ValueError("GPR needs at least 2 training rows")
    noise_grid = tuple(float(v) for v in noise_grid)
    if not noise_grid:
        raise ValueError("noise grid must be nonempty")
    best = None
    scores = {}
    for fi, name in enumerate(families):
        kernel = make_kernel(name)
        for ni, noise in enumerate(noise_grid):
            rng = make_rng(seed, fi, ni)
            val, theta = _optimize_family(x, y, kernel, noise, rng)
            scores[(name, noise)] = val
            if best is None or val > best[0]:
                best = (val, name, theta, noise)
    if best is None or not np.isfinite(best[0]):
        raise GprNumericalError("no (kernel, noise) candidate produced a finite likelihood")
    _, name, theta, noise = best
    return replace(fit_gpr_fixed(train, name, theta, noise),
                   candidate_log_ml=scores)


class GprPredictor(Predictor):
    """Predictor adapter around fit_gpr."""

    def __init__(self, noise_grid=DEFAULT_NOISE_GRID, seed: int = 0,
                 families=KERNEL_FAMILIES):
        self.noise_grid = noise_grid
        self.seed = seed
        self.families = families

    def fit(self, train: Dataset) -> GprModel:
        return fit_gpr(train, self.noise_grid, self.seed, self.families)
