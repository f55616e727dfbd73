"""M-estimation for the three working models, plus the semi-supervised
estimator family built on a pluggable imputation model.

All solvers act on the mean empirical loss with the design X padded by a
leading 1 (intercept first).  The linear model is solved by QR, the logistic
model by damped Newton, and the quantile model by Newton continuation on a
logistic-smoothed pinball loss with the smoothing parameter driven from 1e-2
down to 1e-8.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, concat
from .learners.base import Predictor
from .rng import make_rng
from .synthgen import semisup as _dgp

GRAD_TOL = 1e-10
MAX_NEWTON_ITERS = 200
SMOOTH_EPS_START = 1e-2
SMOOTH_EPS_END = 1e-8

STRATEGIES = ("vanilla", "impute", "debias", "ppi")


class SolverError(RuntimeError):
    """Newton failed to reach the gradient tolerance."""


@dataclass(frozen=True)
class WorkingModel:
    """Loss family: 'linear', 'logistic', or 'quantile' (with its level)."""

    kind: str
    tau: float | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "logistic", "quantile"):
            raise ValueError(f"unknown working model {self.kind!r}")
        if self.kind == "quantile":
            if self.tau is None or not 0.0 < self.tau < 1.0:
                raise ValueError("quantile working model needs tau in (0, 1)")


@dataclass(frozen=True)
class ThetaEstimate:
    theta: np.ndarray
    objective: float
    grad_norm: float
    iterations: int
    method: str

    def to_record(self) -> dict:
        return {"theta": self.theta.tolist(), "objective": self.objective,
                "grad_norm": self.grad_norm, "iterations": self.iterations,
                "method": self.method}


def design(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    return np.hstack([np.ones((x.shape[0], 1)), x])


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


# ---------------------------------------------------------------------------
# losses (mean over the sample)

def linear_objective(theta, xb, y):
    r = y - xb @ theta
    return 0.5 * float(r @ r) / y.shape[0]


def logistic_objective(theta, xb, y):
    z = xb @ theta
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def pinball(u: np.ndarray, tau: float) -> np.ndarray:
    """Check loss rho_tau(u) = u * (tau - 1{u < 0})."""
    return u * (tau - (u < 0))


def quantile_objective(theta, xb, y, tau):
    return float(np.mean(pinball(y - xb @ theta, tau)))


def smoothed_pinball_objective(theta, xb, y, tau, eps):
    u = y - xb @ theta
    return float(np.mean(tau * u + eps * np.logaddexp(0.0, -u / eps)))


def model_objective(model: WorkingModel, theta, xb, y) -> float:
    if model.kind == "linear":
        return linear_objective(theta, xb, y)
    if model.kind == "logistic":
        return logistic_objective(theta, xb, y)
    return quantile_objective(theta, xb, y, model.tau)


def model_gradient(model: WorkingModel, theta, xb, y) -> np.ndarray:
    n = y.shape[0]
    if model.kind == "linear":
        return xb.T @ (xb @ theta - y) / n
    if model.kind == "logistic":
        return xb.T @ (_sigmoid(xb @ theta) - y) / n
    u = y - xb @ theta
    # subgradient with the boundary convention 1{u <= 0}
    return xb.T @ ((u <= 0).astype(np.float64) - model.tau) / n


# ---------------------------------------------------------------------------
# solvers

def _solve_linear(xb, y):
    # thin-QR normal equations; SVD fallback for rank-deficient designs
    q, r = np.linalg.qr(xb)
    try:
        theta = np.linalg.solve(r, q.T @ y)
    except np.linalg.LinAlgError:
        theta = np.linalg.lstsq(xb, y, rcond=None)[0]
    grad = xb.T @ (xb @ theta - y) / y.shape[0]
    return ThetaEstimate(theta, linear_objective(theta, xb, y),
                         float(np.max(np.abs(grad))), 1, "qr")


def _damped_newton(theta0, value_grad_hess, max_iters=MAX_NEWTON_ITERS,
                   tol=GRAD_TOL):
    """Safeguarded Newton: trace-relative ridge, gradient fallback for
    non-descent steps, and step halving on the objective.  Returns
    (theta, iterations, final gradient)."""
    theta = theta0.copy()
    obj, grad, hess = value_grad_hess(theta)
    dim = len(theta)
    for it in range(1, max_iters + 1):
        if np.max(np.abs(grad)) <= tol:
            return theta, it - 1, grad
        ridge = 1e-12 * max(np.trace(hess), 1.0)
        h = hess + ridge * np.eye(dim)
        try:
            step = np.linalg.solve(h, -grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(h, -grad, rcond=None)[0]
        if grad @ step >= 0.0 or not np.all(np.isfinite(step)):
            step = -grad / (1.0 + np.linalg.norm(grad))
        scale = 1.0
        accepted = False
        for _ in range(60):
            cand = theta + scale * step
            cobj, cgrad, chess = value_grad_hess(cand)
            if cobj <= obj + 1e-13 * max(1.0, abs(obj)):
                theta, obj, grad, hess = cand, cobj, cgrad, chess
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            # objective can no longer be decreased in floating point
            return theta, it, grad
        if np.linalg.norm(theta) > 1e6:
            raise SolverError("parameter norm exceeded 1e6 (separation?)")
    return theta, max_iters, grad


def _solve_logistic(xb, y):
    n = y.shape[0]

    def vgh(theta):
        z = xb @ theta
        p = _sigmoid(z)
        obj = float(np.mean(np.logaddexp(0.0, z) - y * z))
        grad = xb.T @ (p - y) / n
        hess = (xb * (p * (1.0 - p))[:, None]).T @ xb / n
        return obj, grad, hess

    theta, iters, grad = _damped_newton(np.zeros(xb.shape[1]), vgh)
    gnorm = float(np.max(np.abs(grad)))
    if gnorm > 1e-6:
        raise SolverError(f"logistic Newton stalled: grad_norm={gnorm:.3g} after {iters} iters")
    return ThetaEstimate(theta, logistic_objective(theta, xb, y), gnorm, iters, "newton")


def _solve_quantile(xb, y, tau):
    n = y.shape[0]
    theta = np.linalg.lstsq(xb, y, rcond=None)[0]  # warm start from least squares
    total_iters = 0
    eps = SMOOTH_EPS_START
    while True:
        def vgh(th, eps=eps):
            u = y - xb @ th
            s = _sigmoid(-u / eps)
            obj = float(np.mean(tau * u + eps * np.logaddexp(0.0, -u / eps)))
            grad = xb.T @ (s - tau) / n
            wts = s * (1.0 - s) / eps
            hess = (xb * wts[:, None]).T @ xb / n
            return obj, grad, hess

        # gradient tolerance tightens with the smoothing stage but stays
        # above the floating-point noise floor of the smoothed objective
        tol = max(1e-9, eps * 1e-4)
        theta, iters, grad = _damped_newton(theta, vgh, tol=tol)
        total_iters += iters
        if eps <= SMOOTH_EPS_END:
            break
        eps = max(eps / 10.0, SMOOTH_EPS_END)
    gnorm = float(np.max(np.abs(grad)))
    if gnorm > 1e-6:
        raise SolverError(
            f"quantile continuation stalled: grad_norm={gnorm:.3g} after {total_iters} iters")
    return ThetaEstimate(theta, quantile_objective(theta, xb, y, tau), gnorm,
                         total_iters, "smoothed-newton")


def erm(model: WorkingModel, data: Dataset) -> ThetaEstimate:
    """Empirical risk minimizer of the working model on a labeled dataset.

    Raises SolverError on non-convergence (reporting iterations and gradient
    norm) and flags separation in the logistic model via a norm guard.
    """
    y = data.require_labels()
    xb = design(data.features)
    if data.n <= xb.shape[1]:
        raise ValueError(f"need n > p + 1 (= {xb.shape[1]}) rows, got {data.n}")
    if model.kind == "logistic":
        if np.any((y < 0.0) | (y > 1.0)):
            raise ValueError("logistic labels must lie in [0, 1]")
        return _solve_logistic(xb, y)
    if model.kind == "linear":
        return _solve_linear(xb, y)
    return _solve_quantile(xb, y, model.tau)


# ---------------------------------------------------------------------------
# semi-supervised estimators

def _impute(imputer_fit, data: Dataset, model: WorkingModel) -> Dataset:
    mean = imputer_fit.predict(data.without_labels()).mean
    if model.kind == "logistic":
        # posterior predictive mean of a binary label is P(Y=1|x); keep it a
        # valid soft label even if the imputer's mean strays outside [0, 1]
        mean = np.clip(mean, 0.0, 1.0)
    return data.with_labels(mean)


def semisup_estimate(strategy: str, model: WorkingModel, imputer: Predictor | None,
                     labeled: Dataset, unlabeled: Dataset | None) -> ThetaEstimate:
    """Semi-supervised pointwise estimators built on label imputation.

    vanilla  : erm(labeled)
    impute   : erm(imputed labeled + imputed unlabeled)
    debias   : impute minus Delta, Delta = erm(imputed labeled) - erm(labeled)
    ppi      : erm(imputed unlabeled) minus the same Delta

    All component solves share one solver configuration, so the algebraic
    identities among the strategies hold to machine precision.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if strategy == "vanilla":
        return erm(model, labeled)
    if imputer is None:
        raise ValueError(f"strategy {strategy!r} requires an imputer")
    if unlabeled is None or unlabeled.n == 0:
        raise ValueError(f"strategy {strategy!r} requires unlabeled data")
    fit = imputer.fit(labeled)
    hat_l = _impute(fit, labeled, model)
    hat_u = _impute(fit, unlabeled, model)
    est_union = erm(model, concat(hat_l, hat_u))
    if strategy == "impute":
        return est_union
    delta = erm(model, hat_l).theta - erm(model, labeled).theta
    if strategy == "debias":
        return ThetaEstimate(est_union.theta - delta, est_union.objective,
                             est_union.grad_norm, est_union.iterations, "debias")
    est_u = erm(model, hat_u)
    return ThetaEstimate(est_u.theta - delta, est_u.objective, est_u.grad_norm,
                         est_u.iterations, "ppi")


# ---------------------------------------------------------------------------
# Monte-Carlo ground truth

MC_BATCH = 1 << 16
QUANTILE_MC_CAP = 1_000_000


def mc_truth(setting: str, p: int, tau: float | None = None,
             n_mc: int = 1_000_000, seed: int = 0) -> np.ndarray:
    """Approximate the population minimizer by ERM over a huge sample.

    Linear: exact moment accumulation over fixed-size batches.  Logistic:
    Newton whose gradient/Hessian are streamed over the same batches each
    iteration.  Quantile: a full in-memory solve, capped at 1e6 samples (a
    larger request is truncated with a note on stderr).
    """
    if n_mc < 10_000:
        raise ValueError("n_mc must be at least 1e4")
    if setting == "linear":
        g = np.zeros((p + 1, p + 1))
        b = np.zeros(p + 1)
        rng = make_rng(seed)
        done = 0
        while done < n_mc:
            size = min(MC_BATCH, n_mc - done)
            x = rng.standard_normal((size, p))
            y = _dgp.linear_response(x, 2.0 * rng.standard_normal(size))
            xb = design(x)
            g += xb.T @ xb
            b += xb.T @ y
            done += size
        return np.linalg.solve(g, b)
    if setting == "logistic":
        theta = np.zeros(p + 1)
        for _ in range(60):
            grad = np.zeros(p + 1)
            hess = np.zeros((p + 1, p + 1))
            rng = make_rng(seed)
            done = 0
            while done < n_mc:
                size = min(MC_BATCH, n_mc - done)
                x, y = _dgp.sample("logistic", size, p, rng)
                xb = design(x)
                pr = _sigmoid(xb @ theta)
                grad += xb.T @ (pr - y)
                hess += (xb * (pr * (1.0 - pr))[:, None]).T @ xb
                done += size
            grad /= n_mc
            hess /= n_mc
            step = np.linalg.solve(hess, -grad)
            theta = theta + step
            if np.max(np.abs(grad)) < 1e-12:
                break
        else:
            if np.max(np.abs(grad)) > 1e-8:
                raise SolverError("streaming logistic Newton failed to converge")
        return theta
    if setting == "quantile":
        if tau is None:
            raise ValueError("quantile mc_truth needs tau")
        n_use = min(n_mc, QUANTILE_MC_CAP)
        if n_use < n_mc:
            import sys
            print(f"mc_truth: quantile capped at {QUANTILE_MC_CAP} of {n_mc} samples",
                  file=sys.stderr)
        rng = make_rng(seed)
        x = rng.standard_normal((n_use, p))
        y = _dgp.quantile_response(x, rng.standard_normal(n_use))
        return erm(WorkingModel("quantile", tau), Dataset(x, y)).theta
    raise ValueError(f"unknown setting {setting!r}")
