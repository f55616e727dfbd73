"""Covariance kernels with analytic gradients in log-hyperparameter space.

Every kernel is an amplitude-scaled stationary form, k = s^2 * g(r; params),
parameterized by theta = log(hyperparameters) so that unconstrained
quasi-Newton ascent applies.  ``gram`` returns the training Gram matrix and,
on request, its gradient with respect to each theta component, which is what
the marginal-likelihood gradient needs.
"""

from __future__ import annotations

import numpy as np

SQRT3 = np.sqrt(3.0)


def pairwise_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix between row sets."""
    a2 = np.sum(a**2, axis=1)[:, None]
    b2 = np.sum(b**2, axis=1)[None, :]
    d2 = np.maximum(a2 + b2 - 2.0 * a @ b.T, 0.0)
    return np.sqrt(d2)


class Kernel:
    """Base: subclasses define names, default theta, bounds, and forms."""

    #: log-parameter names, amplitude first
    param_names: tuple[str, ...] = ()

    def n_params(self) -> int:
        return len(self.param_names)

    def default_theta(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def bounds(self) -> list[tuple[float, float]]:
        raise NotImplementedError

    def cross(self, theta: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gram(self, theta: np.ndarray, x: np.ndarray, grad: bool = False):
        raise NotImplementedError


# log-amplitude (of s^2) is capped at +-5; lengthscale-type parameters get
# generous but finite boxes so restarts stay in numerically sane territory.
AMP_BOUNDS = (-5.0, 5.0)
LEN_BOUNDS = (np.log(1e-3), np.log(1e3))
ALPHA_BOUNDS = (np.log(1e-2), np.log(1e2))
PERIOD_BOUNDS = (np.log(1e-2), np.log(1e2))


def _median_log_lengthscale(x: np.ndarray) -> float:
    d = pairwise_dists(x, x)
    off = d[np.triu_indices_from(d, k=1)]
    pos = off[off > 0]
    med = np.median(pos) if pos.size else 1.0
    return float(np.log(max(med, 1e-3)))


def _default_log_amp(y: np.ndarray) -> float:
    return float(np.clip(np.log(max(np.var(y), 1e-8)), *AMP_BOUNDS))


class ConstTimesRBF(Kernel):
    param_names = ("log_amp", "log_len")

    def default_theta(self, x, y):
        return np.array([_default_log_amp(y), _median_log_lengthscale(x)])

    def bounds(self):
        return [AMP_BOUNDS, LEN_BOUNDS]

    def cross(self, theta, a, b):
        amp = np.exp(theta[0])
        ell = np.exp(theta[1])
        r = pairwise_dists(a, b)
        return amp * np.exp(-0.5 * (r / ell) ** 2)

    def gram(self, theta, x, grad=False):
        amp = np.exp(theta[0])
        ell = np.exp(theta[1])
        r = pairwise_dists(x, x)
        q = (r / ell) ** 2
        k = amp * np.exp(-0.5 * q)
        if not grad:
            return k
        return k, [k, k * q]


class ConstTimesMatern(Kernel):
    """Matern with smoothness 1.5 (once-differentiable sample paths)."""

    param_names = ("log_amp", "log_len")

    def default_theta(self, x, y):
        return np.array([_default_log_amp(y), _median_log_lengthscale(x)])

    def bounds(self):
        return [AMP_BOUNDS, LEN_BOUNDS]

    def cross(self, theta, a, b):
        amp = np.exp(theta[0])
        ell = np.exp(theta[1])
        u = SQRT3 * pairwise_dists(a, b) / ell
        return amp * (1.0 + u) * np.exp(-u)

    def gram(self, theta, x, grad=False):
        amp = np.exp(theta[0])
        ell = np.exp(theta[1])
        u = SQRT3 * pairwise_dists(x, x) / ell
        e = np.exp(-u)
        k = amp * (1.0 + u) * e
        if not grad:
            return k
        return k, [k, amp * u**2 * e]


class ConstTimesRatQuad(Kernel):
    param_names = ("log_amp", "log_len", "log_alpha")

    def default_theta(self, x, y):
        return np.array([_default_log_amp(y), _median_log_lengthscale(x), 0.0])

    def bounds(self):
        return [AMP_BOUNDS, LEN_BOUNDS, ALPHA_BOUNDS]

    def _parts(self, theta, r):
        amp = np.exp(theta[0])
        ell = np.exp(theta[1])
        alpha = np.exp(theta[2])
        u = r**2 / (2.0 * alpha * ell**2)
        base = 1.0 + u
        k = amp * base ** (-alpha)
        return amp, alpha, u, base, k

    def cross(self, theta, a, b):
        return self._parts(theta, pairwise_dists(a, b))[4]

    def gram(self, theta, x, grad=False):
        amp, alpha, u, base, k = self._parts(theta, pairwise_dists(x, x))
        if not grad:
            return k
        d_len = 2.0 * k * alpha * u / base
        d_alpha = k * alpha * (u / base - np.log(base))
        return k, [k, d_len, d_alpha]


class ConstTimesExpSine(Kernel):
    """Periodic (exp-sine-squared) kernel."""

    param_names = ("log_amp", "log_len", "log_period")

    def default_theta(self, x, y):
        return np.array([_default_log_amp(y), 0.0, _median_log_lengthscale(x)])

    def bounds(self):
        return [AMP_BOUNDS, LEN_BOUNDS, PERIOD_BOUNDS]

    def cross(self, theta, a, b):
        amp = np.exp(theta[0])
        ell = np.exp(theta[1])
        period = np.exp(theta[2])
        arg = np.pi * pairwise_dists(a, b) / period
        return amp * np.exp(-2.0 * np.sin(arg) ** 2 / ell**2)

    def gram(self, theta, x, grad=False):
        amp = np.exp(theta[0])
        ell = np.exp(theta[1])
        period = np.exp(theta[2])
        r = pairwise_dists(x, x)
        arg = np.pi * r / period
        s = np.sin(arg)
        k = amp * np.exp(-2.0 * s**2 / ell**2)
        if not grad:
            return k
        d_len = k * 4.0 * s**2 / ell**2
        d_per = k * (2.0 / ell**2) * np.sin(2.0 * arg) * arg
        return k, [k, d_len, d_per]


class SumKernel(Kernel):
    """Sum of two kernels with concatenated parameter vectors."""

    def __init__(self, left: Kernel, right: Kernel):
        self.left = left
        self.right = right
        self.param_names = tuple(f"l.{n}" for n in left.param_names) + tuple(
            f"r.{n}" for n in right.param_names)

    def _split(self, theta):
        k = self.left.n_params()
        return theta[:k], theta[k:]

    def default_theta(self, x, y):
        return np.concatenate([self.left.default_theta(x, y),
                               self.right.default_theta(x, y)])

    def bounds(self):
        return self.left.bounds() + self.right.bounds()

    def cross(self, theta, a, b):
        tl, tr = self._split(theta)
        return self.left.cross(tl, a, b) + self.right.cross(tr, a, b)

    def gram(self, theta, x, grad=False):
        tl, tr = self._split(theta)
        if not grad:
            return self.left.gram(tl, x) + self.right.gram(tr, x)
        kl, gl = self.left.gram(tl, x, grad=True)
        kr, gr = self.right.gram(tr, x, grad=True)
        return kl + kr, gl + gr


KERNEL_FAMILIES = ("rbf", "matern", "ratquad", "expsine", "rbf+matern")


def make_kernel(name: str) -> Kernel:
    if name == "rbf":
        return ConstTimesRBF()
    if name == "matern":
        return ConstTimesMatern()
    if name == "ratquad":
        return ConstTimesRatQuad()
    if name == "expsine":
        return ConstTimesExpSine()
    if name == "rbf+matern":
        return SumKernel(ConstTimesRBF(), ConstTimesMatern())
    raise ValueError(f"unknown kernel family {name!r}")


def rbf_gram(x: np.ndarray, z: np.ndarray, lengthscale: float) -> np.ndarray:
    """Plain unit-amplitude RBF cross-Gram, shared with kernel ridge."""
    r = pairwise_dists(np.atleast_2d(x), np.atleast_2d(z))
    return np.exp(-0.5 * (r / lengthscale) ** 2)


def median_heuristic(x: np.ndarray) -> float:
    """Median pairwise distance; lengthscale default for kernel methods."""
    return float(np.exp(_median_log_lengthscale(np.atleast_2d(x))))
