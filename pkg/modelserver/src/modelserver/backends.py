"""Prediction backends behind the fit-predict endpoint.

The Gaussian-process fallback tunes a small kernel zoo by marginal
likelihood over a grid of measurement-error variances, so the service works
out of the box; the TabPFN backends are used when the package is importable
(device via $TABPFN_DEVICE).
"""

from __future__ import annotations

import os
import warnings

import numpy as np
from scipy.stats import norm


class BackendError(RuntimeError):
    pass


class FitPredictResult(dict):
    """mean / sd / quantiles arrays keyed like the wire response."""


def _gaussian_quantiles(mean, sd, quantiles):
    z = norm.ppf(np.asarray(quantiles))
    return mean[:, None] + sd[:, None] * z[None, :]


class GaussianProcessBackend:
    """scikit-learn GP with kernel-family and noise-grid selection."""

    name = "gp-fallback"
    noise_grid = (0.05, 0.1, 0.15, 0.2)

    def __init__(self, seed: int = 0):
        self.seed = seed

    def _kernels(self):
        from sklearn.gaussian_process import kernels as K

        amp = dict(constant_value_bounds=(np.exp(-5.0), np.exp(5.0)))
        ls = dict(length_scale_bounds=(1e-3, 1e3))
        return [
            K.ConstantKernel(**amp) * K.RBF(**ls),
            K.ConstantKernel(**amp) * K.Matern(nu=1.5, **ls),
            K.ConstantKernel(**amp) * K.RationalQuadratic(alpha_bounds=(1e-2, 1e2),
                                                          **ls),
            K.ConstantKernel(**amp) * K.ExpSineSquared(periodicity_bounds=(1e-2, 1e2),
                                                       **ls),
            K.ConstantKernel(**amp) * K.RBF(**ls)
            + K.ConstantKernel(**amp) * K.Matern(nu=1.5, **ls),
        ]

    def _fit_best(self, x, y):
        from sklearn.gaussian_process import GaussianProcessRegressor

        best = None
        for kernel in self._kernels():
            for noise in self.noise_grid:
                gp = GaussianProcessRegressor(kernel=kernel, alpha=noise,
                                              n_restarts_optimizer=4,
                                              normalize_y=False,
                                              random_state=self.seed)
                try:
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore")
                        gp.fit(x, y)
                except Exception:  # noqa: BLE001 - candidate simply drops out
                    continue
                score = gp.log_marginal_likelihood_value_
                if np.isfinite(score) and (best is None or score > best[0]):
                    best = (score, gp, noise)
        if best is None:
            raise BackendError("no GP candidate produced a finite likelihood")
        return best[1], best[2]

    def fit_predict(self, task, x_train, y_train, x_query, quantiles):
        gp, noise = self._fit_best(x_train, y_train)
        mean, latent_sd = gp.predict(x_query, return_std=True)
        sd = np.sqrt(latent_sd**2 + noise)
        if task == "classification":
            mean = np.clip(mean, 0.0, 1.0)
            q = np.clip(_gaussian_quantiles(mean, sd, quantiles), 0.0, 1.0)
        else:
            q = _gaussian_quantiles(mean, sd, quantiles)
        return FitPredictResult(mean=mean, sd=sd, quantiles=q)


class TabPFNBackend:
    """TabPFN regression/classification, when the package is installed."""

    def __init__(self, task: str, seed: int = 0):
        self.task = task
        self.name = f"tabpfn-{'reg' if task == 'regression' else 'cls'}"
        self.seed = seed
        try:
            import tabpfn  # noqa: F401
        except ImportError as exc:
            raise BackendError(
                "tabpfn is not importable; install it or use --backend gp-fallback"
            ) from exc

    def _device(self):
        return os.environ.get("TABPFN_DEVICE", "cpu")

    def fit_predict(self, task, x_train, y_train, x_query, quantiles):
        if task == "regression":
            from tabpfn import TabPFNRegressor

            model = TabPFNRegressor(device=self._device(), random_state=self.seed)
            model.fit(x_train, y_train)
            q = np.column_stack(model.predict(x_query, output_type="quantiles",
                                              quantiles=list(quantiles)))
            mean = model.predict(x_query)
            # central 95% width as the dispersion summary
            lo = model.predict(x_query, output_type="quantiles", quantiles=[0.025])[0]
            hi = model.predict(x_query, output_type="quantiles", quantiles=[0.975])[0]
            sd = np.maximum(hi - lo, 0.0) / (2.0 * 1.959963984540054)
            q = np.sort(q, axis=1)
            return FitPredictResult(mean=mean, sd=sd, quantiles=q)
        from tabpfn import TabPFNClassifier

        model = TabPFNClassifier(device=self._device(), random_state=self.seed)
        model.fit(x_train, y_train.astype(int))
        prob = model.predict_proba(x_query)
        col = list(model.classes_).index(1) if 1 in model.classes_ else prob.shape[1] - 1
        mean = prob[:, col]
        sd = np.sqrt(np.clip(mean * (1.0 - mean), 0.0, None))
        q = np.clip(_gaussian_quantiles(mean, sd, quantiles), 0.0, 1.0)
        return FitPredictResult(mean=mean, sd=sd, quantiles=q)


def make_backend(name: str, seed: int = 0):
    if name == "gp-fallback":
        return GaussianProcessBackend(seed)
    if name == "tabpfn-reg":
        return TabPFNBackend("regression", seed)
    if name == "tabpfn-cls":
        return TabPFNBackend("classification", seed)
    raise ValueError(f"unknown backend {name!r}")
