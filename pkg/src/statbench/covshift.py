"""Prediction strategies under covariate shift.

Pseudo-label selection fits a KRR imputer on a random half of the source
data, scores a lambda path of KRR candidates (fitted on the other half)
against imputed labels on the unlabeled target-drawn auxiliary set, and keeps
the argmin.  The oracle variant swaps the imputed labels for the true
conditional means, so its selection minimizes the true auxiliary risk by
construction.  The naive/importance-weighted baselines are boosted trees
without/with true-density-ratio weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .learners.gbrt import GbrtModel, fit_gbrt
from .learners.kernels import median_heuristic
from .learners.krr import KrrModel, fit_krr
from .rng import make_rng
from .synthgen.shift import CovShiftBundle

DEFAULT_LAMBDA_GRID = tuple(np.geomspace(1e-6, 1e2, 20))


@dataclass(frozen=True)
class PlSelection:
    lambda_grid: np.ndarray
    imputer_fit: KrrModel
    candidates: tuple
    chosen_index: int
    selection_scores: np.ndarray
    oracle_mode: bool = False

    @property
    def chosen_lambda(self) -> float:
        return float(self.lambda_grid[self.chosen_index])

    @property
    def chosen_model(self) -> KrrModel:
        return self.candidates[self.chosen_index]

    def trace_rows(self, bundle: CovShiftBundle | None = None):
        """(lambda, selection score, true aux risk) rows for CSV export."""
        rows = []
        for i, lam in enumerate(self.lambda_grid):
            true_risk = ""
            if bundle is not None:
                xa = bundle.target_aux.features
                pred = self.candidates[i].predict(bundle.target_aux).mean
                true_risk = float(np.mean((pred - bundle.true_mean(xa)) ** 2))
            rows.append((float(lam), float(self.selection_scores[i]), true_risk))
        return rows

    def trace_to_csv(self, path, bundle: CovShiftBundle | None = None) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda", "selection_score", "true_risk_if_known"])
            for lam, score, risk in self.trace_rows(bundle):
                w.writerow([repr(lam), repr(score),
                            "" if risk == "" else repr(risk)])


def _select(bundle: CovShiftBundle, lambda_grid, lengthscale, seed, oracle: bool):
    lambda_grid = np.sort(np.asarray(lambda_grid, dtype=np.float64))
    if lambda_grid.size < 1:
        raise ValueError("lambda grid must be nonempty")
    src = bundle.source
    if src.n < 4:
        raise ValueError("need at least 4 source rows to split")
    if lengthscale is None:
        # frozen across candidates so only lambda varies
        lengthscale = median_heuristic(src.features)
    rng = make_rng(seed, 11)
    perm = rng.permutation(src.n)
    half = src.n // 2
    first, second = src.subset(perm[:half]), src.subset(perm[half:])

    # imputer lambda: grid argmin of 5-fold CV error on the first half
    imp_lam = _cv_lambda(first, lambda_grid, lengthscale, rng)
    imputer = fit_krr(first, lengthscale, imp_lam)

    xa = bundle.target_aux
    if oracle:
        targets = bundle.true_mean(xa.features)
    else:
        targets = imputer.predict(xa).mean
    candidates = []
    scores = np.empty(lambda_grid.size)
    for i, lam in enumerate(lambda_grid):
        model = fit_krr(second, lengthscale, float(lam))
        candidates.append(model)
        scores[i] = float(np.mean((model.predict(xa).mean - targets) ** 2))
    chosen = int(np.argmin(scores))  # ties -> smaller lambda (grid sorted)
    return PlSelection(lambda_grid, imputer, tuple(candidates), chosen, scores,
                       oracle_mode=oracle)


def _cv_lambda(data: Dataset, lambda_grid, lengthscale, rng) -> float:
    if data.n < 10 or lambda_grid.size == 1:
        return float(lambda_grid[min(len(lambda_grid) // 2, len(lambda_grid) - 1)])
    perm = rng.permutation(data.n)
    folds = np.array_split(perm, 5)
    err = np.zeros(lambda_grid.size)
    for test_idx in folds:
        tr = data.subset(np.setdiff1d(perm, test_idx))
        te = data.subset(test_idx)
        for i, lam in enumerate(lambda_grid):
            pred = fit_krr(tr, lengthscale, float(lam)).predict(te).mean
            err[i] += float(np.sum((pred - te.labels) ** 2))
    return float(lambda_grid[int(np.argmin(err))])


def pl_select(bundle: CovShiftBundle, lambda_grid=DEFAULT_LAMBDA_GRID,
              lengthscale: float | None = None, seed: int = 0) -> PlSelection:
    """Pseudo-label lambda selection for KRR under covariate shift."""
    if len(lambda_grid) < 2:
        raise ValueError("pseudo-label selection needs a grid of >= 2 lambdas")
    return _select(bundle, lambda_grid, lengthscale, seed, oracle=False)


def wang_oracle_select(bundle: CovShiftBundle, lambda_grid=DEFAULT_LAMBDA_GRID,
                       lengthscale: float | None = None, seed: int = 0) -> PlSelection:
    """Same pipeline with true conditional means in place of imputed labels."""
    return _select(bundle, lambda_grid, lengthscale, seed, oracle=True)


def naive_fit(bundle: CovShiftBundle, seed: int = 0) -> GbrtModel:
    """Unweighted boosted trees on the source data."""
    return fit_gbrt(bundle.source, seed=seed)


def iw_fit(bundle: CovShiftBundle, seed: int = 0) -> GbrtModel:
    """Boosted trees weighted by the true density ratio at each source point."""
    w = bundle.true_density_ratio(bundle.source.features)
    return fit_gbrt(bundle.source, weights=w, seed=seed)


def covshift_mse(model, bundle: CovShiftBundle) -> float:
    """Prediction MSE on the labeled target test set."""
    pred = model.predict(bundle.target_test).mean
    return float(np.mean((pred - bundle.target_test.labels) ** 2))
