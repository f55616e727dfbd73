"""Shared test oracles: brute-force votes, oracle bases, perfect imputers."""

import numpy as np

from statbench.data import Dataset
from statbench.learners.base import Predictor, _FittedFunction
from statbench.synthgen import gen_cate
from statbench.synthgen.causal import CateOracle, CausalDataset


def brute_force_vote(x_train, y_train, query, k):
    """Independent kNN oracle: full sort of distances, explicit counted vote."""
    out = np.empty(query.shape[0])
    for i, q in enumerate(query):
        d = np.sqrt(np.sum((x_train - q) ** 2, axis=1))
        nn = np.argsort(d, kind="stable")[:k]
        ones = int(np.sum(y_train[nn] == 1.0))
        out[i] = 1.0 if ones * 2 >= k else 0.0
    return out


class OracleBase(Predictor):
    """Returns whichever true response surface reproduces the training labels.

    Candidate handles cover the first-stage arm regressions (mu0/mu1, or the
    joint (t, x) response), and the induced second-stage regressions whose
    targets equal tau under exact nuisances.  Only usable on noiseless data.
    """

    def __init__(self, oracle: CateOracle):
        self.oracle = oracle

    def fit(self, train: Dataset):
        x, y = train.features, train.require_labels()
        if x.shape[1] == 7:  # joint design [t, X]
            fn = lambda z: self.oracle.mu(np.atleast_2d(z)[:, 0], np.atleast_2d(z)[:, 1:])
            if np.max(np.abs(fn(x) - y)) < 1e-9:
                return _FittedFunction(fn)
            raise AssertionError("joint labels do not match the oracle response")
        for fn in (self.oracle.mu0, self.oracle.mu1, self.oracle.tau,
                   self.oracle.marginal_mean):
            if np.max(np.abs(fn(x) - y)) < 1e-9:
                return _FittedFunction(fn)
        raise AssertionError("labels do not match any oracle surface")


def noiseless(setup: str, n: int, seed: int) -> CausalDataset:
    """A generated causal dataset with the noise stripped from the outcome."""
    data = gen_cate(setup, n, 1.0, seed)
    return CausalDataset(data.features, data.treatment,
                         data.oracle.mu(data.treatment, data.features), data.oracle)


class EchoLabels(Predictor):
    """Imputer that reproduces the labeled training set exactly."""

    def fit(self, train: Dataset):
        x_train = train.features
        y_train = train.require_labels()

        def lookup(x):
            out = np.empty(np.atleast_2d(x).shape[0])
            for i, row in enumerate(np.atleast_2d(x)):
                match = np.flatnonzero(np.all(x_train == row, axis=1))
                out[i] = y_train[match[0]] if match.size else 0.0
            return out

        return _FittedFunction(lookup)
