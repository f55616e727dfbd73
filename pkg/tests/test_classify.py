"""kNN, LDA, and Bayes-rule checks, including brute-force equivalence."""

import numpy as np
import pytest

from statbench.data import Dataset
from statbench.learners import (KnnModel, bayes_classify, fit_knn_cv, fit_lda,
                                knn_classify, knn_grid, lda_classify)
from statbench.learners.lda import LdaModel
from statbench.synthgen import gen_labelnoise
from statbench.synthgen.noisylabels import M1_MU, M1_PI

from helpers import brute_force_vote


# ---------------------------------------------------------------------------
# kNN

def test_grid_endpoints_for_n_300():
    ks = knn_grid(300)
    assert ks[0] == 4 and ks[-1] == 72


def test_knn_matches_brute_force_small_n():
    rng = np.random.default_rng(0)
    for n in (20, 35, 50):
        x = rng.normal(size=(n, 3))
        y = (rng.random(n) < 0.5).astype(float)
        q = rng.normal(size=(40, 3))
        for k in (1, 3, 7, min(15, n)):
            model = KnnModel(k, x, y, np.array([k]), np.array([1.0]))
            assert np.array_equal(knn_classify(model, Dataset(q)),
                                  brute_force_vote(x, y, q, k))


def test_one_nn_returns_own_label():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(12, 2))
    y = (rng.random(12) < 0.5).astype(float)
    model = KnnModel(1, x, y, np.array([1]), np.array([1.0]))
    assert np.array_equal(knn_classify(model, Dataset(x)), y)


def test_separated_clusters_are_perfect():
    rng = np.random.default_rng(2)
    x = np.vstack([rng.normal(size=(10, 2)) + 50.0, rng.normal(size=(10, 2)) - 50.0])
    y = np.r_[np.ones(10), np.zeros(10)]
    model = fit_knn_cv(Dataset(x, y), folds=5, seed=0)
    assert np.max(model.cv_accuracy) == 1.0
    assert np.array_equal(knn_classify(model, Dataset(x)), y)


def test_tie_vote_goes_to_class_one():
    x = np.array([[0.0], [2.0]])
    y = np.array([0.0, 1.0])
    model = KnnModel(2, x, y, np.array([2]), np.array([1.0]))
    assert knn_classify(model, Dataset(np.array([[1.0]])))[0] == 1.0


def test_knn_needs_ten_rows():
    with pytest.raises(ValueError):
        fit_knn_cv(Dataset(np.ones((5, 1)), np.r_[np.ones(3), np.zeros(2)]))


# ---------------------------------------------------------------------------
# LDA / Bayes

def test_true_parameter_plugin_at_origin():
    m = LdaModel(M1_PI, -M1_MU, M1_MU, np.eye(5), False)
    score = m.scores(np.zeros((1, 5)))[0]
    assert score == pytest.approx(np.log(9.0), rel=1e-12)
    assert lda_classify(m, Dataset(np.zeros((1, 5))))[0] == 1.0


def test_equal_means_reduce_to_prior_rule():
    mu = np.array([1.0, -2.0])
    minority = LdaModel(0.3, mu, mu, np.eye(2), False)
    majority = LdaModel(0.7, mu, mu, np.eye(2), False)
    x = Dataset(np.random.default_rng(0).normal(size=(20, 2)))
    assert np.all(lda_classify(minority, x) == 0.0)
    assert np.all(lda_classify(majority, x) == 1.0)


def test_two_point_symmetric_training_boundary():
    # one sample per class at +-v: the fitted boundary passes through 0
    x = np.array([[1.0, 0.0], [-1.0, 0.0]])
    y = np.array([1.0, 0.0])
    # pooled covariance with divisor n-2 = 0 matrix; ridge keeps it usable
    model = fit_lda(Dataset(np.vstack([x, x + [[0, 1e-3], [0, -1e-3]]]),
                            np.r_[y, y]))
    eps = 1e-6
    plus = model.scores(np.array([[eps, 0.0]]))[0]
    minus = model.scores(np.array([[-eps, 0.0]]))[0]
    assert plus > 0 > minus
    mid = model.scores(np.zeros((1, 2)))[0]
    assert abs(mid) < 1e-9


def test_lda_matches_bayes_decisions_with_true_parameters():
    rng = np.random.default_rng(5)
    q = Dataset(rng.normal(size=(5000, 5)))
    plugin = LdaModel(M1_PI, -M1_MU, M1_MU, np.eye(5), False)
    assert np.array_equal(lda_classify(plugin, q), bayes_classify("M1", q))


def test_bayes_m1_at_mu1():
    q = Dataset(np.array([[1.5, 0.0, 0.0, 0.0, 0.0]]))
    model = LdaModel(M1_PI, -M1_MU, M1_MU, np.eye(5), False)
    assert model.scores(q.features)[0] == pytest.approx(np.log(9.0) + 4.5, rel=1e-12)
    assert bayes_classify("M1", q)[0] == 1.0


def test_bayes_m2_boundary_cases():
    assert bayes_classify("M2", Dataset(np.array([[0.5, 0.5, 0, 0, 0.0]])))[0] == 0.0
    assert bayes_classify("M2", Dataset(np.array([[0.0, 0.0, 0, 0, 0.0]])))[0] == 1.0


def test_fit_lda_requires_both_classes():
    with pytest.raises(ValueError):
        fit_lda(Dataset(np.random.default_rng(0).normal(size=(10, 2)), np.ones(10)))


def test_fit_lda_on_clean_m1_data_is_accurate():
    bundle = gen_labelnoise("M1", 3000, 0.0, 2000, 11)
    model = fit_lda(bundle.train)
    pred = lda_classify(model, bundle.test)
    bayes = bayes_classify("M1", bundle.test)
    assert np.mean(pred != bayes) < 0.02
