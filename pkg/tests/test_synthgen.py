"""Generator checks: formula anchors, determinism, and moment-level laws."""

import numpy as np
import pytest

from statbench.data import Dataset
from statbench.synthgen import (gen_cate, gen_covshift, gen_function_probe,
                                gen_labelnoise, gen_semisup, gen_sparse_linear)
from statbench.synthgen.causal import CateOracle
from statbench.synthgen.probes import bilinear_patch, piecewise_linear
from statbench.synthgen.semisup import (linear_response, logistic_prob,
                                        quantile_response, quantile_scale_coef)
from statbench.synthgen.sparse import beta_support


# ---------------------------------------------------------------------------
# semi-supervised DGPs

def test_semisup_determinism_bit_identical():
    a = gen_semisup("quantile", 4, 40, 25, 123)
    b = gen_semisup("quantile", 4, 40, 25, 123)
    assert np.array_equal(a.labeled.features, b.labeled.features)
    assert np.array_equal(a.labeled.labels, b.labeled.labels)
    assert np.array_equal(a.unlabeled.features, b.unlabeled.features)
    c = gen_semisup("quantile", 4, 40, 25, 124)
    assert not np.array_equal(a.labeled.labels, c.labeled.labels)


def test_linear_response_at_zero_without_noise():
    # x = 0: y = 1 + (0 - 0 + 1) = 2 per coordinate term
    y = linear_response(np.zeros((1, 1)), np.zeros(1))
    assert y[0] == pytest.approx(2.0, abs=1e-12)


def test_logistic_intercept_is_eleven():
    # at x = 0 the logit reduces to the intercept
    p = logistic_prob(np.zeros((1, 2)))
    assert p[0] == pytest.approx(1.0 / (1.0 + np.exp(-11.0)), rel=1e-12)


def test_quantile_scale_coefficients():
    assert np.array_equal(quantile_scale_coef(4), [0.5, 0.5, 0.0, 0.0])
    assert np.array_equal(quantile_scale_coef(5), [0.5, 0.5, 0.5, 0.0, 0.0])


def test_quantile_cross_term_is_squared_sum():
    x = np.array([[1.0, 2.0, -0.5]])
    y = quantile_response(x, np.zeros(1))
    s = x.sum()
    assert y[0] == pytest.approx(1.0 + 0.5 * s + s**2, rel=1e-12)


def test_semisup_linear_noise_variance_moment():
    pair = gen_semisup("linear", 2, 100_000, 1, 7)
    resid = pair.labeled.labels - linear_response(pair.labeled.features,
                                                  np.zeros(pair.labeled.n))
    var = resid.var()
    # Var = 4; SE of the sample variance of N(0,4) is sqrt(2/n)*4
    se = np.sqrt(2.0 / pair.labeled.n) * 4.0
    assert abs(var - 4.0) < 4.0 * se


def test_semisup_rejects_bad_args():
    with pytest.raises(ValueError):
        gen_semisup("poisson", 2, 10, 10, 0)
    with pytest.raises(ValueError):
        gen_semisup("linear", 0, 10, 10, 0)


# ---------------------------------------------------------------------------
# causal designs

def test_cate_oracle_self_consistency():
    # recombination identities hold at machine-roundoff scale (the response
    # functions are b -+ tau/2, so the real-arithmetic identities pick up a
    # couple of ulps when re-evaluated in floating point)
    rng = np.random.default_rng(0)
    x = rng.uniform(-0.5, 0.5, size=(10_000, 6))
    for setup in "ABCDEF":
        o = CateOracle(setup)
        assert np.max(np.abs(o.mu1(x) - o.mu0(x) - o.tau(x))) < 1e-14
        assert np.max(np.abs((o.mu0(x) + o.mu1(x)) / 2.0 - o.base(x))) < 1e-14
        e = o.propensity(x)
        assert np.all((e > 0.0) & (e < 1.0))


def test_cate_known_values():
    x = np.array([[0.0, 0.0, 0.5, 0.0, 0.0, 0.0]])
    a = CateOracle("A")
    assert a.base(x)[0] == pytest.approx(0.0, abs=1e-15)
    assert a.tau(x)[0] == pytest.approx(0.2)
    b = CateOracle("B")
    assert np.all(b.propensity(np.random.uniform(-0.5, 0.5, (50, 6))) == 0.5)
    c = CateOracle("C")
    assert np.all(c.tau(np.random.uniform(-0.5, 0.5, (50, 6))) == 1.0)
    # setup E effect is the +-1 indicator contrast
    e = CateOracle("E")
    assert e.tau(np.array([[0.2, 0.0, 0, 0, 0, 0]]))[0] == 1.0
    assert e.tau(np.array([[0.0, 0.0, 0, 0, 0, 0]]))[0] == -1.0


def test_cate_outcome_construction():
    data = gen_cate("D", 400, 0.5, 21)
    assert data.features.shape == (400, 6)
    assert np.all((data.features >= -0.5) & (data.features <= 0.5))
    assert set(np.unique(data.treatment)) <= {0.0, 1.0}
    # residual against mu_T has the configured noise variance
    resid = data.outcome - data.oracle.mu(data.treatment, data.features)
    assert abs(resid.var() - 0.5) < 4.0 * np.sqrt(2.0 / 400) * 0.5
    with pytest.raises(ValueError):
        gen_cate("G", 10, 1.0, 0)


# ---------------------------------------------------------------------------
# covariate shift

def test_covshift_density_ratio_and_means():
    b = gen_covshift("i", 10, 10, 10, 0)
    assert b.true_density_ratio(np.array([0.75]))[0] == pytest.approx(5.0)
    assert b.true_density_ratio(np.array([0.25]))[0] == pytest.approx(0.2)
    assert b.true_mean(np.array([0.0]))[0] == pytest.approx(0.0)
    iv = gen_covshift("iv", 10, 10, 10, 0)
    # hand evaluation of the clipped-ramp pair at a few points
    for x, want in [(0.0, -2.0), (0.25, -2.0), (0.5, -1.0), (0.75, 0.0 + 1.0 - 2.0),
                    (1.0, 0.0)]:
        f1 = min(1.0, max(4 * x - 1, 0.0))
        f2 = min(1.0, max(4 * x - 3, 0.0))
        assert f1 + f2 - 2.0 == pytest.approx(want)
        assert iv.true_mean(np.array([x]))[0] == pytest.approx(f1 + f2 - 2.0)
    v = gen_covshift("v", 10, 10, 10, 0)
    assert v.true_mean(np.array([0.25]))[0] == pytest.approx(0.25 * np.sin(np.pi))


def test_covshift_source_mass_moment():
    b = gen_covshift("ii", 100_000, 10, 20_000, 3)
    share = float(np.mean(b.source.features[:, 0] < 0.5))
    p = 5.0 / 6.0
    se = np.sqrt(p * (1 - p) / 100_000)
    assert abs(share - p) < 4.0 * se
    # target-side mass flips
    a_share = float(np.mean(b.target_aux.features[:, 0] < 0.5))
    assert abs(a_share - (1 - p)) < 4.0 * np.sqrt(p * (1 - p) / 20_000)
    assert not b.target_aux.is_labeled


def test_covshift_unknown_mean_fn():
    with pytest.raises(ValueError):
        gen_covshift("vi", 10, 10, 10, 0)


# ---------------------------------------------------------------------------
# label noise

def test_labelnoise_flip_rate_moment():
    b = gen_labelnoise("M1", 100_000, 0.25, 100, 17)
    flips = float(np.mean(b.train.labels != b.train_clean_labels))
    se = np.sqrt(0.25 * 0.75 / 100_000)
    assert abs(flips - 0.25) < 4.0 * se


def test_labelnoise_rho_zero_and_bounds():
    b = gen_labelnoise("M2", 500, 0.0, 100, 3)
    assert np.array_equal(b.train.labels, b.train_clean_labels)
    with pytest.raises(ValueError):
        gen_labelnoise("M1", 100, 0.5, 100, 0)
    with pytest.raises(ValueError):
        gen_labelnoise("M3", 100, 0.1, 100, 0)


def test_labelnoise_eta_values():
    b = gen_labelnoise("M2", 10, 0.1, 10, 0)
    assert b.eta(np.array([[0.5, 0.5, 0.1, 0.9, 0.3]]))[0] == 0.0
    assert b.eta(np.array([[0.0, 0.0, 0.5, 0.5, 0.5]]))[0] == 1.0
    m1 = gen_labelnoise("M1", 10, 0.1, 10, 0)
    # P(Y=1) marginal recovered when integrating eta is ~0.9; spot check center
    assert m1.eta(np.zeros((1, 5)))[0] == pytest.approx(0.9)


# ---------------------------------------------------------------------------
# sparse linear designs

def test_beta_supports():
    assert np.array_equal(beta_support(100, 10, "II"), np.arange(10))
    assert np.array_equal(beta_support(100, 5, "I"), [0, 20, 40, 60, 80])
    # collisions advance to the next free index and stay within range
    s = beta_support(10, 7, "I")
    assert len(np.unique(s)) == 7 and s.min() >= 0 and s.max() <= 9


def test_sparse_noise_calibration():
    d = gen_sparse_linear(100, 5, "I", "identity", 1.22, 50, 10, 0)
    assert d.sigma2 == pytest.approx(5.0 / 1.22)
    banded = gen_sparse_linear(10, 2, "II", "banded", 2.0, 50, 10, 0)
    # banded entry (0, 2) = 0.35^2
    from statbench.synthgen.sparse import make_cov
    assert make_cov(10, "banded")[0, 2] == pytest.approx(0.1225)
    bb = np.zeros(10)
    bb[:2] = 1.0
    assert banded.sigma2 == pytest.approx(bb @ make_cov(10, "banded") @ bb / 2.0)


def test_sparse_empirical_covariance_moment():
    d = gen_sparse_linear(20, 3, "I", "banded", 1.0, 100_000, 10, 5)
    emp = d.train.features.T @ d.train.features / d.train.n
    from statbench.synthgen.sparse import make_cov
    assert np.max(np.abs(emp - make_cov(20, "banded"))) < 0.05


def test_sparse_rejects_bad_s():
    with pytest.raises(ValueError):
        gen_sparse_linear(10, 11, "I", "identity", 1.0, 50, 10, 0)


# ---------------------------------------------------------------------------
# function probes

def test_step_functions():
    p = gen_function_probe("step1d", 31, 9)
    assert p.truth(np.array([[0.0]]))[0] == 1.0
    assert p.truth(np.array([[-1e-12]]))[0] == -1.0
    q = gen_function_probe("step2d", 5, 9)
    assert q.truth(np.array([[-0.1, -0.1]]))[0] == -1.0
    assert q.truth(np.array([[-0.1, 0.1]]))[0] == 1.0


def test_quad2d_value():
    p = gen_function_probe("quad2d", 4, 2)
    assert p.truth(np.array([[1.0, 1.0]]))[0] == pytest.approx(2.0)


def test_probe_grids_and_noise():
    p = gen_function_probe("linear1d", 31, 4)
    x = p.train.features[:, 0]
    assert x.min() >= -1.0 and x.max() <= 1.0
    g = p.eval_grid.features[:, 0]
    assert g.min() == -4.0 and g.max() == 4.0
    resid = p.train.labels - p.truth(p.train.features)
    assert resid.std() < 0.1  # sd 0.05 noise
    q = gen_function_probe("quad2d", 11, 4)
    assert q.train.n == 121
    assert q.eval_grid.features.min() == -4.0


def test_piecewise_linear_continuity_and_slopes():
    f = piecewise_linear(0.3, np.array([1.0, -2.0, 0.5, 2.0]))
    for b in (-0.5, 0.0, 0.5):
        assert f(np.array([b - 1e-9]))[0] == pytest.approx(f(np.array([b + 1e-9]))[0],
                                                           abs=1e-6)
    # slope of the first piece
    assert (f(np.array([-0.6])) - f(np.array([-0.9])))[0] == pytest.approx(0.3)


def test_bilinear_constant_blend():
    f = bilinear_patch(np.full((5, 5), 2.5))
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, size=(200, 2))
    assert np.allclose(f(pts[:, 0], pts[:, 1]), 2.5)


def test_bilinear_interpolates_corner_values():
    rng = np.random.default_rng(3)
    vals = rng.uniform(-1, 1, size=(5, 5))
    f = bilinear_patch(vals)
    # cell-corner coordinates are -1 + 0.5 * i
    for i in range(5):
        for j in range(5):
            x1 = -1.0 + 0.5 * i
            x2 = -1.0 + 0.5 * j
            got = f(np.array([x1]), np.array([x2]))[0]
            assert got == pytest.approx(vals[min(i, 4), min(j, 4)], abs=1e-12)


def test_probe_unknown_kind():
    with pytest.raises(ValueError):
        gen_function_probe("cubic1d", 10, 0)


def test_logistic_label_rate_matches_quadrature():
    # independent oracle: P(Y=1) for p=1 by numerical integration over the
    # two-component Gaussian mixture
    from scipy.integrate import quad
    from scipy.stats import norm

    def integrand(x):
        p1 = 1.0 / (1.0 + np.exp(-(11.0 + x - x**2)))
        dens = 0.5 * norm.pdf(x, 1.0, 1.0) + 0.5 * norm.pdf(x, -1.0, 1.0)
        return p1 * dens

    want = quad(integrand, -12, 12)[0]
    pair = gen_semisup("logistic", 1, 100_000, 1, 29)
    got = float(pair.labeled.labels.mean())
    se = np.sqrt(want * (1 - want) / 100_000)
    assert abs(got - want) < 4.0 * se


def test_replicate_streams_are_uncorrelated():
    # derived streams for distinct replicate keys should behave independently;
    # with n = 50k the sample correlation of independent draws is ~N(0, 1/n)
    from statbench.rng import make_rng

    a = make_rng(77, 0).standard_normal(50_000)
    b = make_rng(77, 1).standard_normal(50_000)
    corr = float(np.corrcoef(a, b)[0, 1])
    assert abs(corr) < 4.0 / np.sqrt(50_000)
