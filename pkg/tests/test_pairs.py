import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subred.pairs import (
    UNDER_P,
    UNDER_Q,
    BernoulliPair,
    ExponentQuery,
    GaussianPair,
    PairGrid,
    chernoff_exponent,
    chi2_quadrature,
    divergences,
    entrywise_counterexample,
    llr,
    log_mgf,
    pair_from_config,
    uc_membership,
)

GRID = [GaussianPair(0.5), GaussianPair(1.3), BernoulliPair(0.6, 0.3),
        BernoulliPair(0.9, 0.1), BernoulliPair(0.35, 0.2)]

bernoulli_pairs = st.tuples(
    st.floats(0.05, 0.95), st.floats(0.05, 0.95)).filter(
    lambda t: t[1] < t[0] - 0.02).map(lambda t: BernoulliPair(*t))
gaussian_pairs = st.floats(0.05, 2.0).map(GaussianPair)
any_pair = st.one_of(gaussian_pairs, bernoulli_pairs)


def test_llr_examples():
    assert llr(GaussianPair(0.5), 0.0) == pytest.approx(-0.125, abs=1e-12)
    b = BernoulliPair(0.6, 0.3)
    assert llr(b, 1) == pytest.approx(math.log(2.0), abs=1e-12)
    assert llr(b, 0) == pytest.approx(math.log(0.4 / 0.7), abs=1e-12)


def test_llr_domain_error():
    with pytest.raises(ValueError):
        llr(BernoulliPair(0.6, 0.3), 2)


def test_llr_vectorized():
    b = BernoulliPair(0.6, 0.3)
    got = llr(b, np.array([1, 0, 1]))
    assert got == pytest.approx([math.log(2), math.log(4 / 7), math.log(2)])


def test_divergence_examples():
    assert GaussianPair(0.5).skl == pytest.approx(0.25, abs=1e-15)
    kl_pq, kl_qp, skl, chi2 = divergences(BernoulliPair(0.6, 0.3))
    assert chi2 == pytest.approx(0.09 / 0.21, abs=1e-12)
    assert skl == pytest.approx(kl_pq + kl_qp, abs=1e-15)
    tiny = divergences(GaussianPair(1e-6))
    assert all(abs(v) < 1e-11 for v in tiny)


def test_gaussian_chi2_matches_quadrature_oracle():
    # independent adaptive-Simpson route against the closed form
    for mu in (0.2, 0.5, 1.0, 2.0):
        pair = GaussianPair(mu)
        assert pair.chi2() == pytest.approx(chi2_quadrature(pair), abs=5e-10)
    # and it is e^(mu^2) - 1, not half of it
    assert GaussianPair(1.0).chi2() == pytest.approx(math.e - 1.0, rel=1e-12)


def test_bernoulli_chi2_two_routes():
    for pair in (BernoulliPair(0.6, 0.3), BernoulliPair(0.9, 0.1)):
        p, q = pair.p_alt, pair.p_null
        closed = (p - q) ** 2 / (q * (1 - q))
        exact_sum = (p / q) ** 2 * q + ((1 - p) / (1 - q)) ** 2 * (1 - q) - 1
        assert pair.chi2() == pytest.approx(closed, rel=1e-12)
        assert pair.chi2() == pytest.approx(exact_sum, rel=1e-12)


def test_log_mgf_trivials():
    for pair in GRID:
        assert log_mgf(pair, UNDER_Q, 0.0) == 0.0
        # lambda = 1 under Q is the likelihood-ratio normalization
        assert log_mgf(pair, UNDER_Q, 1.0) == pytest.approx(0.0, abs=1e-12)


def test_log_mgf_gaussian_closed_form():
    mu = 0.8
    pair = GaussianPair(mu)
    for lam in np.linspace(-3, 3, 13):
        want = -lam * mu**2 / 2 + lam**2 * mu**2 / 2
        assert log_mgf(pair, UNDER_Q, lam) == pytest.approx(want, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(any_pair, st.floats(-3.0, 3.0))
def test_mgf_shift_property(pair, lam):
    assert abs(log_mgf(pair, UNDER_P, lam)
               - log_mgf(pair, UNDER_Q, lam + 1.0)) <= 1e-10


def test_exponent_examples():
    for pair in GRID:
        assert chernoff_exponent(
            pair, ExponentQuery(UNDER_P, pair.kl_pq)) <= 1e-12
        assert chernoff_exponent(
            pair, ExponentQuery(UNDER_Q, -pair.kl_qp)) <= 1e-12
    got = chernoff_exponent(GaussianPair(1.0), ExponentQuery(UNDER_P, 1.0))
    assert got == pytest.approx(0.125, abs=1e-12)


def test_exponent_bernoulli_closed_form():
    pair = BernoulliPair(0.7, 0.2)
    c1 = math.log(0.7 / 0.2)
    c0 = math.log(0.3 / 0.8)
    for tau in (-0.4, 0.0, 0.3, 0.9):
        alpha = (tau - c0) / (c1 - c0)
        want = (alpha * math.log(alpha / 0.7)
                + (1 - alpha) * math.log((1 - alpha) / 0.3))
        got = chernoff_exponent(pair, ExponentQuery(UNDER_P, tau), "closed")
        assert got == pytest.approx(want, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(any_pair, st.floats(0.01, 0.99))
def test_legendre_shift_and_numeric_agreement(pair, frac):
    # 50+ random taus in the valid window across example runs
    tau = -pair.kl_qp + frac * (pair.kl_pq + pair.kl_qp)
    ep = chernoff_exponent(pair, ExponentQuery(UNDER_P, tau), "closed")
    eq = chernoff_exponent(pair, ExponentQuery(UNDER_Q, tau), "closed")
    assert abs(ep + tau - eq) <= 1e-8
    ep_num = chernoff_exponent(pair, ExponentQuery(UNDER_P, tau), "numeric")
    eq_num = chernoff_exponent(pair, ExponentQuery(UNDER_Q, tau), "numeric")
    assert ep_num == pytest.approx(ep, abs=1e-6)
    assert eq_num == pytest.approx(eq, abs=1e-6)


def test_exponent_convexity_grid():
    for pair in GRID:
        taus = np.linspace(-pair.kl_qp, pair.kl_pq, 60)
        vals = [chernoff_exponent(pair, ExponentQuery(UNDER_Q, t))
                for t in taus]
        assert np.diff(vals, 2).min() >= -1e-8
        assert vals[0] <= 1e-8


def test_exponent_unbounded_window_edge():
    # outside the Bernoulli LLR range the supremum is unbounded
    pair = BernoulliPair(0.6, 0.3)
    hi = chernoff_exponent(
        pair, ExponentQuery(UNDER_P, math.log(2.0) + 0.1), "numeric")
    assert hi == math.inf


def test_clique_edge_pair():
    pair = BernoulliPair(1.0, 0.25)
    assert pair.llr(0) == -math.inf
    assert pair.kl_pq == pytest.approx(math.log(4.0))
    assert pair.kl_qp == math.inf
    assert log_mgf(pair, UNDER_Q, -0.5) == math.inf  # sentinel, not a crash
    assert chernoff_exponent(pair, ExponentQuery(UNDER_Q, -math.inf)) == math.inf
    assert chernoff_exponent(pair, ExponentQuery(UNDER_P, pair.kl_pq)) == 0.0


def test_normalization_monte_carlo():
    # mean of exp(LLR) under Q within 5 standard errors of 1
    rng = np.random.default_rng(11)
    n = 10**6
    for pair in (GaussianPair(0.5), BernoulliPair(0.6, 0.3),
                 BernoulliPair(0.9, 0.1)):
        x = pair.sample_null(n, rng)
        w = np.exp(pair.llr(x))
        se = w.std(ddof=1) / math.sqrt(n)
        assert abs(w.mean() - 1.0) <= 5 * se


def test_uc_membership():
    n = 10**4
    # Gaussian with shrinking mu: chi2/skl ratio tends to 1
    rep = uc_membership(GaussianPair(float(n) ** -0.3), "C", n)
    assert rep.satisfied and rep.witness == pytest.approx(1.0, abs=0.01)
    # sparse Bernoulli pair keeps a bounded ratio
    q = float(n) ** -0.4
    rep = uc_membership(BernoulliPair(2 * q, q), "C", n)
    assert rep.satisfied and rep.witness < 4.0
    # bounded LLR pair admits a finite quadratic-domination constant
    rep = uc_membership(BernoulliPair(0.9, 0.1), "B", n)
    assert rep.satisfied and math.isfinite(rep.witness)
    # Gaussian attains the quadratic bound with constant exactly 1
    rep = uc_membership(GaussianPair(0.4), "B", n)
    assert rep.satisfied and rep.witness == pytest.approx(1.0, abs=1e-9)
    rep = uc_membership(GaussianPair(float(n) ** -0.3), "A", n, epsilon=0.5)
    assert rep.satisfied and rep.witness > 0
    with pytest.raises(ValueError):
        uc_membership(GaussianPair(0.5), "A", n, epsilon=1.5)


def test_entrywise_counterexample():
    rep = entrywise_counterexample(n=10**4, alpha=0.5)
    assert rep["tv_sparse"] == pytest.approx(1e-2, rel=1e-12)
    assert rep["tv_dense"] == pytest.approx(1e-1, rel=1e-12)
    # KLs on the same order, TVs polynomially apart
    assert 0.01 <= rep["kl_ratio"] <= 100.0
    assert rep["tv_ratio"] == pytest.approx(0.1, rel=1e-12)
    degenerate = entrywise_counterexample(n=10**4, alpha=0.0)
    assert degenerate["tv_sparse"] == degenerate["tv_dense"]


def test_pair_from_config():
    g = pair_from_config("family=gaussian mu=0.5")
    assert isinstance(g, GaussianPair) and g.mu == 0.5
    b = pair_from_config("family=bernoulli p=0.6 q=0.3")
    assert isinstance(b, BernoulliPair)
    assert (b.p_alt, b.p_null) == (0.6, 0.3)
    with pytest.raises(ValueError):
        pair_from_config("family=poisson lam=2")
    with pytest.raises(ValueError):
        pair_from_config("family=gaussian mu=0.5 extra=1")


def test_pair_validation():
    with pytest.raises(ValueError):
        GaussianPair(0.0)
    with pytest.raises(ValueError):
        BernoulliPair(0.3, 0.6)
    with pytest.raises(ValueError):
        BernoulliPair(0.5, 0.0)


def test_pair_grid():
    g = PairGrid(d=4, pairs=GaussianPair(0.5))
    assert g.homogeneous and g.space == "real"
    assert g.pair_at(2, 3) is g.pairs
    arr = np.empty((2, 2), dtype=object)
    arr[:] = [[BernoulliPair(0.6, 0.3), BernoulliPair(0.7, 0.2)],
              [BernoulliPair(0.5, 0.1), BernoulliPair(0.8, 0.4)]]
    h = PairGrid(d=2, pairs=arr)
    assert not h.homogeneous and h.space == "bit"
    mixed = np.empty((2, 2), dtype=object)
    mixed[:] = [[GaussianPair(0.5), BernoulliPair(0.7, 0.2)],
                [GaussianPair(0.5), GaussianPair(0.5)]]
    with pytest.raises(ValueError):
        PairGrid(d=2, pairs=mixed)
