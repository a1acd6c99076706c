import math

import numpy as np
import pytest
import scipy.special as sp
import scipy.stats as ss
from hypothesis import given, settings
from hypothesis import strategies as st

from dirwalk.characterization import dirichlet_moment
from dirwalk.errors import DimensionMismatch, TooFewSamples
from dirwalk.rng import RngStream
from dirwalk.sampling import sample_dirichlet, sample_gamma
from dirwalk.stats import (
    TestReport,
    combine,
    energy_distance_test,
    gamma_cdf,
    kolmogorov_quantile,
    kolmogorov_sf,
    ks_test,
    moment_battery,
    multi_indices,
    reg_inc_beta,
    reg_inc_gamma,
)


def beta_cdf_binomial(a: int, b: int, x: float) -> float:
    """I_x(a, b) for integer a, b as a binomial tail."""
    n = a + b - 1
    return sum(math.comb(n, j) * x**j * (1 - x) ** (n - j) for j in range(a, n + 1))


def test_reg_inc_gamma_examples():
    assert reg_inc_gamma(1.0, 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-12)
    assert reg_inc_gamma(3.7, 0.0) == 0.0
    assert reg_inc_gamma(2.0, 1e3) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("a", [0.05, 0.3, 1.0, 2.0, 7.5, 40.0, 250.0])
def test_reg_inc_gamma_vs_scipy(a):
    x = np.concatenate([np.linspace(0, 3 * a + 20, 400), [a, a + 1, 1e-8]])
    np.testing.assert_allclose(reg_inc_gamma(a, x), sp.gammainc(a, x), atol=1e-10)


def test_reg_inc_beta_examples():
    assert reg_inc_beta(1, 1, 0.3) == pytest.approx(0.3, abs=1e-14)
    assert reg_inc_beta(2, 4, 0.5) == pytest.approx(0.8125, abs=1e-12)
    assert reg_inc_beta(2.5, 0.3, 1.0) == 1.0
    assert reg_inc_beta(2.5, 0.3, 0.0) == 0.0


@pytest.mark.parametrize("a,b", [(1, 1), (2, 4), (4, 2), (3, 7), (10, 10), (1, 5)])
def test_reg_inc_beta_vs_binomial_oracle(a, b):
    for x in np.linspace(0, 1, 41):
        assert reg_inc_beta(a, b, x) == pytest.approx(beta_cdf_binomial(a, b, x), abs=1e-10)


@pytest.mark.parametrize("a,b", [(0.1, 0.1), (0.5, 3.0), (2.0, 0.2), (30.0, 45.0), (200.0, 3.0)])
def test_reg_inc_beta_vs_scipy(a, b):
    x = np.linspace(0, 1, 301)
    np.testing.assert_allclose(reg_inc_beta(a, b, x), sp.betainc(a, b, x), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 50.0), st.floats(0.05, 50.0))
def test_special_functions_monotone(a, b):
    x = np.linspace(0, 1, 1000)
    assert np.all(np.diff(reg_inc_beta(a, b, x)) >= -1e-12)
    g = reg_inc_gamma(a, np.linspace(0, 5 * a + 10, 1000))
    assert np.all(np.diff(g) >= -1e-12)
    assert g.min() >= 0 and g.max() <= 1


def test_kolmogorov_distribution_vs_scipy():
    for x in (0.3, 0.6, 0.9, 1.0, 1.2, 1.6, 2.5):
        assert kolmogorov_sf(x) == pytest.approx(ss.kstwobign.sf(x), abs=1e-12)
    for level in (0.1, 0.05, 0.01, 0.001):
        assert kolmogorov_quantile(level) == pytest.approx(ss.kstwobign.isf(level), abs=1e-10)


def test_ks_examples():
    u = RngStream(1).uniforms(100_000)
    assert ks_test(u, lambda x: x).passed
    assert not ks_test(np.full(100, 0.5), lambda x: x).passed
    g = sample_gamma(2.0, RngStream(2), size=100_000)
    rep = ks_test(g, gamma_cdf(2.0))
    assert rep.passed
    with pytest.raises(TooFewSamples):
        ks_test(u[:49], lambda x: x)


def test_ks_statistic_vs_scipy():
    x = RngStream(3).uniforms(500) ** 1.1
    rep = ks_test(x, lambda v: v)
    ref = ss.kstest(x, "uniform")
    assert rep.details["D_n"] == pytest.approx(ref.statistic, abs=1e-14)


def test_energy_examples():
    y = sample_dirichlet([2, 2, 2], RngStream(4), size=2000)
    assert energy_distance_test(y[:1000], y[1000:], rng=RngStream(5)).passed
    z = sample_dirichlet([1, 1, 1], RngStream(6), size=1000)
    assert not energy_distance_test(y[:1000], z, rng=RngStream(7)).passed
    same = energy_distance_test(y[:300], y[:300], rng=RngStream(8))
    assert abs(same.statistic) < 1e-2
    with pytest.raises(DimensionMismatch):
        energy_distance_test(y[:200], y[:200, :2])
    with pytest.raises(TooFewSamples):
        energy_distance_test(y[:99], y[:200])


def test_energy_statistic_brute_force():
    rng = np.random.default_rng(0)
    x, y = rng.random((120, 2)), rng.random((130, 2)) + 0.1
    dxy = np.linalg.norm(x[:, None] - y[None], axis=2).mean()
    dxx = np.linalg.norm(x[:, None] - x[None], axis=2).sum() / (120 * 119)
    dyy = np.linalg.norm(y[:, None] - y[None], axis=2).sum() / (130 * 129)
    rep = energy_distance_test(x, y, n_permutations=50, rng=RngStream(1))
    assert rep.statistic == pytest.approx(2 * dxy - dxx - dyy, rel=1e-12)


def test_energy_permutations_reproducible():
    y = sample_dirichlet([1, 2], RngStream(9), size=400)
    a = energy_distance_test(y[:200], y[200:], rng=RngStream(10))
    b = energy_distance_test(y[:200], y[200:], rng=RngStream(10))
    assert a.p_value == b.p_value


def test_permutation_statistics_match_direct_relabel():
    # the matrix shortcut must equal recomputing the statistic on shuffled labels
    rng = np.random.default_rng(1)
    x, y = rng.random((100, 2)), rng.random((110, 2))
    stream = RngStream(2)
    rep = energy_distance_test(x, y, n_permutations=20, rng=stream.copy())
    pooled = np.vstack([x, y])
    order = np.argsort(stream.copy().uniform_block(20, 210), axis=1, kind="stable")
    stat = rep.statistic
    exceed = 0
    for o in order:
        xs, ys = pooled[o[:100]], pooled[o[100:]]
        d = (
            2 * np.linalg.norm(xs[:, None] - ys[None], axis=2).mean()
            - np.linalg.norm(xs[:, None] - xs[None], axis=2).sum() / (100 * 99)
            - np.linalg.norm(ys[:, None] - ys[None], axis=2).sum() / (110 * 109)
        )
        exceed += d >= stat - 1e-12 * abs(stat)
    assert rep.p_value == pytest.approx((1 + exceed) / 21)


def test_moment_battery_examples():
    y = sample_dirichlet([2, 2, 2], RngStream(11), size=100_000)
    assert moment_battery(y, lambda k: dirichlet_moment([2, 2, 2], k)).passed
    bad = moment_battery(y, lambda k: dirichlet_moment([1, 1, 1], k))
    assert not bad.passed and bad.statistic > 10
    assert moment_battery(y, lambda k: 0.0, max_order=0).passed
    with pytest.raises(TooFewSamples):
        moment_battery(y[:999], lambda k: 0.0)


def test_multi_indices():
    ks = multi_indices(3, 2)
    assert len(ks) == 3 + 6
    assert ks[0] == (1, 0, 0) and (1, 1, 0) in ks and (0, 0, 2) in ks


def test_report_verdict_and_json():
    assert TestReport("a", 1.0, 10, p_value=0.02, level=0.01).passed
    assert not TestReport("a", 1.0, 10, p_value=0.001, level=0.01).passed
    assert TestReport("b", 3.9, 10, threshold=4.0).passed
    assert not TestReport("b", math.inf, 10, threshold=4.0).to_dict()["pass"]
    comb = combine("c", [TestReport("b", 3.9, 10, threshold=4.0), TestReport("b", 5.0, 10, threshold=4.0)])
    assert comb.statistic == 1.0 and not comb.passed
    assert comb.to_dict()["details"]["components"][1]["pass"] is False
