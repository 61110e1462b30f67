import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from pileupdens.core.errors import ConfigError, DomainError
from pileupdens.core.generating import (
    TabulatedMasses,
    ZeroTruncatedPoisson,
    pileup_cdf,
    weight_table,
)
from pileupdens.core.noise import ExponentialNoise
from pileupdens.core.sampling import (
    Sample,
    TargetDistribution,
    ecdf,
    l_statistic,
    sample_counts,
    sample_pileup,
    sample_target,
    sample_truncated_count,
)

# fixed seeds, so a KS p-value below this would be a real discrepancy
P_MIN = 1e-3


def test_inverse_cdf_samplers():
    assert TargetDistribution.parse("exponential").from_uniform(1.0 - math.exp(-1.0)) == (
        pytest.approx(3.0)
    )
    assert TargetDistribution.parse("pareto").from_uniform(1.0) == 0.0
    assert TargetDistribution.parse("weibull").from_uniform(1.0) == 0.0
    assert TargetDistribution.parse("exp:2").from_uniform(0.5) == pytest.approx(math.log(2) / 2)


def test_parse_targets():
    assert TargetDistribution.parse("Gamma").kind == "gamma"
    assert TargetDistribution.parse("gamma33").kind == "gamma"
    assert TargetDistribution.parse("exp3").kind == "exponential"
    assert TargetDistribution.parse("exp:0.5").rate == 0.5
    assert TargetDistribution.parse("exp:0.5").name == "exp:0.5"
    with pytest.raises(ConfigError):
        TargetDistribution.parse("cauchy")
    with pytest.raises(ConfigError):
        TargetDistribution.parse("exp:fast")
    with pytest.raises(DomainError):
        TargetDistribution("user-exponential", -1.0)


@pytest.mark.parametrize("name", ["gamma", "exponential", "pareto", "weibull", "exp:0.7"])
def test_densities_integrate_to_one(name):
    dist = TargetDistribution.parse(name)
    head, _ = integrate.quad(dist.pdf, 0.0, 1.0, limit=200)
    tail, _ = integrate.quad(dist.pdf, 1.0, np.inf, limit=200)
    assert head + tail == pytest.approx(1.0, abs=1e-6)
    assert np.all(dist.pdf(np.linspace(0.01, 50.0, 200)) >= 0.0)


def test_pareto_and_weibull_densities_match_closed_forms():
    x = np.linspace(0.05, 20.0, 50)
    pareto = TargetDistribution.parse("pareto")
    assert np.allclose(pareto.pdf(x), (1.0 + x / 4.0) ** -5)
    weibull = TargetDistribution.parse("weibull")
    closed = 0.75 * 0.25**-0.75 * x**-0.25 * np.exp(-((4.0 * x) ** 0.75))
    assert np.allclose(weibull.pdf(x), closed)


def test_gamma_sample_mean():
    n = 10**6
    y = sample_target(TargetDistribution.parse("gamma"), n, seed=11)
    assert abs(y.mean() - 9.0) < 4.0 * math.sqrt(27.0 / n)


@pytest.mark.parametrize("name", ["exponential", "pareto", "weibull", "gamma"])
def test_target_samplers_ks(name):
    dist = TargetDistribution.parse(name)
    y = sample_target(dist, 10**5, seed=5)
    assert np.all(y >= 0.0)
    assert stats.kstest(y, dist.cdf).pvalue > P_MIN


def test_sample_target_is_deterministic():
    dist = TargetDistribution.parse("weibull")
    assert np.array_equal(sample_target(dist, 50, 3), sample_target(dist, 50, 3))
    with pytest.raises(DomainError):
        sample_target(dist, 0, 3)


def test_truncated_count_no_pileup():
    model = ZeroTruncatedPoisson(mu=1e-8)
    assert sample_truncated_count(model, seed=1) == 1
    counts = sample_counts(model, 10_000, np.random.default_rng(2))
    assert np.all(counts == 1)


@pytest.mark.parametrize("mu", [0.1, 1.0, 3.0])
def test_truncated_poisson_mean(mu):
    counts = sample_counts(ZeroTruncatedPoisson(mu=mu), 10**6, np.random.default_rng(9))
    assert counts.min() >= 1
    expected = mu / -math.expm1(-mu)
    assert abs(counts.mean() - expected) < 4.0 * counts.std() / math.sqrt(counts.size)


def test_tabulated_count_mean():
    counts = sample_counts(TabulatedMasses(masses=(0.5, 0.5)), 10**6, np.random.default_rng(4))
    assert set(np.unique(counts)) == {1, 2}
    assert abs(counts.mean() - 1.5) < 4.0 * 0.5 / math.sqrt(counts.size)


def test_pileup_sample_without_pileup_matches_target():
    dist = TargetDistribution.parse("gamma")
    sample = sample_pileup(dist, ZeroTruncatedPoisson(mu=1e-8), None, 10**4, seed=21)
    assert stats.kstest(sample.values, dist.cdf).pvalue > P_MIN


def test_pileup_sample_matches_distorted_cdf():
    dist = TargetDistribution.parse("exponential")
    model = ZeroTruncatedPoisson(mu=2.0)
    sample = sample_pileup(dist, model, None, 10**5, seed=22)
    assert np.all(np.diff(sample.values) >= 0.0)
    assert np.array_equal(sample.weights, weight_table(model, 10**5))

    def G(z):
        return pileup_cdf(model, dist.cdf(z))

    assert stats.kstest(sample.values, G).pvalue > P_MIN


def test_noisy_pileup_sample_is_positive():
    sample = sample_pileup(
        TargetDistribution.parse("exponential"),
        ZeroTruncatedPoisson(mu=1.0),
        ExponentialNoise(theta=1.0),
        10**5,
        seed=23,
    )
    assert sample.n == 10**5
    assert sample.values[0] >= 0.0


def test_pileup_sample_is_deterministic():
    args = (TargetDistribution.parse("pareto"), ZeroTruncatedPoisson(mu=0.5), None, 200)
    a = sample_pileup(*args, seed=99)
    b = sample_pileup(*args, seed=99)
    assert np.array_equal(a.values, b.values)


def test_ecdf_examples():
    sample = Sample.from_values([3.0, 1.0, 2.0])
    assert ecdf(sample, 0.5) == 0.0
    assert ecdf(sample, 2.0) == pytest.approx(2.0 / 3.0)
    assert ecdf(sample, 3.0) == 1.0
    assert ecdf(sample, 100.0) == 1.0


@given(st.lists(st.floats(min_value=0.0, max_value=1e6), min_size=1, max_size=50, unique=True))
def test_ecdf_at_order_statistics(values):
    sample = Sample.from_values(values)
    ranks = ecdf(sample, sample.values)
    assert np.allclose(ranks * sample.n, np.arange(1, sample.n + 1))


def test_sample_validation():
    with pytest.raises(DomainError):
        Sample(values=np.array([2.0, 1.0]), weights=np.ones(2))
    with pytest.raises(DomainError):
        Sample(values=np.array([1.0, 2.0]), weights=np.ones(3))
    with pytest.raises(DomainError):
        Sample(values=np.array([-1.0, 2.0]), weights=np.ones(2))
    with pytest.raises(DomainError):
        Sample.from_values([])


def test_rank_weights():
    sample = Sample.from_values([0.4, 0.1, 0.3, 0.2], ZeroTruncatedPoisson(mu=1.0))
    ranked = sample.with_rank_weights()
    assert np.allclose(ranked.weights, [0.25, 0.5, 0.75, 1.0])
    assert np.array_equal(ranked.values, sample.values)


def test_pileup_moment_identity():
    dist = TargetDistribution.parse("exponential")
    sample = sample_pileup(dist, ZeroTruncatedPoisson(mu=1.0), None, 10**5, seed=31)
    estimate = l_statistic(sample, lambda z: z)
    # about four standard errors of the weighted mean at this n
    assert estimate == pytest.approx(3.0, abs=0.05)
    plain = float(np.mean(sample.values))
    assert plain < 2.5
