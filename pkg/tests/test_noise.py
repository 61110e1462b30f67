import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from pileupdens.core.errors import DomainError
from pileupdens.core.noise import (
    BiExponentialNoise,
    EmpiricalNoise,
    ExponentialNoise,
    NoiseModel,
    delta_eta,
    noise_ft,
    sample_noise,
)

EXP1 = ExponentialNoise(theta=1.0)
BIEXP = BiExponentialNoise(alpha=2.0, beta=1.0, nu=1.0, tau=2.0)
BIEXP_UNBALANCED = BiExponentialNoise(alpha=3.0, beta=1.0, nu=1.0, tau=2.0)


def _quad_delta(noise, m):
    def inv_power(u):
        return 1.0 / abs(complex(noise_ft(noise, u))) ** 2

    L = math.pi * m
    value, _ = integrate.quad(inv_power, -L, L, epsabs=0.0, epsrel=1e-13, limit=200)
    return value / (2.0 * math.pi)


@pytest.mark.parametrize(
    "noise",
    [EXP1, BIEXP, BIEXP_UNBALANCED, EmpiricalNoise(values=np.array([0.5, 1.0, 2.5]))],
)
def test_ft_at_zero_is_one(noise):
    assert noise_ft(noise, 0.0) == pytest.approx(1.0 + 0.0j)


def test_ft_examples():
    assert noise_ft(EXP1, 1.0) == pytest.approx(0.5 - 0.5j)
    assert abs(noise_ft(BIEXP, 1.0)) ** 2 == pytest.approx(0.4)
    u = np.linspace(-5.0, 5.0, 11)
    assert np.allclose(np.abs(noise_ft(BIEXP, u)) ** 2, 4.0 / ((1 + u**2) * (4 + u**2)))


def test_ft_matches_quadrature():
    def part(fn, u):
        return integrate.quad(lambda x: fn(u * x) * math.exp(-x), 0.0, np.inf)[0]

    u = 1.7
    expected = part(math.cos, u) - 1j * part(math.sin, u)
    assert noise_ft(EXP1, u) == pytest.approx(expected, abs=1e-9)


@given(st.floats(min_value=-1e3, max_value=1e3))
def test_ft_is_bounded_by_one(u):
    for noise in (EXP1, BIEXP, BIEXP_UNBALANCED, BIEXP.with_variance(0.2)):
        assert abs(noise_ft(noise, u)) <= 1.0 + 1e-12


def test_scalar_frequency_gives_a_python_complex():
    empirical = EmpiricalNoise(values=np.array([0.5, 1.0, 2.0]))
    for noise in (EXP1, BIEXP, BIEXP_UNBALANCED, empirical):
        value = noise_ft(noise, 0.7)
        assert isinstance(value, complex)
        assert abs(value) <= 1.0
    assert noise_ft(EXP1, 1.0) == pytest.approx(1.0 / (1.0 + 1.0j))


def test_rescaled_noise():
    half = EXP1.rescaled(0.5)
    assert half.variance == pytest.approx(0.25)
    assert noise_ft(half, 2.0) == pytest.approx(noise_ft(EXP1, 1.0))
    # 0.5 * Exp(1) is Exp(2)
    assert delta_eta(half, 3) == pytest.approx(delta_eta(ExponentialNoise(theta=2.0), 3))
    assert BIEXP.rescaled(2.0).rescaled(0.5).scale == pytest.approx(1.0)
    with pytest.raises(DomainError):
        EXP1.rescaled(0.0)


def test_delta_examples():
    assert delta_eta(EXP1, 1) == pytest.approx(1.0 + math.pi**2 / 3.0, rel=1e-12)
    assert delta_eta(EXP1, 1) == pytest.approx(4.289868, abs=1e-6)
    assert delta_eta(BIEXP, 1) == pytest.approx(1.0 + 5.0 * math.pi**2 / 12.0 + math.pi**4 / 20.0)
    assert delta_eta(BIEXP, 1) == pytest.approx(9.982790, abs=1e-6)
    assert delta_eta(ExponentialNoise(theta=1e6), 3) == pytest.approx(3.0, rel=1e-9)
    with pytest.raises(DomainError):
        delta_eta(EXP1, 0)


@pytest.mark.parametrize("m", range(1, 9))
@pytest.mark.parametrize(
    "noise",
    [EXP1, ExponentialNoise(theta=2.5), BIEXP, BIEXP_UNBALANCED, EXP1.with_variance(0.49)],
    ids=["exp1", "exp2.5", "biexp", "biexp-unbalanced", "exp-scaled"],
)
def test_closed_form_delta_matches_quadrature(noise, m):
    assert delta_eta(noise, m) == pytest.approx(_quad_delta(noise, m), rel=1e-8)


def test_empirical_delta_close_to_closed_form():
    values = sample_noise(EXP1, 10**5, seed=41)
    emp = EmpiricalNoise(values=values)
    for m in range(1, 5):
        assert delta_eta(emp, m) == pytest.approx(delta_eta(EXP1, m), rel=0.05)


def test_empirical_ft_converges_at_root_rate():
    us = np.array([0.5, 1.0, 2.0])
    exact = noise_ft(EXP1, us)
    rng = np.random.default_rng(43)

    def mean_error(size):
        errs = [
            np.abs(noise_ft(EmpiricalNoise(values=EXP1.sample(size, rng)), us) - exact).mean()
            for _ in range(20)
        ]
        return float(np.mean(errs))

    small, large = mean_error(100), mean_error(10_000)
    assert large < small / 4.0
    assert large * math.sqrt(10_000) < 2.0


def test_exponential_sampling_mean():
    y = sample_noise(ExponentialNoise(theta=2.0), 10**6, seed=1)
    assert np.all(y >= 0.0)
    assert abs(y.mean() - 0.5) < 4.0 * 0.5 / math.sqrt(y.size)


def test_biexponential_sampling_moments():
    y = sample_noise(BIEXP, 10**6, seed=2)
    assert y.size == 10**6
    assert BIEXP.mean == pytest.approx(1.5)
    assert BIEXP.variance == pytest.approx(1.25)
    assert abs(y.mean() - 1.5) < 4.0 * math.sqrt(1.25 / y.size)


def test_scale_multiplies_samples():
    base = sample_noise(EXP1, 1000, seed=3)
    scaled = sample_noise(ExponentialNoise(theta=1.0, scale=2.5), 1000, seed=3)
    assert np.allclose(scaled, 2.5 * base)


def test_with_variance_matches_sigma2():
    for noise in (EXP1, BIEXP, BIEXP_UNBALANCED):
        assert noise.with_variance(0.2).variance == pytest.approx(0.2)
    assert EXP1.with_variance(0.49).scale == pytest.approx(0.7)
    with pytest.raises(DomainError):
        EXP1.with_variance(0.0)


def test_smoothness_orders():
    assert EXP1.smoothness == 1
    assert BIEXP.smoothness == 2
    assert BIEXP_UNBALANCED.smoothness == 1


def test_biexponential_constraints():
    with pytest.raises(DomainError):
        BiExponentialNoise(alpha=1.0, beta=2.0, nu=1.0, tau=2.0)
    with pytest.raises(DomainError):
        BiExponentialNoise(alpha=2.0, beta=1.0, nu=2.0, tau=1.0)
    with pytest.raises(DomainError):
        BiExponentialNoise(alpha=2.0, beta=1.0, nu=1.0, tau=4.0)
    with pytest.raises(DomainError):
        ExponentialNoise(theta=-1.0)


def test_empirical_noise_validation():
    with pytest.raises(DomainError):
        EmpiricalNoise(values=np.array([]))
    with pytest.raises(DomainError):
        EmpiricalNoise(values=np.array([1.0, -2.0]))
    noise = EmpiricalNoise(values=np.array([1.0, 2.0]))
    assert noise.size == 2
    assert noise.mean == pytest.approx(1.5)


def test_empirical_resampling_draws_from_values():
    noise = EmpiricalNoise(values=np.array([1.0, 2.0, 4.0]))
    y = sample_noise(noise, 500, seed=8)
    assert set(np.unique(y)) <= {1.0, 2.0, 4.0}


def test_noise_from_dict():
    noise = NoiseModel.from_dict({"kind": "exp", "theta": 2.0, "sigma2": 0.25})
    assert isinstance(noise, ExponentialNoise)
    assert noise.variance == pytest.approx(0.25)
    noise = NoiseModel.from_dict({"kind": "biexponential", "alpha": 2, "beta": 1, "nu": 1, "tau": 2})
    assert noise == BIEXP
    noise = NoiseModel.from_dict({"kind": "empirical", "values": [0.3, 0.6]})
    assert noise.size == 2
