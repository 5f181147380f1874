import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import kendalltau, kstest

from lrcorr.copulas import COPULAS, sample_copula
from lrcorr.errors import BadThetaError


def debye_one(theta: float) -> float:
    value, _ = quad(lambda t: t / np.expm1(t), 0.0, theta)
    return value / theta


def frank_tau(theta: float) -> float:
    return 1.0 + 4.0 * (debye_one(theta) - 1.0) / theta


def test_gaussian_independence():
    rng = np.random.default_rng(41)
    n = 50000
    u1, u2 = sample_copula("gaussian", 0.0, n, rng)
    assert abs(np.corrcoef(u1, u2)[0, 1]) < 3 / np.sqrt(n)


def test_gaussian_tau_oracle():
    # Kendall tau of the gaussian copula is (2/pi) arcsin(theta)
    rng = np.random.default_rng(42)
    for theta in (0.5, 0.8, -0.6):
        u1, u2 = sample_copula("gaussian", theta, 100000, rng)
        want = (2 / np.pi) * np.arcsin(theta)
        assert kendalltau(u1, u2).statistic == pytest.approx(want, abs=0.02)


def test_clayton_tau_oracle():
    rng = np.random.default_rng(43)
    u1, u2 = sample_copula("clayton", 1.0, 100000, rng)
    assert kendalltau(u1, u2).statistic == pytest.approx(1 / 3, abs=0.02)


def test_clayton_tau_other_theta():
    rng = np.random.default_rng(44)
    u1, u2 = sample_copula("clayton", 4.0, 100000, rng)
    assert kendalltau(u1, u2).statistic == pytest.approx(4 / 6, abs=0.02)


def test_frank_tau_oracle():
    rng = np.random.default_rng(45)
    u1, u2 = sample_copula("frank", 4.0, 100000, rng)
    want = frank_tau(4.0)
    assert want == pytest.approx(0.389, abs=0.002)
    assert kendalltau(u1, u2).statistic == pytest.approx(want, abs=0.02)


def test_gumbel_tau_oracle():
    # standard parameterization: tau = 1 - 1/alpha
    rng = np.random.default_rng(46)
    for alpha in (1.5, 2.0):
        u1, u2 = sample_copula("gumbel", alpha, 100000, rng)
        assert kendalltau(u1, u2).statistic == pytest.approx(1 - 1 / alpha, abs=0.02)


def test_gumbel_alpha_one_is_independence():
    rng = np.random.default_rng(47)
    u1, u2 = sample_copula("gumbel", 1.0, 50000, rng)
    assert abs(np.corrcoef(u1, u2)[0, 1]) < 3 / np.sqrt(50000)


def test_gumbel_paper_alias_shifts_parameter():
    a = sample_copula("gumbel_paper", 1.0, 1000, np.random.default_rng(5))
    b = sample_copula("gumbel", 2.0, 1000, np.random.default_rng(5))
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[1], b[1])


def test_margins_are_uniform():
    rng = np.random.default_rng(48)
    cases = [("gaussian", 0.8), ("clayton", 1.0), ("frank", 4.0), ("gumbel", 2.0)]
    for copula, theta in cases:
        u1, u2 = sample_copula(copula, theta, 100000, rng)
        assert np.all((u1 > 0) & (u1 < 1))
        assert np.all((u2 > 0) & (u2 < 1))
        assert kstest(u1, "uniform").pvalue > 0.01, copula
        assert kstest(u2, "uniform").pvalue > 0.01, copula


def test_positive_dependence_orders_by_theta():
    rng = np.random.default_rng(49)
    weak = sample_copula("gaussian", 0.3, 50000, rng)
    strong = sample_copula("gaussian", 0.9, 50000, rng)
    assert np.corrcoef(*weak)[0, 1] < np.corrcoef(*strong)[0, 1]


def test_bad_theta_rejected():
    rng = np.random.default_rng(50)
    with pytest.raises(BadThetaError):
        sample_copula("gaussian", 1.0, 10, rng)
    with pytest.raises(BadThetaError):
        sample_copula("clayton", 0.0, 10, rng)
    with pytest.raises(BadThetaError):
        sample_copula("clayton", -1.0, 10, rng)
    with pytest.raises(BadThetaError):
        sample_copula("frank", 0.0, 10, rng)
    with pytest.raises(BadThetaError):
        sample_copula("gumbel", 0.5, 10, rng)
    with pytest.raises(BadThetaError):
        sample_copula("vine", 1.0, 10, rng)


def test_copula_registry():
    assert COPULAS == ("gaussian", "clayton", "frank", "gumbel")
