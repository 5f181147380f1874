import math

import numpy as np
import pytest

from lrcorr.errors import DomainError, NotPSDError
from lrcorr.mvn import (
    MvnProblem,
    mvn_probability,
    psd_repair,
    std_normal_cdf,
    std_normal_quantile,
)


def orthant(mean, corr, lower, seed=0):
    j = len(mean)
    problem = MvnProblem(
        mean=np.array(mean, dtype=float),
        corr=np.array(corr, dtype=float),
        lower=np.array(lower, dtype=float),
        upper=np.full(j, np.inf),
        rng_seed=seed,
    )
    return mvn_probability(problem)


def test_cdf_basics():
    assert std_normal_cdf(0.0) == pytest.approx(0.5, abs=1e-15)
    assert std_normal_cdf(1.96) == pytest.approx(0.9750021048517795, abs=1e-12)
    # the expected z-score for 90% power at one-sided 2.5%
    assert std_normal_cdf(3.24 - 1.96) == pytest.approx(0.8997, abs=5e-5)


def test_quantile_round_trip():
    assert std_normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)
    for p in (1e-8, 0.01, 0.3, 0.5, 0.9, 0.975, 1 - 1e-8):
        assert std_normal_cdf(std_normal_quantile(p)) == pytest.approx(p, abs=1e-10)


def test_quantile_domain():
    for p in (0.0, 1.0, -0.5, 1.5):
        with pytest.raises(DomainError):
            std_normal_quantile(p)


def test_psd_repair_identity_unchanged():
    eye = np.eye(4)
    assert np.array_equal(psd_repair(eye), eye)


def test_psd_repair_keeps_valid_matrix():
    m = np.array([[1.0, 0.999], [0.999, 1.0]])
    assert np.array_equal(psd_repair(m), m)


def test_psd_repair_fixes_indefinite_matrix():
    m = np.array([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]])
    assert np.linalg.eigvalsh(m)[0] < 0
    fixed = psd_repair(m)
    assert np.linalg.eigvalsh(fixed)[0] >= -1e-10
    assert np.diag(fixed) == pytest.approx(np.ones(3), abs=1e-12)
    assert np.allclose(fixed, fixed.T)


def test_one_dimensional_exact():
    est = orthant([3.24], [[1.0]], [1.96])
    assert est.value == pytest.approx(std_normal_cdf(3.24 - 1.96), abs=1e-10)
    assert est.est_error <= 1e-12


def test_bivariate_orthant_closed_form():
    # P(Z1>0, Z2>0) = 1/4 + arcsin(rho) / (2 pi)
    for rho in (-0.9, -0.5, 0.0, 0.5, 0.9):
        want = 0.25 + math.asin(rho) / (2 * math.pi)
        est = orthant([0.0, 0.0], [[1.0, rho], [rho, 1.0]], [0.0, 0.0])
        assert est.value == pytest.approx(want, abs=2e-4), rho


def test_bivariate_independent_tail_product():
    est = orthant([0.0, 0.0], np.eye(2), [1.96, 1.96])
    assert est.value == pytest.approx(0.000625, abs=1e-5)


def test_independence_factorization_4d():
    est = orthant([0.5, 1.0, -0.2, 0.0], np.eye(4), [0.0, 0.0, 0.0, 0.0])
    want = np.prod([1 - std_normal_cdf(-m) for m in (0.5, 1.0, -0.2, 0.0)])
    assert est.value == pytest.approx(want, abs=2e-4)


def test_block_diagonal_factorizes():
    corr = np.eye(4)
    corr[0, 1] = corr[1, 0] = 0.7
    corr[2, 3] = corr[3, 2] = -0.4
    mean = [0.3, -0.1, 0.8, 0.0]
    lower = [0.0, -0.5, 0.2, -1.0]
    full = orthant(mean, corr, lower)
    b1 = orthant(mean[:2], corr[:2, :2], lower[:2])
    b2 = orthant(mean[2:], corr[2:, 2:], lower[2:])
    assert full.value == pytest.approx(b1.value * b2.value, abs=3 * 5e-5)


def test_rectangle_bounds():
    problem = MvnProblem(
        mean=np.zeros(2),
        corr=np.array([[1.0, 0.5], [0.5, 1.0]]),
        lower=np.array([-1.0, -np.inf]),
        upper=np.array([1.0, 0.0]),
        rng_seed=0,
    )
    est = mvn_probability(problem)
    # symmetric in the second coordinate: P = P(-1 < Z1 < 1, Z2 < 0)
    mirrored = mvn_probability(
        MvnProblem(
            mean=np.zeros(2),
            corr=np.array([[1.0, -0.5], [-0.5, 1.0]]),
            lower=np.array([-1.0, 0.0]),
            upper=np.array([1.0, np.inf]),
            rng_seed=1,
        )
    )
    assert est.value == pytest.approx(mirrored.value, abs=2e-4)


def test_monotone_in_rectangle_size():
    corr = np.array([[1.0, 0.3], [0.3, 1.0]])
    previous = 0.0
    for bound in (1.5, 1.0, 0.5, 0.0, -0.5):
        est = orthant([0.0, 0.0], corr, [bound, bound], seed=7)
        assert est.value >= previous - 2 * 5e-5
        previous = est.value


def test_permutation_invariance():
    rng = np.random.default_rng(31)
    base_corr = np.array(
        [[1.0, 0.6, 0.48, 0.56],
         [0.6, 1.0, 0.76, 0.85],
         [0.48, 0.76, 1.0, 0.67],
         [0.56, 0.85, 0.67, 1.0]]
    )
    mean = np.array([3.24, 1.79, 3.21, 2.87])
    lower = np.full(4, 1.96)
    base = orthant(mean, base_corr, lower).value
    for _ in range(5):
        p = rng.permutation(4)
        est = orthant(mean[p], base_corr[np.ix_(p, p)], lower[p], seed=9)
        assert est.value == pytest.approx(base, abs=2 * 5e-5)


def test_high_correlation_limit():
    """As rho -> 1 the joint tail approaches the single marginal.  The
    true gap at rho=0.999 is about sqrt(1-rho^2)*pdf(bound)*0.4, so the
    bound must sit in the tail for a 1e-3 comparison to be meaningful."""
    rho = 0.999
    est = orthant([0.0, 0.0], [[1.0, rho], [rho, 1.0]], [2.5, 2.5])
    assert est.value == pytest.approx(1 - std_normal_cdf(2.5), abs=1e-3)
    tighter = orthant([0.0, 0.0], [[1.0, 0.99999], [0.99999, 1.0]], [0.5, 0.5])
    assert tighter.value == pytest.approx(1 - std_normal_cdf(0.5), abs=1e-3)


def test_degenerate_all_ones_matrix():
    # perfectly dependent endpoints: power equals the smallest marginal
    corr = np.ones((4, 4))
    mean = np.array([3.24, 1.79, 3.21, 2.87])
    est = orthant(mean, psd_repair(corr), np.full(4, 1.96))
    want = min(1 - std_normal_cdf(1.96 - m) for m in mean)
    assert est.value == pytest.approx(want, abs=1e-3)


def test_not_psd_raises_without_repair():
    m = np.array([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]])
    with pytest.raises(NotPSDError):
        orthant([0.0, 0.0, 0.0], m, [0.0, 0.0, 0.0])


def test_deterministic_given_seed():
    corr = np.array([[1.0, 0.5], [0.5, 1.0]])
    a = orthant([0.0, 0.0], corr, [0.0, 0.0], seed=42)
    b = orthant([0.0, 0.0], corr, [0.0, 0.0], seed=42)
    c = orthant([0.0, 0.0], corr, [0.0, 0.0], seed=43)
    assert a.value == b.value
    assert a.est_error == b.est_error
    assert a.value == pytest.approx(c.value, abs=2e-4)


def test_estimate_fields_in_range():
    est = orthant([0.0, 0.0, 0.0], np.eye(3), [0.0, 0.0, 0.0])
    assert 0.0 <= est.value <= 1.0
    assert est.est_error >= 0.0


def test_bad_bounds_rejected():
    with pytest.raises(DomainError):
        mvn_probability(
            MvnProblem(
                mean=np.zeros(2),
                corr=np.eye(2),
                lower=np.array([1.0, 0.0]),
                upper=np.array([0.0, np.inf]),
            )
        )
