import numpy as np
import pytest
from scipy.stats import kstest

from lrcorr.errors import DomainError, InsufficientEventsError
from lrcorr.simulate import (
    ScenarioConfig,
    inv_piecewise_exp,
    run_study,
    simulate_trial,
)


def test_inverse_single_segment_unit_hazard():
    lam = 0.4
    assert inv_piecewise_exp(np.exp(-1.0), ((0.0, lam),)) == pytest.approx(1.0 / lam)


def test_inverse_two_piece_hand_value():
    segments = ((0.0, 0.007), (730.5, 0.012))
    u = np.exp(-(0.007 * 730.5 + 0.012 * 100.0))
    assert inv_piecewise_exp(u, segments) == pytest.approx(830.5, rel=1e-12)


def test_inverse_boundary_behavior():
    segments = ((0.0, 2.0),)
    assert inv_piecewise_exp(1.0 - 1e-12, segments) == pytest.approx(0.0, abs=1e-9)
    assert inv_piecewise_exp(1e-300, segments) > 100.0


def test_inverse_domain_checks():
    with pytest.raises(DomainError):
        inv_piecewise_exp(0.0, ((0.0, 1.0),))
    with pytest.raises(DomainError):
        inv_piecewise_exp(1.0, ((0.0, 1.0),))
    with pytest.raises(DomainError):
        inv_piecewise_exp(0.5, ((0.0, -1.0),))
    with pytest.raises(DomainError):
        inv_piecewise_exp(0.5, ((1.0, 1.0),))


def test_inverse_matches_cumulative_hazard():
    rng = np.random.default_rng(51)
    segments = ((0.0, 0.5), (1.0, 2.0), (3.0, 0.25))

    def cumhaz(t):
        knots = [0.0, 1.0, 3.0]
        rates = [0.5, 2.0, 0.25]
        total = 0.0
        for k, rate in enumerate(rates):
            lo = knots[k]
            hi = knots[k + 1] if k + 1 < len(knots) else np.inf
            total += rate * max(0.0, min(t, hi) - lo)
        return total

    for u in rng.random(50):
        t = inv_piecewise_exp(u, segments)
        assert cumhaz(t) == pytest.approx(-np.log(u), rel=1e-10)


def test_event_time_margins_follow_the_piecewise_law():
    # T = Lambda^{-1}(-ln(1-U)) for uniform U reproduces the distribution
    rng = np.random.default_rng(52)
    segments = ((0.0, 0.3), (2.0, 1.1))
    u = rng.random(100000)
    times = np.array([inv_piecewise_exp(1.0 - v, segments) for v in u])

    def cdf(t):
        t = np.asarray(t)
        cum = np.where(t < 2.0, 0.3 * t, 0.3 * 2.0 + 1.1 * (t - 2.0))
        return 1.0 - np.exp(-cum)

    assert kstest(times, cdf).pvalue > 0.01


def test_scenario_defaults_and_target_events():
    cfg = ScenarioConfig()
    assert cfg.n_obs == 4000
    assert cfg.copula == "gaussian"
    assert cfg.target_events == 280
    assert ScenarioConfig(n_obs=1000, censor_target=0.93).target_events == 70
    # round half up
    assert ScenarioConfig(n_obs=10, censor_target=0.25).target_events == 8


def test_scenario_validation():
    with pytest.raises(DomainError):
        ScenarioConfig(n_obs=7)
    with pytest.raises(DomainError):
        ScenarioConfig(copula="vine")
    with pytest.raises(DomainError):
        ScenarioConfig(hr=0.0)
    with pytest.raises(DomainError):
        ScenarioConfig(censor_target=1.0)
    with pytest.raises(DomainError):
        ScenarioConfig(hazards=(((0.0, 0.017),),))
    with pytest.raises(DomainError):
        ScenarioConfig(hazards=(((0.5, 0.017),), ((0.0, 0.009),)))


def test_scenario_dict_round_trip():
    cfg = ScenarioConfig(theta=0.5, composite=True, seed=9)
    assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(DomainError):
        ScenarioConfig.from_dict({"n_obs": 100, "bogus": 1})


def test_trial_stops_at_exactly_k_primary_events():
    cfg = ScenarioConfig(n_obs=1000, censor_target=0.93, seed=3)
    rng = np.random.default_rng(3)
    data = simulate_trial(cfg, rng)
    assert data.status[:, 0].sum() == 70
    assert data.n == 1000
    assert set(data.endpoint_names) == {"primary", "secondary"}


def test_event_count_across_replicates_and_thetas():
    for seed, theta in ((1, 0.0), (2, 0.8)):
        cfg = ScenarioConfig(n_obs=400, theta=theta, censor_target=0.8, seed=seed)
        data = simulate_trial(cfg, np.random.default_rng(seed))
        assert data.status[:, 0].sum() == 80


def test_censoring_is_administrative():
    cfg = ScenarioConfig(n_obs=600, censor_target=0.8, seed=4)
    data = simulate_trial(cfg, np.random.default_rng(4))
    # a censored subject's time is its follow-up, bounded by the window
    assert data.time.min() >= 0.0
    censored = data.status == 0
    assert np.all(data.time[censored] >= 0.0)
    # both endpoints share the stopping date, so each row's censoring
    # times agree: a subject censored on both endpoints shows one time
    both = censored.all(axis=1)
    assert np.allclose(data.time[both, 0], data.time[both, 1])


def test_unenrolled_subjects_kept_as_zero_time_censored():
    # hot hazards stop the trial before accrual completes
    cfg = ScenarioConfig(
        n_obs=400,
        hazards=(((0.0, 5.0),), ((0.0, 5.0),)),
        accrual_years=10.0,
        censor_target=0.5,
        seed=5,
    )
    data = simulate_trial(cfg, np.random.default_rng(5))
    zero_rows = (data.time[:, 0] == 0.0) & (data.status[:, 0] == 0)
    assert zero_rows.sum() > 0
    assert data.status[:, 0].sum() == 200


def test_composite_event_is_min_construction():
    cfg = ScenarioConfig(n_obs=800, theta=0.5, composite=True, censor_target=0.8, seed=6)
    data = simulate_trial(cfg, np.random.default_rng(6))
    has_secondary_event = data.status[:, 1] == 1
    assert np.all(data.status[has_secondary_event, 0] == 1)
    assert np.all(
        data.time[has_secondary_event, 0] <= data.time[has_secondary_event, 1] + 1e-12
    )
    shared = has_secondary_event & (data.status[:, 0] == 1)
    assert np.any(np.isclose(data.time[shared, 0], data.time[shared, 1]))


def test_composite_raises_event_count():
    base = ScenarioConfig(n_obs=800, theta=0.5, censor_target=0.8, seed=7)
    comp = ScenarioConfig(
        n_obs=800, theta=0.5, censor_target=0.8, composite=True, seed=7
    )
    d0 = simulate_trial(base, np.random.default_rng(7))
    d1 = simulate_trial(comp, np.random.default_rng(7))
    # the stop rule fixes primary events; the secondary is unchanged in
    # law but the composite primary now fires at min(T1, T2)
    assert d0.status[:, 0].sum() == d1.status[:, 0].sum() == 160
    assert d1.time[:, 0].max() <= d0.time[:, 0].max() + 1e-9


def test_hr_one_gives_balanced_event_counts():
    k = 70
    diffs = []
    for r in range(20):
        cfg = ScenarioConfig(n_obs=1000, hr=1.0, censor_target=0.93, seed=100 + r)
        data = simulate_trial(cfg, np.random.default_rng(100 + r))
        d1 = int(data.status[data.arm == 1, 0].sum())
        d0 = int(data.status[data.arm == 0, 0].sum())
        assert d0 + d1 == k
        diffs.append(d1 - d0)
    diffs = np.array(diffs)
    assert np.all(np.abs(diffs) <= 6 * np.sqrt(k))
    assert np.ptp(diffs) > 0


def test_protective_hr_shifts_events_to_control():
    cfg = ScenarioConfig(n_obs=4000, hr=0.5, censor_target=0.8, seed=8)
    data = simulate_trial(cfg, np.random.default_rng(8))
    d1 = data.status[data.arm == 1, 0].sum()
    d0 = data.status[data.arm == 0, 0].sum()
    assert d1 < d0


def test_insufficient_events_raises():
    cfg = ScenarioConfig(n_obs=10, censor_target=0.99, n_sim=3)
    with pytest.raises(InsufficientEventsError):
        run_study(cfg)


def test_run_study_deterministic_and_jobs_invariant():
    cfg = ScenarioConfig(n_obs=400, theta=0.5, censor_target=0.8, n_sim=30, seed=12)
    a = run_study(cfg, jobs=1)
    b = run_study(cfg, jobs=1)
    c = run_study(cfg, jobs=4)
    assert a == b == c


def test_run_study_result_invariants():
    cfg = ScenarioConfig(n_obs=400, theta=0.5, censor_target=0.8, n_sim=60, seed=13)
    result = run_study(cfg)
    assert result.bias == result.rho_bar - result.rho_tilde
    assert result.pct_2_5 <= result.rho_bar <= result.pct_97_5
    assert result.n_sim_effective == 60
    assert -1.0 <= result.rho_tilde <= 1.0


def test_run_study_counts_degenerate_replicates_out():
    # a tiny trial often produces no secondary events at the stop date
    cfg = ScenarioConfig(
        n_obs=8,
        censor_target=0.5,
        hazards=(((0.0, 0.5),), ((0.0, 0.01),)),
        n_sim=60,
        seed=14,
    )
    result = run_study(cfg)
    assert result.n_sim_effective < 60
    assert result.n_sim_effective >= 2


def test_censoring_dilutes_correlation():
    # the strict ordering of the replicate z correlations at two
    # censoring levels, gaussian theta 0.8
    kwargs = dict(n_obs=2000, theta=0.8, n_sim=2000, seed=15)
    loose = run_study(ScenarioConfig(censor_target=0.80, **kwargs), jobs=8)
    tight = run_study(ScenarioConfig(censor_target=0.93, **kwargs), jobs=8)
    assert tight.rho_tilde < loose.rho_tilde


def test_seed_changes_draws():
    cfg1 = ScenarioConfig(n_obs=400, n_sim=10, seed=1)
    cfg2 = ScenarioConfig(n_obs=400, n_sim=10, seed=2)
    assert run_study(cfg1) != run_study(cfg2)
