"""Monte Carlo machinery: sampling, conditional products, reproducibility."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aloharelay import (
    DelayMethod,
    Mode,
    SimConfig,
    conditional_success_prob,
    estimate_delay,
    estimate_link_success,
    estimate_success,
    sample_ppp,
    slot_success,
)
from refcase import B_REF, make_mac, make_scenario


def test_ppp_count_and_uniformity():
    density, radius, draws = 0.1, 30.0, 4000
    rng = np.random.default_rng(1234)
    counts = np.empty(draws)
    radius_sq_mean = np.empty(draws)
    for i in range(draws):
        pts = sample_ppp(density, radius, rng)
        counts[i] = len(pts)
        assert pts.shape[1] == 2
        r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
        assert np.all(r2 <= radius * radius + 1e-9)
        radius_sq_mean[i] = r2.mean() if len(pts) else np.nan

    expected = density * math.pi * radius * radius
    se_count = counts.std(ddof=1) / math.sqrt(draws)
    assert abs(counts.mean() - expected) <= 3.0 * se_count
    # Poisson counts: variance equals the mean
    assert counts.var(ddof=1) / counts.mean() == pytest.approx(1.0, abs=0.1)
    # uniform in the disk: E[r^2] = R^2 / 2
    r2_samples = radius_sq_mean[~np.isnan(radius_sq_mean)]
    se_r2 = r2_samples.std(ddof=1) / math.sqrt(len(r2_samples))
    assert abs(r2_samples.mean() - radius * radius / 2.0) <= 3.0 * se_r2


def test_two_interferer_conditional_product_by_hand():
    scenario = make_scenario()
    p = 0.37
    mac = make_mac(p=p, density=0.1)
    pts = np.array([[0.5, 0.0], [-0.3, 0.4]])

    # both hop coefficients are 1 at the reference point
    def gain(px, py, cx, cy):
        return ((px - cx) ** 2 + (py - cy) ** 2) ** -2.0

    q_r = [1.0 / (1.0 + gain(x, y, 1.0, 0.0)) for x, y in pts]
    q_d = [1.0 / (1.0 + gain(x, y, 0.0, 0.0)) for x, y in pts]

    expected_ic = p * math.exp(-B_REF)
    for qr, qd in zip(q_r, q_d):
        expected_ic *= p * qr * qd + (1.0 - p)
    assert conditional_success_prob(pts, scenario, mac, Mode.CORRELATED) == pytest.approx(
        expected_ic, rel=1e-12
    )

    dest_pts = np.array([[1.3, -0.2]])
    q_d2 = 1.0 / (1.0 + gain(1.3, -0.2, 0.0, 0.0))
    expected_iu = p * math.exp(-B_REF)
    for qr in q_r:
        expected_iu *= p * qr + (1.0 - p)
    expected_iu *= p * q_d2 + (1.0 - p)
    assert conditional_success_prob(
        pts, scenario, mac, Mode.UNCORRELATED, dest_points=dest_pts
    ) == pytest.approx(expected_iu, rel=1e-12)

    with pytest.raises(ValueError):
        conditional_success_prob(pts, scenario, mac, Mode.CORRELATED, dest_points=dest_pts)


def test_zero_density_estimates_are_exact_or_tight():
    scenario = make_scenario()
    mac = make_mac(p=0.5, density=0.0)
    sim = SimConfig(trials=2000, slots_per_trial=10, seed=3)
    target = 0.5 * math.exp(-B_REF)

    est = estimate_success(scenario, mac, sim, Mode.CORRELATED)
    assert est.std_error > 0.0
    assert abs(est.mean - target) <= 3.0 * est.std_error

    # with no interferers the conditional success is deterministic, so the
    # semi-analytic delay estimator has zero variance and the exact mean
    delay = estimate_delay(scenario, mac, sim, Mode.CORRELATED)
    assert delay.std_error <= 1e-15  # identical samples up to float rounding
    assert delay.mean == pytest.approx(2.0 * math.exp(B_REF), rel=1e-12)


def test_modes_share_primary_draws_without_interferers():
    # the uncorrelated regime consumes its extra randomness from a separate
    # substream, so with an empty field both modes see identical draws
    scenario = make_scenario()
    mac = make_mac(p=0.5, density=0.0)
    sim = SimConfig(trials=400, slots_per_trial=10, seed=11)
    ic = estimate_success(scenario, mac, sim, Mode.CORRELATED)
    iu = estimate_success(scenario, mac, sim, Mode.UNCORRELATED)
    assert ic.mean == iu.mean
    assert ic.std_error == iu.std_error


def test_bit_identical_across_worker_counts():
    scenario = make_scenario()
    mac = make_mac(p=0.5, density=0.1)
    kwargs = dict(trials=300, slots_per_trial=5, sim_radius=20.0, seed=5)
    serial = estimate_success(scenario, mac, SimConfig(**kwargs, workers=1), Mode.UNCORRELATED)
    threaded = estimate_success(scenario, mac, SimConfig(**kwargs, workers=4), Mode.UNCORRELATED)
    assert serial.mean == threaded.mean
    assert serial.std_error == threaded.std_error

    d1 = estimate_delay(scenario, mac, SimConfig(**kwargs, workers=1), Mode.CORRELATED)
    d4 = estimate_delay(scenario, mac, SimConfig(**kwargs, workers=4), Mode.CORRELATED)
    assert d1.mean == d4.mean


def test_reruns_reproduce_and_seeds_differ():
    scenario = make_scenario()
    mac = make_mac(p=0.5, density=0.1)
    sim_a = SimConfig(trials=200, slots_per_trial=5, sim_radius=20.0, seed=21)
    sim_b = SimConfig(trials=200, slots_per_trial=5, sim_radius=20.0, seed=22)
    first = estimate_success(scenario, mac, sim_a, Mode.CORRELATED)
    again = estimate_success(scenario, mac, sim_a, Mode.CORRELATED)
    other = estimate_success(scenario, mac, sim_b, Mode.CORRELATED)
    assert first.mean == again.mean
    assert first.mean != other.mean


def test_radius_doubling_is_within_noise():
    # fields on the doubled disk restricted to the original disk are valid
    # original-disk fields, so pairing the two estimates cancels everything
    # except the truncation tail, which must drown in one standard error
    scenario = make_scenario()
    mac = make_mac(p=0.5, density=0.1)
    trials = 800
    inner, outer = np.empty(trials), np.empty(trials)
    for i in range(trials):
        rng = np.random.default_rng((97, i))
        pts60 = sample_ppp(mac.density, 60.0, rng)
        mask = pts60[:, 0] ** 2 + pts60[:, 1] ** 2 <= 30.0 ** 2
        outer[i] = conditional_success_prob(pts60, scenario, mac, Mode.CORRELATED)
        inner[i] = conditional_success_prob(pts60[mask], scenario, mac, Mode.CORRELATED)
    se = inner.std(ddof=1) / math.sqrt(trials)
    assert abs(outer.mean() - inner.mean()) < se
    # more interferers can only hurt, field by field
    assert np.all(outer <= inner)


def test_empirical_delay_matches_geometric_mean():
    scenario = make_scenario()
    mac = make_mac(p=0.5, density=0.0)
    sim = SimConfig(trials=2000, slots_per_trial=1, seed=9)
    est = estimate_delay(scenario, mac, sim, Mode.CORRELATED, DelayMethod.EMPIRICAL)
    target = 2.0 * math.exp(B_REF)
    assert est.censored_fraction == 0.0
    assert abs(est.mean - target) <= 3.0 * est.std_error


def test_empirical_delay_censors_at_cap():
    scenario = make_scenario()
    mac = make_mac(p=0.5, density=0.0)
    sim = SimConfig(trials=2000, slots_per_trial=1, seed=9, empirical_slot_cap=20)
    est = estimate_delay(scenario, mac, sim, Mode.CORRELATED, DelayMethod.EMPIRICAL)
    assert est.censored_fraction > 0.0
    # censoring clips the tail, so the capped mean cannot exceed the cap
    assert est.mean <= 20.0


def test_delay_rejects_zero_transmit_prob():
    scenario = make_scenario()
    sim = SimConfig(trials=10, slots_per_trial=1, seed=0)
    with pytest.raises(ValueError):
        estimate_delay(scenario, make_mac(p=0.0, density=0.1), sim, Mode.CORRELATED)


def test_link_marginals_do_not_depend_on_mode():
    scenario = make_scenario()
    mac = make_mac(p=0.5, density=0.1)
    sim = SimConfig(trials=1500, slots_per_trial=10, sim_radius=30.0, seed=13)
    sr_ic, rd_ic = estimate_link_success(scenario, mac, sim, Mode.CORRELATED)
    sr_iu, rd_iu = estimate_link_success(scenario, mac, sim, Mode.UNCORRELATED)
    # relay-side flags consume identical draws in both modes
    assert sr_ic.mean == sr_iu.mean
    # destination-side marginals agree statistically
    gap_se = math.hypot(rd_ic.std_error, rd_iu.std_error)
    assert abs(rd_ic.mean - rd_iu.mean) <= 3.0 * gap_se


def test_slot_success_returns_flags():
    scenario = make_scenario()
    rng = np.random.default_rng(0)
    flags = slot_success(np.empty((0, 2)), scenario, make_mac(1.0, 0.0), Mode.CORRELATED, rng)
    assert len(flags) == 3
    assert flags[2] is True  # p = 1 always transmits


def test_sim_config_validation():
    with pytest.raises(ValueError):
        SimConfig(trials=0)
    with pytest.raises(ValueError):
        SimConfig(slots_per_trial=0)
    with pytest.raises(ValueError):
        SimConfig(sim_radius=0.0)
    with pytest.raises(ValueError):
        SimConfig(workers=0)


@st.composite
def point_sets(draw):
    n = draw(st.integers(min_value=0, max_value=6))
    coords = draw(
        st.lists(
            st.tuples(
                st.floats(min_value=-5.0, max_value=5.0),
                st.floats(min_value=-5.0, max_value=5.0),
            ),
            min_size=n,
            max_size=n,
        )
    )
    return np.array(coords, dtype=float).reshape(n, 2)


@given(pts=point_sets(), p=st.floats(min_value=0.05, max_value=0.95))
@settings(max_examples=80, deadline=None)
def test_conditional_product_bounds_and_ordering(pts, p):
    # per interferer, one shared coin beats two independent coins:
    # p q1 q2 + 1 - p >= (p q1 + 1 - p)(p q2 + 1 - p), so the correlated
    # conditional success dominates; both sit in (0, p e^-B]
    scenario = make_scenario()
    mac = make_mac(p=p, density=0.1)
    ic = conditional_success_prob(pts, scenario, mac, Mode.CORRELATED)
    iu = conditional_success_prob(pts, scenario, mac, Mode.UNCORRELATED)
    ceiling = p * math.exp(-B_REF)
    assert 0.0 < iu <= ic <= ceiling * (1.0 + 1e-12)
