"""Adaptive planar quadrature against brute-force sums and closed forms.

The two-center exposure integrals have no closed form, so their oracle
is the midpoint Riemann sum frozen in ``riemann_oracle.py`` (radius-30
truncation loses ~1e-3 relative mass, and only mass: the converged
adaptive value must sit slightly *above* the frozen sum).  The
single-center family has exact closed forms which must match to
quadrature tolerance.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aloharelay import (
    IntegrandContext,
    Point2,
    QuadratureAccuracyError,
    QuadratureSpec,
    aloha_disk_integral,
    derive_params,
    phi,
    phi_bundle,
    phi_dp,
    phi_dp2,
    phi_u,
    phi_u_dp,
    phi_u_dp2,
    planar_integral,
    psi,
    psi_u,
    stability_constant,
)
from refcase import make_scenario
from riemann_oracle import (
    PHI_MIDPOINT_P05_RIEMANN,
    PSI_MIDPOINT_RIEMANN,
)

TIGHT = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-13)


def _ctx(scenario, p=None):
    return IntegrandContext(
        derive_params(scenario), scenario.relay, scenario.destination, transmit_prob=p
    )


def test_psi_matches_riemann_oracle():
    value = psi(_ctx(make_scenario()), TIGHT)
    # converged integral covers the tail the radius-30 oracle truncates
    assert value > PSI_MIDPOINT_RIEMANN
    assert value == pytest.approx(PSI_MIDPOINT_RIEMANN, rel=1.2e-3)


def test_phi_matches_riemann_oracle():
    value = phi(_ctx(make_scenario(), p=0.5), TIGHT)
    assert value > PHI_MIDPOINT_P05_RIEMANN
    assert value == pytest.approx(PHI_MIDPOINT_P05_RIEMANN, rel=1.2e-3)


def test_psi_translation_invariance():
    # shifting every node by the same vector changes nothing: same hop
    # distances, same integral, only the bump locations move
    from aloharelay import RelayScenario

    base_scenario = make_scenario()
    base = psi(_ctx(base_scenario), TIGHT)
    dx, dy = -0.5, -2.0
    shifted_scenario = RelayScenario(
        source=Point2(2.0 + dx, dy),
        relay=Point2(1.0 + dx, dy),
        destination=Point2(dx, dy),
        power_source=base_scenario.power_source,
        power_relay=base_scenario.power_relay,
        power_interferer=base_scenario.power_interferer,
        noise_power=base_scenario.noise_power,
        sinr_threshold=base_scenario.sinr_threshold,
        path_loss_exponent=base_scenario.path_loss_exponent,
    )
    assert psi(_ctx(shifted_scenario), TIGHT) == pytest.approx(base, rel=1e-9)


@pytest.mark.parametrize("alpha", [2.5, 3.0, 4.0, 5.0])
@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
def test_psi_u_closed_form(alpha, theta):
    scenario = make_scenario(theta=theta, alpha=alpha)
    derived = derive_params(scenario)
    coef = derived.theta_sr / derived.p_hat_s
    expected = math.pi * stability_constant(derived.delta) * coef ** derived.delta
    assert psi_u(_ctx(scenario), TIGHT) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("alpha", [3.0, 4.0, 5.0])
@pytest.mark.parametrize("p", [0.2, 0.5, 0.9])
def test_phi_u_family_closed_forms(alpha, p):
    scenario = make_scenario(alpha=alpha)
    derived = derive_params(scenario)
    d = derived.delta
    coef = derived.theta_sr / derived.p_hat_s
    lead = math.pi * stability_constant(d) * coef ** d
    ctx = _ctx(scenario, p=p)
    assert phi_u(ctx, TIGHT) == pytest.approx(lead * (1 - p) ** (d - 1), rel=1e-9)
    assert phi_u_dp(ctx, TIGHT) == pytest.approx(
        lead * (1 - d) * (1 - p) ** (d - 2), rel=1e-9
    )
    assert phi_u_dp2(ctx, TIGHT) == pytest.approx(
        lead * (1 - d) * (2 - d) * (1 - p) ** (d - 3), rel=1e-9
    )


@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
def test_phi_dp_matches_finite_difference(p):
    scenario = make_scenario()
    step = 1e-4
    fd = (
        phi(_ctx(scenario, p=p + step), TIGHT) - phi(_ctx(scenario, p=p - step), TIGHT)
    ) / (2 * step)
    assert phi_dp(_ctx(scenario, p=p), TIGHT) == pytest.approx(fd, rel=1e-3)


def test_phi_dp2_matches_finite_difference():
    scenario = make_scenario()
    p, step = 0.5, 1e-4
    fd = (
        phi_dp(_ctx(scenario, p=p + step), TIGHT)
        - phi_dp(_ctx(scenario, p=p - step), TIGHT)
    ) / (2 * step)
    assert phi_dp2(_ctx(scenario, p=p), TIGHT) == pytest.approx(fd, rel=1e-2)


def test_phi_bundle_matches_separate_calls():
    ctx = _ctx(make_scenario(), p=0.37)
    bundle = phi_bundle(ctx, TIGHT)
    assert bundle[0] == pytest.approx(phi(ctx, TIGHT), rel=5e-9)
    assert bundle[1] == pytest.approx(phi_dp(ctx, TIGHT), rel=5e-9)
    assert bundle[2] == pytest.approx(phi_dp2(ctx, TIGHT), rel=5e-9)


def test_phi_approaches_psi_as_p_vanishes():
    scenario = make_scenario()
    assert phi(_ctx(scenario, p=1e-10), TIGHT) == pytest.approx(
        psi(_ctx(scenario), TIGHT), rel=1e-8
    )


def test_phi_strictly_increasing_in_p():
    scenario = make_scenario()
    values = [phi(_ctx(scenario, p=p), TIGHT) for p in (0.1, 0.4, 0.7, 0.95)]
    assert values == sorted(values)
    assert values[0] < values[-1]


def test_psi_collapses_to_single_center_when_one_hop_is_trivial():
    # with an enormous relay power the destination-side bump vanishes and
    # the two-center integral must collapse to the single-center closed form
    scenario = make_scenario(power_r=1e12)
    derived = derive_params(scenario)
    coef = derived.theta_sr / derived.p_hat_s
    assert psi(_ctx(scenario), TIGHT) == pytest.approx(
        aloha_disk_integral(coef, derived.delta), rel=1e-5
    )


def test_aloha_disk_integral_hand_value():
    # pi * C(1/2) * sqrt(2) at threshold-over-power 2, delta 1/2
    assert aloha_disk_integral(2.0, 0.5) == pytest.approx(
        math.pi * (math.pi / 2.0) * math.sqrt(2.0), rel=1e-12
    )
    assert aloha_disk_integral(0.0, 0.5) == 0.0
    with pytest.raises(ValueError):
        aloha_disk_integral(-1.0, 0.5)
    with pytest.raises(ValueError):
        aloha_disk_integral(1.0, 1.0)


@pytest.mark.parametrize("p", [None, 0.0, 1.0])
def test_phi_family_requires_interior_transmit_prob(p):
    ctx = _ctx(make_scenario(), p=p)
    for fn in (phi, phi_dp, phi_dp2, phi_u, phi_u_dp, phi_u_dp2):
        with pytest.raises(ValueError):
            fn(ctx, TIGHT)


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=-1.0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_subdivisions=0)
    with pytest.raises(ValueError):
        QuadratureSpec(truncation_radius=0.0)


def test_accuracy_error_carries_estimate_and_bound():
    starved = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15, max_subdivisions=64)
    with pytest.raises(QuadratureAccuracyError) as excinfo:
        psi(_ctx(make_scenario()), starved)
    err = excinfo.value
    assert np.all(np.isfinite(err.estimate))
    assert np.all(err.error_bound > 0.0)


def test_planar_integral_rejects_slow_decay():
    with pytest.raises(ValueError):
        planar_integral(lambda x, y: x * 0.0, (0.0, 0.0), 2.0, TIGHT)


def test_planar_integral_gaussian_hand_value():
    # a generic, package-independent integrand: plane integral of a unit
    # Gaussian bump is exactly pi
    def bump(x, y):
        return np.exp(-(x * x + y * y))

    value = planar_integral(bump, (0.0, 0.0), 4.0, TIGHT, features=((0.0, 1.0),))
    assert value[0] == pytest.approx(math.pi, rel=1e-9)


@given(stretch=st.floats(min_value=0.5, max_value=2.0))
@settings(max_examples=15, deadline=None)
def test_psi_scale_covariance(stretch):
    # scaling all node positions by s multiplies the exposure integral by
    # s**2: the hop thresholds grow like s**alpha, which exactly cancels
    # the path-loss change at the stretched interferer position
    base = psi(_ctx(make_scenario()), QuadratureSpec(rel_tol=1e-8, abs_tol=1e-11))
    scaled_scenario = make_scenario(
        source=Point2(2.0 * stretch, 0.0),
        relay_x=stretch,
    )
    scaled = psi(_ctx(scaled_scenario), QuadratureSpec(rel_tol=1e-8, abs_tol=1e-11))
    assert scaled == pytest.approx(base * stretch ** 2, rel=1e-6)
