"""Closed-form end-to-end metrics of the two-hop ALOHA relay link.

All formulas share one shape: an access factor, times ``exp`` of noise
and interference exponents built from the exposure integrals of
:mod:`aloharelay.quadrature`.  Success probability means: in one slot
the source transmits, the relay decodes hop 1, and the destination
decodes hop 2 (the relay forwards in the same slot over an orthogonal
resource, so the two hops face the same interferer field).  Mean local
delay is the expected number of slots until that joint event first
happens, averaged over interferer positions; because the positions are
frozen while access and fading resample each slot, it is the mean of
``1/P(success | positions)`` and is strictly larger than
``1/P(success)``.  Utility is the throughput-delay ratio
``p * success / delay``.

Two interference regimes are carried in parallel: correlated (the same
ALOHA coin drives an interferer on both hops, the exact model) and
uncorrelated (independent thinning per hop, the classical
approximation).  Correlated interference always helps the joint success
and hurts the delay less, which the tests assert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import DerivedParams, MacModel, Mode, RelayScenario, derive_params
from .quadrature import (
    IntegrandContext,
    QuadratureSpec,
    aloha_disk_integral,
    phi,
    phi_u,
    psi,
    psi_u,
)

__all__ = [
    "MetricReport",
    "success_prob_correlated",
    "success_prob_uncorrelated",
    "delay_correlated",
    "delay_uncorrelated",
    "delay_correlated_log",
    "delay_uncorrelated_log",
    "utility",
    "link_success_sr",
    "link_success_rd",
    "compute_metrics",
]

# exp() overflows IEEE doubles just above this; delay values beyond it
# are reported as inf, use the *_log variants when comparing them.
_EXP_OVERFLOW = 709.0


@dataclass(frozen=True)
class MetricReport:
    """One scenario's analytic metrics under one interference regime."""

    mode: Mode
    transmit_prob: float
    success_prob: float
    mean_local_delay: float
    utility: float
    link_success_sr: float
    link_success_rd: float
    source: str = "analytic"


def success_prob_correlated(mac: MacModel, derived: DerivedParams, psi_val: float) -> float:
    """p * exp(-density * p * psi - noise_exponent); 0 at p = 0."""
    p = mac.transmit_prob
    if p == 0.0:
        return 0.0
    return p * math.exp(-mac.density * p * psi_val - derived.noise_exponent)


def success_prob_uncorrelated(mac: MacModel, derived: DerivedParams, psi_u_val: float) -> float:
    """Product of the two independently thinned hop successes, times p.

    The relay-hop exposure enters through ``psi_u_val``; the
    destination-hop exposure has the closed disk-integral form.
    """
    p = mac.transmit_prob
    if p == 0.0:
        return 0.0
    dest_term = aloha_disk_integral(derived.theta_rd / derived.p_hat_r, derived.delta)
    exponent = -mac.density * p * (psi_u_val + dest_term) - derived.noise_exponent
    return p * math.exp(exponent)


def _guarded_exp(log_value: float) -> float:
    if log_value > _EXP_OVERFLOW:
        return math.inf
    return math.exp(log_value)


def delay_correlated_log(mac: MacModel, derived: DerivedParams, phi_val: float | None = None) -> float:
    """log of the correlated-interference mean local delay.

    Finite for every p in (0, 1]; at p = 1 with interferers present the
    delay itself is infinite (any interferer close enough to block the
    always-on link stays there forever), represented as ``inf``.
    """
    p = mac.transmit_prob
    if p == 0.0:
        raise ValueError("mean local delay is undefined at transmit_prob = 0")
    if p == 1.0:
        if mac.density > 0.0:
            return math.inf
        return derived.noise_exponent
    if phi_val is None:
        raise ValueError("phi_val is required for transmit_prob in (0, 1)")
    return -math.log(p) + mac.density * p * phi_val + derived.noise_exponent


def delay_correlated(mac: MacModel, derived: DerivedParams, phi_val: float | None = None) -> float:
    """(1/p) * exp(density * p * phi + noise_exponent); inf at p = 1 with interferers."""
    return _guarded_exp(delay_correlated_log(mac, derived, phi_val))


def delay_uncorrelated_log(mac: MacModel, derived: DerivedParams, phi_u_val: float | None = None) -> float:
    """log of the uncorrelated-interference mean local delay.

    On top of the relay-hop exposure ``phi_u_val`` the destination hop
    contributes a closed-form term with the characteristic
    ``(1-p)**(delta-1)`` blow-up.
    """
    p = mac.transmit_prob
    if p == 0.0:
        raise ValueError("mean local delay is undefined at transmit_prob = 0")
    if p == 1.0:
        if mac.density > 0.0:
            return math.inf
        return derived.noise_exponent
    if phi_u_val is None:
        raise ValueError("phi_u_val is required for transmit_prob in (0, 1)")
    dest_term = aloha_disk_integral(
        (1.0 - p) * derived.theta_rd / derived.p_hat_r, derived.delta
    ) / (1.0 - p)
    exponent = mac.density * p * (phi_u_val + dest_term) + derived.noise_exponent
    return -math.log(p) + exponent


def delay_uncorrelated(mac: MacModel, derived: DerivedParams, phi_u_val: float | None = None) -> float:
    """Uncorrelated-interference mean local delay; inf at p = 1 with interferers."""
    return _guarded_exp(delay_uncorrelated_log(mac, derived, phi_u_val))


def utility(transmit_prob: float, success_prob: float, mean_local_delay: float) -> float:
    """Throughput-delay utility p * success / delay; 0 when the delay is infinite."""
    if math.isinf(mean_local_delay):
        return 0.0
    return transmit_prob * success_prob / mean_local_delay


def link_success_sr(
    mac: MacModel,
    derived: DerivedParams,
    psi_u_val: float,
    corrected: bool = False,
) -> float:
    """Marginal source->relay decoding probability given a transmission.

    The default reproduces the reference expression with the exposure
    integral weighted by pi.  That weight is dimensionally suspect (the
    matching destination-hop expression and the probabilistic derivation
    both weight by the ALOHA probability p), so ``corrected=True``
    switches to the p weight; Monte Carlo agrees with the corrected
    variant, and the side-by-side validation uses it.
    """
    weight = mac.transmit_prob if corrected else math.pi
    exponent = (
        -derived.n_hat * derived.theta_sr / derived.p_hat_s
        - mac.density * weight * psi_u_val
    )
    return math.exp(exponent)


def link_success_rd(mac: MacModel, derived: DerivedParams) -> float:
    """Marginal relay->destination decoding probability given a transmission.

    The ALOHA probability enters linearly (thinning scales the exposure
    integral, not the coefficient inside the delta power).
    """
    exponent = (
        -derived.n_hat * derived.theta_rd / derived.p_hat_r
        - mac.density
        * mac.transmit_prob
        * aloha_disk_integral(derived.theta_rd / derived.p_hat_r, derived.delta)
    )
    return math.exp(exponent)


def compute_metrics(
    scenario: RelayScenario,
    mac: MacModel,
    mode: Mode,
    spec: QuadratureSpec | None = None,
    corrected_link_sr: bool = False,
) -> MetricReport:
    """Evaluate all analytic metrics of one scenario under one regime.

    The p = 0 boundary reports zero success and infinite delay; the
    p = 1 boundary reports the no-retry success and (with interferers)
    infinite delay, so sweeps over the full [0, 1] range never raise.
    """
    if spec is None:
        spec = QuadratureSpec()
    derived = derive_params(scenario)
    p = mac.transmit_prob
    ctx = IntegrandContext(derived, scenario.relay, scenario.destination)
    ctx_p = IntegrandContext(
        derived, scenario.relay, scenario.destination, transmit_prob=p if 0.0 < p < 1.0 else None
    )

    psi_u_val = psi_u(ctx, spec)
    if mode is Mode.CORRELATED:
        exposure = psi(ctx, spec)
        success = success_prob_correlated(mac, derived, exposure)
        if p == 0.0:
            delay = math.inf
        else:
            phi_val = phi(ctx_p, spec) if 0.0 < p < 1.0 else None
            delay = delay_correlated(mac, derived, phi_val)
    elif mode is Mode.UNCORRELATED:
        success = success_prob_uncorrelated(mac, derived, psi_u_val)
        if p == 0.0:
            delay = math.inf
        else:
            phi_u_val = phi_u(ctx_p, spec) if 0.0 < p < 1.0 else None
            delay = delay_uncorrelated(mac, derived, phi_u_val)
    else:
        raise ValueError(f"unsupported mode: {mode!r}")

    return MetricReport(
        mode=mode,
        transmit_prob=p,
        success_prob=success,
        mean_local_delay=delay,
        utility=utility(p, success, delay),
        link_success_sr=link_success_sr(mac, derived, psi_u_val, corrected=corrected_link_sr),
        link_success_rd=link_success_rd(mac, derived),
    )
