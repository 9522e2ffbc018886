"""Core geometry, radio parameters and normalized derived quantities.

The package analyzes a three-node ALOHA relay link (source -> relay ->
destination) embedded in a plane populated by Poisson-distributed
interferers.  Every transmitter in the interferer field uses power
``power_interferer``, so all analytic expressions are written in units
normalized by that power.  This module holds the plain-data types shared
by the quadrature, metrics, optimizer and simulator modules, plus the
bookkeeping that turns a physical scenario into normalized parameters.

Conventions:

* powers are linear (not dB); the CLI converts dB at the boundary,
* ``path_loss_exponent`` (alpha) must exceed 2 so interference integrals
  over the plane converge,
* fading is unit-mean exponential (Rayleigh amplitude) everywhere.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

__all__ = [
    "Point2",
    "RelayScenario",
    "DerivedParams",
    "MacModel",
    "Mode",
    "Objective",
    "path_loss",
    "stability_constant",
    "derive_params",
]


class Mode(enum.Enum):
    """Correlation regime of the interference seen by the two hops.

    CORRELATED: both hops of a packet are attacked by the same set of
    active interferers (one ALOHA coin per interferer per slot).
    UNCORRELATED: each hop sees an independently thinned interferer set
    (fresh coins per hop), the classical independence approximation.
    """

    CORRELATED = "ic"
    UNCORRELATED = "iu"


class Objective(enum.Enum):
    """Optimization target for the ALOHA transmit probability."""

    MIN_DELAY = "min-delay"
    MAX_UTILITY = "max-utility"


@dataclass(frozen=True)
class Point2:
    """A point in the plane, in the same length unit as 1/intensity^0.5."""

    x: float
    y: float

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class RelayScenario:
    """Fixed geometry and radio parameters of the three-node link.

    Powers are linear and share one unit; ``noise_power`` is in the same
    unit.  ``sinr_threshold`` is the SINR decoding threshold (linear).
    """

    source: Point2
    relay: Point2
    destination: Point2
    power_source: float
    power_relay: float
    power_interferer: float
    noise_power: float
    sinr_threshold: float
    path_loss_exponent: float

    def __post_init__(self) -> None:
        for name in ("power_source", "power_relay", "power_interferer"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.noise_power < 0.0:
            raise ValueError("noise_power must be nonnegative")
        if self.sinr_threshold < 0.0:
            raise ValueError("sinr_threshold must be nonnegative")
        if self.path_loss_exponent <= 2.0:
            raise ValueError(
                "path_loss_exponent must exceed 2 for planar interference "
                "integrals to converge"
            )
        if self.source.distance_to(self.relay) == 0.0:
            raise ValueError("source and relay must be distinct points")
        if self.relay.distance_to(self.destination) == 0.0:
            raise ValueError("relay and destination must be distinct points")


@dataclass(frozen=True)
class MacModel:
    """Slotted-ALOHA medium access: every node transmits w.p. ``transmit_prob``.

    ``density`` is the intensity (nodes per unit area) of the interferer
    field.  ``transmit_prob = 0`` is accepted so success-probability
    expressions can be evaluated at the no-access boundary; delay
    expressions reject it because the mean delay diverges there.
    """

    transmit_prob: float
    density: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.transmit_prob <= 1.0:
            raise ValueError("transmit_prob must lie in [0, 1]")
        if self.density < 0.0:
            raise ValueError("density must be nonnegative")


@dataclass(frozen=True)
class DerivedParams:
    """Normalized quantities every closed-form expression is written in.

    All powers are divided by the interferer power: ``p_hat_s``,
    ``p_hat_r`` and ``n_hat`` are the source power, relay power and noise
    power in interferer-power units.  ``theta_sr`` and ``theta_rd`` fold
    the hop distances into the SINR threshold
    (``theta * distance**alpha``), so a hop succeeds when the fade times
    normalized power exceeds ``theta_xy * (n_hat + interference)``.
    ``noise_exponent`` is the noise term
    ``n_hat * (theta_sr / p_hat_s + theta_rd / p_hat_r)`` that both hops
    together contribute to every success exponent.  ``delta = 2 / alpha``
    and ``stability = 1 / sinc(delta)`` appear in all closed-form disk
    integrals of ALOHA interference.
    """

    p_hat_s: float
    p_hat_r: float
    n_hat: float
    theta_sr: float
    theta_rd: float
    alpha: float
    delta: float
    stability: float
    noise_exponent: float


def path_loss(a: Point2, b: Point2, alpha: float) -> float:
    """Power path gain ``distance**-alpha`` between two points.

    Returns ``inf`` for coincident points; scenario validation keeps the
    three link nodes distinct so this only happens for degenerate
    interferer placements, where an infinite gain is the honest limit.
    """
    d = a.distance_to(b)
    if d == 0.0:
        return math.inf
    return d**-alpha


def stability_constant(delta: float) -> float:
    """``1 / sinc(delta) = pi * delta / sin(pi * delta)`` for delta in (0, 1).

    This is the constant relating a plane integral of the ALOHA-thinned
    interference kernel to ``pi * t**delta``; it tends to 1 as
    ``delta -> 0`` and diverges as ``delta -> 1`` (alpha -> 2).
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return math.pi * delta / math.sin(math.pi * delta)


def derive_params(scenario: RelayScenario) -> DerivedParams:
    """Normalize a physical scenario into the parameters of the closed forms."""
    p_hat_s = scenario.power_source / scenario.power_interferer
    p_hat_r = scenario.power_relay / scenario.power_interferer
    n_hat = scenario.noise_power / scenario.power_interferer
    alpha = scenario.path_loss_exponent
    d_sr = scenario.source.distance_to(scenario.relay)
    d_rd = scenario.relay.distance_to(scenario.destination)
    theta_sr = scenario.sinr_threshold * d_sr**alpha
    theta_rd = scenario.sinr_threshold * d_rd**alpha
    delta = 2.0 / alpha
    noise_exponent = n_hat * (theta_sr / p_hat_s + theta_rd / p_hat_r)
    return DerivedParams(
        p_hat_s=p_hat_s,
        p_hat_r=p_hat_r,
        n_hat=n_hat,
        theta_sr=theta_sr,
        theta_rd=theta_rd,
        alpha=alpha,
        delta=delta,
        stability=stability_constant(delta),
        noise_exponent=noise_exponent,
    )
