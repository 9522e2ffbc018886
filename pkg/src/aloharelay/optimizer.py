"""Optimal ALOHA transmit probability by safeguarded Newton-Raphson.

Both optimization targets reduce to a one-dimensional root problem: the
stationarity residual

    Lambda(p) = k/(density * p) - (exposure terms and their p-slopes)

with k = 1 for minimizing the mean local delay and k = 3 for maximizing
the throughput-delay utility (the log-objective differentiates to
exactly this form).  Lambda is strictly decreasing on (0, 1): the 1/p
term falls and every exposure term grows with p.  So the optimum is the
unique sign change, found by a Newton iteration that never leaves a
maintained sign-change bracket; whenever a Newton step would exit the
bracket it is replaced by a bisection step.  If Lambda is positive all
the way to the upper boundary, the objective improves monotonically to
full-on transmission and the solver reports the boundary optimum p = 1
(always the case with zero interferer density or no SINR requirement).

The closed-form destination-hop terms of the uncorrelated regime,
``(1 - p*delta) / (1-p)**(2-delta)`` and its derivative
``(1-delta) * (2 - p*delta) / (1-p)**(3-delta)``, are evaluated
analytically; only the genuinely two-dimensional exposure integrals go
through quadrature.  The residual tolerance defaults to 1e-8, so the
quadrature runs at correspondingly tight tolerances (see
``_OPTIMIZER_QUAD``); evaluations are deterministic, hence so is the
whole iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import MacModel, Mode, Objective, RelayScenario, derive_params
from .quadrature import (
    IntegrandContext,
    QuadratureSpec,
    aloha_disk_integral,
    phi_bundle,
    phi_u,
    phi_u_dp,
    phi_u_dp2,
    psi,
    psi_u,
)

__all__ = [
    "OptimizerConfig",
    "OptimizerStep",
    "OptimizeResult",
    "OptimizerConvergenceError",
    "ExposureCache",
    "lambda_fn",
    "lambda_fn_prime",
    "optimize",
]

# Residual evaluations must be an order quieter than the root tolerance;
# the exposure integrals are O(1)-O(100), so 1e-10 relative suffices for
# the default 1e-8 residual tolerance.
_OPTIMIZER_QUAD = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-12)

_SCAN_GRID = (1e-3, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0 - 1e-3)
_P_FLOOR = 1e-12
_P_CEIL = 1.0 - 1e-9


@dataclass(frozen=True)
class OptimizerConfig:
    """Root-solver settings; ``tol`` bounds |Lambda| at the reported root."""

    objective: Objective
    mode: Mode
    p_init: float = 0.5
    tol: float = 1e-8
    max_iters: int = 50

    def __post_init__(self) -> None:
        if not 0.0 < self.p_init < 1.0:
            raise ValueError("p_init must lie in (0, 1)")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class OptimizerStep:
    """One accepted iterate: position, residual and residual slope."""

    p: float
    residual: float
    residual_prime: float


@dataclass(frozen=True)
class OptimizeResult:
    """Outcome of one transmit-probability optimization.

    ``boundary`` marks the no-interior-root case where the optimum is
    full-on transmission; ``trace`` records the Newton/bisection iterates
    (empty for boundary short-circuits).
    """

    p_star: float
    converged: bool
    boundary: bool
    bisection_fallbacks: int
    objective: Objective
    mode: Mode
    trace: tuple[OptimizerStep, ...] = field(default_factory=tuple)


class OptimizerConvergenceError(RuntimeError):
    """Raised when the residual tolerance is not met within max_iters."""

    def __init__(self, message: str, trace: tuple[OptimizerStep, ...]) -> None:
        super().__init__(message)
        self.trace = trace


class ExposureCache:
    """Caches the p-independent exposure integrals of one scenario.

    The joint and single-hop exposures (``psi`` family) do not depend on
    the transmit probability, so one optimization evaluates them once;
    the delay exposures are p-dependent bundles evaluated per iterate.
    """

    def __init__(self, scenario: RelayScenario, spec: QuadratureSpec | None = None) -> None:
        self.scenario = scenario
        self.derived = derive_params(scenario)
        self.spec = spec if spec is not None else _OPTIMIZER_QUAD
        self._ctx = IntegrandContext(self.derived, scenario.relay, scenario.destination)
        self._psi: float | None = None
        self._psi_u: float | None = None

    @property
    def dest_exposure(self) -> float:
        """pi * C(delta) * (theta_rd / p_hat_r)**delta, the closed disk integral."""
        return aloha_disk_integral(
            self.derived.theta_rd / self.derived.p_hat_r, self.derived.delta
        )

    def joint_exposure(self) -> float:
        if self._psi is None:
            self._psi = psi(self._ctx, self.spec)
        return self._psi

    def relay_exposure(self) -> float:
        if self._psi_u is None:
            self._psi_u = psi_u(self._ctx, self.spec)
        return self._psi_u

    def _ctx_at(self, p: float) -> IntegrandContext:
        return IntegrandContext(
            self.derived, self.scenario.relay, self.scenario.destination, transmit_prob=p
        )

    def delay_bundle(self, p: float, mode: Mode) -> tuple[float, float, float]:
        """(exposure, d/dp, d2/dp2) of the delay integral for one regime."""
        ctx = self._ctx_at(p)
        if mode is Mode.CORRELATED:
            return phi_bundle(ctx, self.spec)
        if mode is Mode.UNCORRELATED:
            return (phi_u(ctx, self.spec), phi_u_dp(ctx, self.spec), phi_u_dp2(ctx, self.spec))
        raise ValueError(f"unsupported mode: {mode!r}")


def _uncorrelated_dest_terms(p: float, delta: float) -> tuple[float, float]:
    """Closed-form (1 - p*delta)/(1-p)**(2-delta) and its p-derivative."""
    one_m_p = 1.0 - p
    h = (1.0 - p * delta) / one_m_p ** (2.0 - delta)
    h_prime = (1.0 - delta) * (2.0 - p * delta) / one_m_p ** (3.0 - delta)
    return h, h_prime


def _lambda_pair(
    p: float,
    mac: MacModel,
    objective: Objective,
    mode: Mode,
    cache: ExposureCache,
    bundle: tuple[float, float, float] | None = None,
) -> tuple[float, float]:
    """(Lambda, dLambda/dp) sharing one delay-bundle evaluation."""
    if not 0.0 < p < 1.0:
        raise ValueError("Lambda is defined for p strictly in (0, 1)")
    if mac.density <= 0.0:
        raise ValueError("Lambda is defined for positive interferer density")
    if bundle is None:
        bundle = cache.delay_bundle(p, mode)
    exposure, exposure_dp, exposure_dp2 = bundle
    k = 1.0 if objective is Objective.MIN_DELAY else 3.0

    value = k / (mac.density * p) - exposure - p * exposure_dp
    slope = -k / (mac.density * p * p) - 2.0 * exposure_dp - p * exposure_dp2

    if mode is Mode.UNCORRELATED:
        dest = cache.dest_exposure
        h, h_prime = _uncorrelated_dest_terms(p, cache.derived.delta)
        value -= dest * h
        slope -= dest * h_prime
    if objective is Objective.MAX_UTILITY:
        if mode is Mode.CORRELATED:
            value -= cache.joint_exposure()
        else:
            value -= cache.relay_exposure() + cache.dest_exposure

    return value, slope


def lambda_fn(
    p: float,
    mac: MacModel,
    objective: Objective,
    mode: Mode,
    cache: ExposureCache,
) -> float:
    """Stationarity residual; its unique zero on (0, 1) is the optimum."""
    return _lambda_pair(p, mac, objective, mode, cache)[0]


def lambda_fn_prime(
    p: float,
    mac: MacModel,
    objective: Objective,
    mode: Mode,
    cache: ExposureCache,
) -> float:
    """Slope of the residual; strictly negative on (0, 1)."""
    return _lambda_pair(p, mac, objective, mode, cache)[1]


def _boundary_result(config: OptimizerConfig) -> OptimizeResult:
    return OptimizeResult(
        p_star=1.0,
        converged=True,
        boundary=True,
        bisection_fallbacks=0,
        objective=config.objective,
        mode=config.mode,
    )


def optimize(
    scenario: RelayScenario,
    density: float,
    config: OptimizerConfig,
    spec: QuadratureSpec | None = None,
) -> OptimizeResult:
    """Find the transmit probability optimizing the configured objective.

    Runs a scan for a sign-change bracket of the residual, then
    bracket-safeguarded Newton.  Raises
    :class:`OptimizerConvergenceError` if ``config.max_iters`` iterations
    do not push |Lambda| under ``config.tol``; each call is independent
    and uses no shared mutable state, so calls are thread-safe.
    """
    if density < 0.0:
        raise ValueError("density must be nonnegative")
    cache = ExposureCache(scenario, spec)
    derived = cache.derived
    if density == 0.0:
        return _boundary_result(config)
    if derived.theta_sr == 0.0 and derived.theta_rd == 0.0:
        # no SINR requirement: every transmission succeeds, so transmit always
        return _boundary_result(config)

    def residual(p: float) -> tuple[float, float]:
        mac = MacModel(transmit_prob=p, density=density)
        return _lambda_pair(p, mac, config.objective, config.mode, cache)

    # bracket the sign change: Lambda -> +inf at 0+, so walk the scan grid
    # for the first nonpositive value, extending toward either endpoint if
    # the grid is one-signed.
    lo = None
    hi = None
    for q in _SCAN_GRID:
        value, _ = residual(q)
        if value > 0.0:
            lo = q
        else:
            hi = q
            break
    if lo is None:
        # positive part lies below the scan grid
        q = _SCAN_GRID[0]
        while lo is None and q > _P_FLOOR:
            q *= 0.1
            value, _ = residual(q)
            if value > 0.0:
                lo = q
            else:
                hi = q
        if lo is None:
            raise OptimizerConvergenceError(
                "no positive residual found near p = 0; the residual model is "
                "inconsistent with a decreasing Lambda",
                trace=(),
            )
    if hi is None:
        # residual still positive at the scan ceiling: approach p = 1
        gap = 1.0 - _SCAN_GRID[-1]
        q = _SCAN_GRID[-1]
        while hi is None and 1.0 - q > 1.0 - _P_CEIL:
            gap *= 0.1
            q = 1.0 - gap
            value, _ = residual(q)
            if value > 0.0:
                lo = q
            else:
                hi = q
        if hi is None:
            return _boundary_result(config)

    trace: list[OptimizerStep] = []
    fallbacks = 0
    p = config.p_init if lo < config.p_init < hi else 0.5 * (lo + hi)
    for _ in range(config.max_iters):
        value, slope = residual(p)
        trace.append(OptimizerStep(p=p, residual=value, residual_prime=slope))
        if abs(value) <= config.tol:
            return OptimizeResult(
                p_star=p,
                converged=True,
                boundary=False,
                bisection_fallbacks=fallbacks,
                objective=config.objective,
                mode=config.mode,
                trace=tuple(trace),
            )
        if value > 0.0:
            lo = p
        else:
            hi = p
        step = p - value / slope
        if lo < step < hi:
            p = step
        else:
            p = 0.5 * (lo + hi)
            fallbacks += 1
    raise OptimizerConvergenceError(
        f"|Lambda| did not reach {config.tol} within {config.max_iters} iterations",
        trace=tuple(trace),
    )
