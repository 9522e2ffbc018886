"""Plane integrals of interference-exposure kernels.

Every analytic metric in this package is ``exp`` of a plane integral of
a kernel that is smooth except for algebraic bumps at the relay and the
destination and an ``|x|**-alpha`` far-field decay.  This module
evaluates those integrals deterministically:

* :func:`planar_integral` is a generic adaptive tensor-Gauss rule over
  the whole plane.  The plane is covered exactly: a polar disk of radius
  ``truncation_radius`` around a chosen center, plus the outside of that
  disk mapped onto a finite rectangle with the substitution
  ``rho = R * t**(-1/(alpha-2))``, whose Jacobian absorbs the far-field
  decay.  No analytic tail estimate is involved, so accuracy is limited
  only by the cell budget.
* The named kernels of the relay analysis (``psi``/``phi`` families) are
  thin wrappers; the radially symmetric single-center kernels reduce to
  1-D radial integrals evaluated with ``scipy.integrate.quad``.

Error model: each cell carries the difference between embedded 4- and
7-point Gauss rules; cells are quadrisected until the summed indicator
meets ``max(abs_tol, rel_tol * |integral|)`` per component.  Exceeding
``max_subdivisions`` cells raises :class:`QuadratureAccuracyError`
carrying the best estimate and its error bound.  All evaluation and
summation orders are fixed, so results are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .model import DerivedParams, Point2

__all__ = [
    "QuadratureSpec",
    "QuadratureAccuracyError",
    "IntegrandContext",
    "planar_integral",
    "psi",
    "phi",
    "phi_dp",
    "phi_dp2",
    "phi_bundle",
    "psi_u",
    "phi_u",
    "phi_u_dp",
    "phi_u_dp2",
    "aloha_disk_integral",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy contract for the integral evaluations.

    ``truncation_radius`` sets where the polar near-field mesh hands over
    to the transformed far-field mesh; the far field is still integrated,
    so the radius affects efficiency, not correctness.
    """

    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    max_subdivisions: int = 1_000_000
    truncation_radius: float = 50.0

    def __post_init__(self) -> None:
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 64:
            raise ValueError("max_subdivisions must allow at least 64 cells")
        if self.truncation_radius <= 0.0:
            raise ValueError("truncation_radius must be positive")


class QuadratureAccuracyError(RuntimeError):
    """Raised when the cell budget is exhausted before tolerances are met."""

    def __init__(self, message: str, estimate, error_bound) -> None:
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


@dataclass(frozen=True)
class IntegrandContext:
    """Everything a relay-analysis kernel needs besides the point it is at.

    ``transmit_prob`` is only consulted by the delay-exposure kernels
    (``phi`` family); it must then lie strictly inside (0, 1) because the
    underlying integral diverges at 1 and the derivative family is
    defined on the open interval.
    """

    derived: DerivedParams
    relay: Point2
    destination: Point2
    transmit_prob: float | None = None

    @property
    def coef_relay(self) -> float:
        """Bump coefficient at the relay: theta_sr / p_hat_s."""
        return self.derived.theta_sr / self.derived.p_hat_s

    @property
    def coef_destination(self) -> float:
        """Bump coefficient at the destination: theta_rd / p_hat_r."""
        return self.derived.theta_rd / self.derived.p_hat_r


# 4/7-point Gauss-Legendre nodes mapped to [0, 1].
_NODES_LO, _WVEC_LO = np.polynomial.legendre.leggauss(4)
_NODES_HI, _WVEC_HI = np.polynomial.legendre.leggauss(7)
_NODES_LO = 0.5 * (_NODES_LO + 1.0)
_NODES_HI = 0.5 * (_NODES_HI + 1.0)
_WVEC_LO = 0.5 * _WVEC_LO
_WVEC_HI = 0.5 * _WVEC_HI


def _eval_cells(f, bounds, region, center, radius, alpha, nodes, wvec):
    """Tensor-Gauss estimates of one batch of cells under one rule.

    ``bounds`` is (n, 4): radial-parameter and angle intervals.  Region 0
    cells live on the polar disk (parameter is the radius itself); region
    1 cells live on the transformed far field (parameter t in (0, 1],
    rho = R * t**(-1/(alpha-2))).
    """
    k = nodes.size
    u = bounds[:, 0:1] + (bounds[:, 1:2] - bounds[:, 0:1]) * nodes  # (n, k)
    v = bounds[:, 2:3] + (bounds[:, 3:4] - bounds[:, 2:3]) * nodes
    su = u[:, :, None]  # radial parameter, (n, k, 1)
    sv = v[:, None, :]  # angle, (n, 1, k)

    inv_pow = 1.0 / (alpha - 2.0)
    tail = region.astype(bool)
    with np.errstate(over="ignore"):
        rho = np.where(tail[:, None, None], radius * su ** -inv_pow, su)
        jac = np.where(
            tail[:, None, None],
            (radius * radius * inv_pow) * su ** -(alpha * inv_pow),
            su,
        )
    x = center[0] + rho * np.cos(sv)
    y = center[1] + rho * np.sin(sv)
    vals = f(x.ravel(), y.ravel())
    vals = np.asarray(vals, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    m = vals.shape[-1]
    vals = vals.reshape(x.shape + (m,))
    if not np.all(np.isfinite(vals * jac[..., None])):
        raise FloatingPointError("integrand produced a non-finite value")
    w2 = wvec[:, None] * wvec[None, :]  # (k, k)
    area = (bounds[:, 1] - bounds[:, 0]) * (bounds[:, 3] - bounds[:, 2])
    cell = np.einsum("nijc,ij->nc", vals * jac[..., None], w2)
    return cell * area[:, None]


def _initial_mesh(radius, features):
    """Seed cells: geometric radial ladder plus refinements near features.

    ``features`` is a sequence of (distance_from_center, length_scale)
    pairs describing where the kernels vary fastest, so the first mesh
    already brackets every bump at its own scale and the error indicators
    can see it.
    """
    scales = [s for _, s in features if s > 0.0]
    base = min(scales) if scales else radius / 16.0
    r_min = min(max(base / 4.0, radius * 1e-7), radius / 16.0)
    breaks = {0.0, radius}
    r = r_min
    while r < radius:
        breaks.add(r)
        r *= 2.0
    angles = {2.0 * math.pi * i / 8.0 for i in range(9)}
    for dist, scale in features:
        if scale <= 0.0:
            continue
        for edge in (dist - 3.0 * scale, dist, dist + 3.0 * scale):
            if 0.0 < edge < radius:
                breaks.add(edge)
        if dist > 0.0:
            half_w = min(3.0 * scale / dist, math.pi / 2.0)
            for ang in (-half_w, 0.0, half_w):
                angles.add(ang % (2.0 * math.pi))
    angles.add(2.0 * math.pi)
    radial = sorted(breaks)
    angular = sorted(angles)

    cells = []
    regions = []
    for i in range(len(radial) - 1):
        for j in range(len(angular) - 1):
            cells.append((radial[i], radial[i + 1], angular[j], angular[j + 1]))
            regions.append(0)
    for t0, t1 in ((0.0, 0.25), (0.25, 0.5), (0.5, 1.0)):
        for j in range(len(angular) - 1):
            cells.append((t0, t1, angular[j], angular[j + 1]))
            regions.append(1)
    return np.array(cells, dtype=float), np.array(regions, dtype=np.uint8)


def planar_integral(
    f,
    center: tuple[float, float],
    alpha: float,
    spec: QuadratureSpec,
    features: tuple[tuple[float, float], ...] = (),
) -> np.ndarray:
    """Adaptively integrate ``f`` over the whole plane.

    ``f(x, y)`` must accept equal-shape 1-D arrays and return an array of
    shape ``(n,)`` or ``(n, m)``; all ``m`` components are integrated on
    a shared mesh and each must meet the tolerance.  ``alpha`` is the
    far-field decay exponent (``f`` must be O(|x|**-alpha) or faster) and
    drives the far-field change of variables.  Returns shape ``(m,)``.
    """
    if alpha <= 2.0:
        raise ValueError("far-field decay exponent must exceed 2")
    radius = spec.truncation_radius
    bounds, region = _initial_mesh(radius, features)

    def rule(b, r, nodes, wvec):
        return _eval_cells(f, b, r, center, radius, alpha, nodes, wvec)

    vals_hi = rule(bounds, region, _NODES_HI, _WVEC_HI)
    vals_lo = rule(bounds, region, _NODES_LO, _WVEC_LO)
    err = np.abs(vals_hi - vals_lo)

    while True:
        total = vals_hi.sum(axis=0)
        bound = err.sum(axis=0)
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))
        if np.all(bound <= tol):
            return total
        if bounds.shape[0] >= spec.max_subdivisions:
            raise QuadratureAccuracyError(
                f"cell budget {spec.max_subdivisions} exhausted with error "
                f"bound {bound} against tolerance {tol}",
                estimate=total,
                error_bound=bound,
            )
        badness = np.max(err / tol, axis=1)
        pick = badness >= 0.25 * badness.max()
        keep = ~pick
        sel = bounds[pick]
        mid0 = 0.5 * (sel[:, 0] + sel[:, 1])
        mid1 = 0.5 * (sel[:, 2] + sel[:, 3])
        children = np.concatenate(
            [
                np.stack([sel[:, 0], mid0, sel[:, 2], mid1], axis=1),
                np.stack([sel[:, 0], mid0, mid1, sel[:, 3]], axis=1),
                np.stack([mid0, sel[:, 1], sel[:, 2], mid1], axis=1),
                np.stack([mid0, sel[:, 1], mid1, sel[:, 3]], axis=1),
            ]
        )
        child_region = np.tile(region[pick], 4)
        child_hi = rule(children, child_region, _NODES_HI, _WVEC_HI)
        child_lo = rule(children, child_region, _NODES_LO, _WVEC_LO)
        bounds = np.concatenate([bounds[keep], children])
        region = np.concatenate([region[keep], child_region])
        vals_hi = np.concatenate([vals_hi[keep], child_hi])
        err = np.concatenate([err[keep], np.abs(child_hi - child_lo)])


def _joint_factor(ctx: IntegrandContext):
    """Vectorized f(x) = (1 + a)(1 + b) - 1 for the two-bump kernels.

    a and b are the relay and destination bumps.  Computed as
    a + b + a*b, which is exact at the singular points (IEEE inf
    propagates to f = inf, and the kernels below map that to their true
    limit), and avoids cancellation in the far field where f ~ |x|**-alpha.
    """
    coef_r = ctx.coef_relay
    coef_d = ctx.coef_destination
    rx, ry = ctx.relay.x, ctx.relay.y
    dx, dy = ctx.destination.x, ctx.destination.y
    half_alpha = ctx.derived.alpha / 2.0

    def factor(x, y):
        with np.errstate(divide="ignore"):
            out = None
            if coef_r > 0.0:
                out = coef_r * ((x - rx) ** 2 + (y - ry) ** 2) ** -half_alpha
            if coef_d > 0.0:
                b = coef_d * ((x - dx) ** 2 + (y - dy) ** 2) ** -half_alpha
                out = b if out is None else out + b + out * b
            if out is None:
                out = np.zeros_like(x)
        return out

    return factor


def _saturate(f_vals, shift):
    """f / (1 + shift * f) evaluated as 1 / (1/f + shift).

    Exact at both ends: f = 0 gives 0, f = inf gives 1/shift, with no
    intermediate inf/inf.
    """
    with np.errstate(divide="ignore"):
        return 1.0 / (1.0 / f_vals + shift)


def _two_center_features(ctx: IntegrandContext, extra_central: float = 0.0):
    """Mesh hints for kernels with bumps at the relay and destination."""
    cx = 0.5 * (ctx.relay.x + ctx.destination.x)
    cy = 0.5 * (ctx.relay.y + ctx.destination.y)
    alpha = ctx.derived.alpha
    feats = []
    for point, coef in ((ctx.relay, ctx.coef_relay), (ctx.destination, ctx.coef_destination)):
        if coef > 0.0:
            dist = math.hypot(point.x - cx, point.y - cy)
            feats.append((dist, coef ** (1.0 / alpha)))
    if extra_central > 0.0:
        feats.append((0.0, extra_central))
    return (cx, cy), tuple(feats)


def _require_open_unit(p: float | None) -> float:
    if p is None or not 0.0 < p < 1.0:
        raise ValueError(
            "transmit_prob must lie strictly in (0, 1) for the delay-exposure "
            "kernels; the integral diverges at 1"
        )
    return p


def psi(ctx: IntegrandContext, spec: QuadratureSpec) -> float:
    """Joint two-hop exposure integral: plane integral of f / (1 + f).

    This measures how much one always-on interferer degrades the product
    of both hop successes; the joint success probability carries
    ``exp(-density * p * psi)``.  Zero when both bump coefficients are
    zero (no SINR requirement).
    """
    factor = _joint_factor(ctx)
    if ctx.coef_relay == 0.0 and ctx.coef_destination == 0.0:
        return 0.0

    def kernel(x, y):
        return _saturate(factor(x, y), 1.0)

    center, feats = _two_center_features(ctx)
    return float(planar_integral(kernel, center, ctx.derived.alpha, spec, feats)[0])


def phi(ctx: IntegrandContext, spec: QuadratureSpec) -> float:
    """Delay-exposure integral: plane integral of f / (1 + (1-p) f).

    The mean local delay carries ``exp(+density * p * phi)``.  Increases
    with p and diverges as p -> 1 (the kernel saturates to 1/(1-p) on a
    growing plateau), which is why the mean delay blows up at full-on
    transmission whenever interferers are present.
    """
    p = _require_open_unit(ctx.transmit_prob)
    factor = _joint_factor(ctx)
    if ctx.coef_relay == 0.0 and ctx.coef_destination == 0.0:
        return 0.0

    def kernel(x, y):
        return _saturate(factor(x, y), 1.0 - p)

    center, feats = _plateau_features(ctx, p)
    return float(planar_integral(kernel, center, ctx.derived.alpha, spec, feats)[0])


def phi_dp(ctx: IntegrandContext, spec: QuadratureSpec) -> float:
    """First p-derivative of the delay-exposure integral.

    Kernel (f / (1 + (1-p) f))**2, obtained by differentiating under the
    integral sign; positive, so the exposure is strictly increasing in p.
    """
    p = _require_open_unit(ctx.transmit_prob)
    factor = _joint_factor(ctx)
    if ctx.coef_relay == 0.0 and ctx.coef_destination == 0.0:
        return 0.0

    def kernel(x, y):
        return _saturate(factor(x, y), 1.0 - p) ** 2

    center, feats = _plateau_features(ctx, p)
    return float(planar_integral(kernel, center, ctx.derived.alpha, spec, feats)[0])


def phi_dp2(ctx: IntegrandContext, spec: QuadratureSpec) -> float:
    """Second p-derivative of the delay-exposure integral.

    Kernel 2 * (f / (1 + (1-p) f))**3; the factor 2 comes from the chain
    rule applied twice and makes the finite-difference checks close.
    Positive, so the exposure is convex in p.
    """
    p = _require_open_unit(ctx.transmit_prob)
    factor = _joint_factor(ctx)
    if ctx.coef_relay == 0.0 and ctx.coef_destination == 0.0:
        return 0.0

    def kernel(x, y):
        return 2.0 * _saturate(factor(x, y), 1.0 - p) ** 3

    center, feats = _plateau_features(ctx, p)
    return float(planar_integral(kernel, center, ctx.derived.alpha, spec, feats)[0])


def phi_bundle(ctx: IntegrandContext, spec: QuadratureSpec) -> tuple[float, float, float]:
    """(phi, phi_dp, phi_dp2) from one shared adaptive mesh.

    The three kernels are powers of the same saturated factor, so one
    evaluation pass serves all of them; the optimizer calls this once per
    iterate.
    """
    p = _require_open_unit(ctx.transmit_prob)
    factor = _joint_factor(ctx)
    if ctx.coef_relay == 0.0 and ctx.coef_destination == 0.0:
        return (0.0, 0.0, 0.0)

    def kernel(x, y):
        w = _saturate(factor(x, y), 1.0 - p)
        return np.stack([w, w * w, 2.0 * w * w * w], axis=-1)

    center, feats = _plateau_features(ctx, p)
    vals = planar_integral(kernel, center, ctx.derived.alpha, spec, feats)
    return (float(vals[0]), float(vals[1]), float(vals[2]))


def _plateau_features(ctx: IntegrandContext, p: float):
    """Two-bump features plus the saturation-plateau radius for given p."""
    alpha = ctx.derived.alpha
    plateau = ((ctx.coef_relay + ctx.coef_destination) / (1.0 - p)) ** (1.0 / alpha)
    return _two_center_features(ctx, extra_central=plateau)


def _radial_quad(integrand, scale: float, spec: QuadratureSpec) -> float:
    """2*pi * integral of rho * integrand(rho) over [0, inf).

    Radially symmetric kernels reduce to this 1-D form; split at the
    feature scale so the infinite-interval transform only sees the tail.
    """
    def g(rho):
        return rho * integrand(rho)

    cut = max(4.0 * scale, 1e-6)
    near, near_err = quad(g, 0.0, cut, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=200)
    far, far_err = quad(g, cut, np.inf, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=200)
    total = 2.0 * math.pi * (near + far)
    bound = 2.0 * math.pi * (near_err + far_err)
    if bound > max(spec.abs_tol, spec.rel_tol * abs(total)) * 100.0:
        raise QuadratureAccuracyError(
            f"radial quadrature error bound {bound} too large for {total}",
            estimate=total,
            error_bound=bound,
        )
    return total


def psi_u(ctx: IntegrandContext, spec: QuadratureSpec) -> float:
    """Single-hop exposure integral at the relay: integral of a / (1 + a).

    With independent thinning per hop the two hops decouple and each
    contributes its own single-bump exposure; by radial symmetry this one
    equals ``pi * stability * coef_relay**delta`` (see
    :func:`aloha_disk_integral`), which the tests enforce.
    """
    coef = ctx.coef_relay
    if coef == 0.0:
        return 0.0
    alpha = ctx.derived.alpha

    def integrand(rho):
        return coef / (rho**alpha + coef)

    return _radial_quad(integrand, coef ** (1.0 / alpha), spec)


def phi_u(ctx: IntegrandContext, spec: QuadratureSpec) -> float:
    """Relay-hop delay exposure: integral of a / (1 + (1-p) a)."""
    p = _require_open_unit(ctx.transmit_prob)
    coef = ctx.coef_relay
    if coef == 0.0:
        return 0.0
    alpha = ctx.derived.alpha
    shifted = (1.0 - p) * coef

    def integrand(rho):
        return coef / (rho**alpha + shifted)

    return _radial_quad(integrand, (coef / (1.0 - p)) ** (1.0 / alpha), spec)


def phi_u_dp(ctx: IntegrandContext, spec: QuadratureSpec) -> float:
    """First p-derivative of the relay-hop delay exposure."""
    p = _require_open_unit(ctx.transmit_prob)
    coef = ctx.coef_relay
    if coef == 0.0:
        return 0.0
    alpha = ctx.derived.alpha
    shifted = (1.0 - p) * coef

    def integrand(rho):
        return (coef / (rho**alpha + shifted)) ** 2

    return _radial_quad(integrand, (coef / (1.0 - p)) ** (1.0 / alpha), spec)


def phi_u_dp2(ctx: IntegrandContext, spec: QuadratureSpec) -> float:
    """Second p-derivative of the relay-hop delay exposure."""
    p = _require_open_unit(ctx.transmit_prob)
    coef = ctx.coef_relay
    if coef == 0.0:
        return 0.0
    alpha = ctx.derived.alpha
    shifted = (1.0 - p) * coef

    def integrand(rho):
        return 2.0 * coef**3 / (rho**alpha + shifted) ** 3

    return _radial_quad(integrand, (coef / (1.0 - p)) ** (1.0 / alpha), spec)


def aloha_disk_integral(theta_over_power: float, delta: float) -> float:
    """Closed form pi * C(delta) * t**delta of the thinned single-bump plane integral.

    ``integral over the plane of q*a / (1 + q*a) dx`` with
    ``a = t * |x|**-alpha`` equals ``pi * C(delta) * (q*t)**delta``;
    callers fold the thinning factor q into ``theta_over_power``.
    ``C(delta) = pi*delta/sin(pi*delta)`` is the stability constant.
    """
    if theta_over_power < 0.0:
        raise ValueError("theta_over_power must be nonnegative")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if theta_over_power == 0.0:
        return 0.0
    c_delta = math.pi * delta / math.sin(math.pi * delta)
    return math.pi * c_delta * theta_over_power**delta
