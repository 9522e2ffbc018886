"""Closed-form metrics, simulation, and transmit-probability optimization
for a two-hop relay under slotted ALOHA with Poisson-field interference."""

from .metrics import (
    MetricReport,
    compute_metrics,
    delay_correlated,
    delay_correlated_log,
    delay_uncorrelated,
    delay_uncorrelated_log,
    link_success_rd,
    link_success_sr,
    success_prob_correlated,
    success_prob_uncorrelated,
    utility,
)
from .model import (
    DerivedParams,
    MacModel,
    Mode,
    Objective,
    Point2,
    RelayScenario,
    derive_params,
    path_loss,
    stability_constant,
)
from .optimizer import (
    ExposureCache,
    OptimizeResult,
    OptimizerConfig,
    OptimizerConvergenceError,
    OptimizerStep,
    lambda_fn,
    lambda_fn_prime,
    optimize,
)
from .quadrature import (
    IntegrandContext,
    QuadratureAccuracyError,
    QuadratureSpec,
    aloha_disk_integral,
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
)
from .simulator import (
    DelayMethod,
    SimConfig,
    SimEstimate,
    conditional_success_prob,
    estimate_delay,
    estimate_link_success,
    estimate_success,
    sample_ppp,
    slot_success,
)

__all__ = [
    "DerivedParams",
    "DelayMethod",
    "ExposureCache",
    "IntegrandContext",
    "MacModel",
    "MetricReport",
    "Mode",
    "Objective",
    "OptimizeResult",
    "OptimizerConfig",
    "OptimizerConvergenceError",
    "OptimizerStep",
    "Point2",
    "QuadratureAccuracyError",
    "QuadratureSpec",
    "RelayScenario",
    "SimConfig",
    "SimEstimate",
    "aloha_disk_integral",
    "compute_metrics",
    "conditional_success_prob",
    "delay_correlated",
    "delay_correlated_log",
    "delay_uncorrelated",
    "delay_uncorrelated_log",
    "derive_params",
    "estimate_delay",
    "estimate_link_success",
    "estimate_success",
    "lambda_fn",
    "lambda_fn_prime",
    "link_success_rd",
    "link_success_sr",
    "optimize",
    "path_loss",
    "phi",
    "phi_bundle",
    "phi_dp",
    "phi_dp2",
    "phi_u",
    "phi_u_dp",
    "phi_u_dp2",
    "planar_integral",
    "psi",
    "psi_u",
    "sample_ppp",
    "slot_success",
    "stability_constant",
    "success_prob_correlated",
    "success_prob_uncorrelated",
    "utility",
]

__version__ = "0.1.0"
