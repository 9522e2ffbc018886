"""Command-line front end.

Four subcommands, all emitting machine-readable output:

* ``metrics``  - closed-form metrics at a single parameter point (JSON).
* ``sweep``    - metrics along one swept variable (CSV), optionally
  re-optimizing the transmit probability per point.
* ``optimize`` - transmit-probability optimization with iterate trace (JSON).
* ``validate`` - analytic vs Monte Carlo side-by-side with 3-sigma bands
  (JSON); exit code 3 on disagreement.

Conventions: transmit powers are given in dB and converted to linear
exactly once, here; everything below the CLI is linear-only.  The
default parameter point is the reference geometry (source (2,0), relay
(1,0), destination (0,0), 5 dB powers, unit noise and threshold,
path-loss exponent 4).  Every command accepts ``--config FILE`` with a
flat JSON object whose keys mirror the flag names (underscored); explicit
flags override file values, and the effective configuration is echoed in
the output (header comments in CSV, a ``config`` object in JSON).
Outputs for identical invocations are byte-identical.  Infinite delays
are serialized as the string ``"infinite"``.

Exit codes: 0 success, 1 usage error, 2 numeric failure (quadrature or
optimizer did not converge), 3 validation failure.
"""

from __future__ import annotations

import argparse
import enum
import json
import math
import sys
from dataclasses import dataclass

from .metrics import MetricReport, compute_metrics
from .model import MacModel, Mode, Objective, Point2, RelayScenario
from .optimizer import OptimizeResult, OptimizerConfig, OptimizerConvergenceError, optimize
from .quadrature import QuadratureAccuracyError, QuadratureSpec
from .simulator import DelayMethod, SimConfig, estimate_delay, estimate_link_success, estimate_success

__all__ = ["main", "SweepSpec", "SweepVariable"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_VALIDATION = 3

_INFINITE = "infinite"


class SweepVariable(enum.Enum):
    RELAY_X = "relay-x"
    DENSITY = "density"
    TRANSMIT_PROB = "p"
    SINR_THRESHOLD = "theta"


@dataclass(frozen=True)
class SweepSpec:
    """One swept variable over [start, stop] with everything else fixed.

    ``optimize_p`` replaces the fixed transmit probability with the
    utility-maximizing p* recomputed at every sweep point for each mode.
    """

    variable: SweepVariable
    start: float
    stop: float
    steps: int
    optimize_p: bool = False

    def __post_init__(self) -> None:
        if not self.start < self.stop:
            raise ValueError("sweep start must be below stop")
        if self.steps < 2:
            raise ValueError("sweep needs at least 2 steps")
        if self.variable in (SweepVariable.DENSITY, SweepVariable.SINR_THRESHOLD):
            if self.start < 0.0:
                raise ValueError("swept values must be nonnegative")
        if self.variable is SweepVariable.TRANSMIT_PROB:
            if self.start < 0.0 or self.stop > 1.0:
                raise ValueError("transmit probability sweep must stay in [0, 1]")

    def values(self) -> list[float]:
        step = (self.stop - self.start) / (self.steps - 1)
        return [self.start + i * step for i in range(self.steps)]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems via exit code 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


# (dest, default) for every shared flag; None defaults are filled after
# the config-file merge so that absent flags do not mask file values.
_SHARED_DEFAULTS: dict[str, object] = {
    "relay_x": 1.0,
    "density": 0.1,
    "p": 0.5,
    "theta": 1.0,
    "alpha": 4.0,
    "noise": 1.0,
    "power_s_db": 5.0,
    "power_r_db": 5.0,
    "power_x_db": 5.0,
    "mode": "both",
    "seed": 0,
    "trials": 10_000,
}


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="flat JSON config; flags override")
    parser.add_argument("--relay-x", type=float, dest="relay_x", default=None,
                        help="relay x-coordinate between source (2,0) and destination (0,0)")
    parser.add_argument("--density", type=float, default=None, help="interferer density (per unit area)")
    parser.add_argument("--p", type=float, default=None, help="ALOHA transmit probability")
    parser.add_argument("--theta", type=float, default=None, help="SINR threshold, linear")
    parser.add_argument("--alpha", type=float, default=None, help="path-loss exponent (> 2)")
    parser.add_argument("--noise", type=float, default=None, help="noise power, linear")
    parser.add_argument("--power-s-db", type=float, dest="power_s_db", default=None,
                        help="source transmit power in dB")
    parser.add_argument("--power-r-db", type=float, dest="power_r_db", default=None,
                        help="relay transmit power in dB")
    parser.add_argument("--power-x-db", type=float, dest="power_x_db", default=None,
                        help="interferer transmit power in dB")
    parser.add_argument("--mode", choices=["ic", "iu", "both"], default=None,
                        help="interference regime(s) to evaluate")
    parser.add_argument("--seed", type=int, default=None, help="simulation seed")
    parser.add_argument("--trials", type=int, default=None, help="simulation trials")
    parser.add_argument("--out", default=None, help="write output to this path instead of stdout")
    parser.add_argument("--format", choices=["csv", "json"], dest="out_format", default=None,
                        help="output format (metrics/optimize/validate default json, sweep csv)")


def build_parser() -> _Parser:
    parser = _Parser(prog="aloharelay", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_metrics = sub.add_parser("metrics", help="closed-form metrics at one parameter point")
    _add_shared_flags(p_metrics)
    p_metrics.add_argument("--corrected-link-sr", action="store_const", const=True, default=None,
                           help="use the probability-weighted source->relay exposure")

    p_sweep = sub.add_parser("sweep", help="metrics along one swept variable (CSV)")
    _add_shared_flags(p_sweep)
    p_sweep.add_argument("--variable", required=True,
                         choices=[v.value for v in SweepVariable])
    p_sweep.add_argument("--start", type=float, required=True)
    p_sweep.add_argument("--stop", type=float, required=True)
    p_sweep.add_argument("--steps", type=int, required=True)
    p_sweep.add_argument("--optimize-p", action="store_const", const=True, default=None,
                         dest="optimize_p", help="use the utility-optimal p* per sweep point")
    p_sweep.add_argument("--corrected-link-sr", action="store_const", const=True, default=None,
                         help="use the probability-weighted source->relay exposure")

    p_opt = sub.add_parser("optimize", help="optimal transmit probability with iterate trace")
    _add_shared_flags(p_opt)
    p_opt.add_argument("--objective", choices=[o.value for o in Objective],
                       default=Objective.MAX_UTILITY.value)
    p_opt.add_argument("--p-init", type=float, dest="p_init", default=0.5)
    p_opt.add_argument("--tol", type=float, default=1e-8)
    p_opt.add_argument("--max-iters", type=int, dest="max_iters", default=50)

    p_val = sub.add_parser("validate", help="analytic vs Monte Carlo side by side")
    _add_shared_flags(p_val)
    p_val.add_argument("--slots", type=int, default=10, help="slots per simulated trial")
    p_val.add_argument("--theta-skew", type=float, dest="theta_skew", default=1.0,
                       help="multiply theta in the analytic path only (negative-control knob)")
    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    """Effective settings: defaults, then config file, then explicit flags."""
    merged = dict(_SHARED_DEFAULTS)
    extras = {
        "variable", "start", "stop", "steps", "optimize_p", "corrected_link_sr",
        "objective", "p_init", "tol", "max_iters", "slots", "theta_skew",
        "out", "out_format",
    }
    for key in extras:
        if hasattr(args, key):
            merged.setdefault(key, getattr(args, key) if getattr(args, key) is not None else None)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise _UsageError(f"cannot read config file {args.config}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise _UsageError("config file must hold a flat JSON object")
        for key, value in file_cfg.items():
            if key not in merged:
                raise _UsageError(f"unknown config key: {key}")
            merged[key] = value
    for key in merged:
        if hasattr(args, key) and getattr(args, key) is not None:
            merged[key] = getattr(args, key)
    if merged.get("optimize_p") is None:
        merged["optimize_p"] = False
    if merged.get("corrected_link_sr") is None:
        merged["corrected_link_sr"] = False
    return merged


def _db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _scenario_from(cfg: dict) -> RelayScenario:
    return RelayScenario(
        source=Point2(2.0, 0.0),
        relay=Point2(float(cfg["relay_x"]), 0.0),
        destination=Point2(0.0, 0.0),
        power_source=_db_to_linear(float(cfg["power_s_db"])),
        power_relay=_db_to_linear(float(cfg["power_r_db"])),
        power_interferer=_db_to_linear(float(cfg["power_x_db"])),
        noise_power=float(cfg["noise"]),
        sinr_threshold=float(cfg["theta"]),
        path_loss_exponent=float(cfg["alpha"]),
    )


def _modes_from(cfg: dict) -> list[Mode]:
    choice = cfg["mode"]
    if choice == "both":
        return [Mode.CORRELATED, Mode.UNCORRELATED]
    return [Mode(choice)]


def _delay_cell(value: float):
    return _INFINITE if math.isinf(value) else value


def _report_dict(report: MetricReport) -> dict:
    return {
        "mode": report.mode.value,
        "p_used": report.transmit_prob,
        "success_prob": report.success_prob,
        "mean_local_delay": _delay_cell(report.mean_local_delay),
        "utility": report.utility,
        "link_success_sr": report.link_success_sr,
        "link_success_rd": report.link_success_rd,
    }


_CONFIG_ECHO_ORDER = [
    "command", "relay_x", "density", "p", "theta", "alpha", "noise",
    "power_s_db", "power_r_db", "power_x_db", "mode", "seed", "trials",
    "variable", "start", "stop", "steps", "optimize_p", "corrected_link_sr",
    "objective", "p_init", "tol", "max_iters", "slots", "theta_skew",
]


def _echo_config(cfg: dict, command: str) -> dict:
    echo = {"command": command}
    for key in _CONFIG_ECHO_ORDER[1:]:
        if key in cfg and cfg[key] is not None:
            echo[key] = cfg[key]
    return echo


def _write_output(text: str, cfg: dict) -> None:
    out = cfg.get("out")
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise _UsageError(f"cannot write output file {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cmd_metrics(cfg: dict) -> int:
    scenario = _scenario_from(cfg)
    mac = MacModel(transmit_prob=float(cfg["p"]), density=float(cfg["density"]))
    reports = [
        compute_metrics(scenario, mac, mode, corrected_link_sr=bool(cfg["corrected_link_sr"]))
        for mode in _modes_from(cfg)
    ]
    payload = {"config": _echo_config(cfg, "metrics"), "reports": [_report_dict(r) for r in reports]}
    if cfg.get("out_format") == "csv":
        lines = [f"# {k}={v}" for k, v in payload["config"].items()]
        lines.append("mode,p_used,success_prob,mean_local_delay,utility,link_sr,link_rd")
        for r in payload["reports"]:
            lines.append(",".join(_csv_cell(r[k]) for k in (
                "mode", "p_used", "success_prob", "mean_local_delay", "utility",
                "link_success_sr", "link_success_rd")))
        _write_output("\n".join(lines) + "\n", cfg)
    else:
        _write_output(json.dumps(payload, indent=2) + "\n", cfg)
    return EXIT_OK


_SWEEP_COLUMNS = [
    "variable_value", "mode", "p_used", "success_prob", "mean_local_delay",
    "utility", "link_sr", "link_rd", "status",
]


def _sweep_point_cfg(cfg: dict, variable: SweepVariable, value: float) -> dict:
    point = dict(cfg)
    key = {
        SweepVariable.RELAY_X: "relay_x",
        SweepVariable.DENSITY: "density",
        SweepVariable.TRANSMIT_PROB: "p",
        SweepVariable.SINR_THRESHOLD: "theta",
    }[variable]
    point[key] = value
    return point


def cmd_sweep(cfg: dict) -> int:
    spec = SweepSpec(
        variable=SweepVariable(cfg["variable"]),
        start=float(cfg["start"]),
        stop=float(cfg["stop"]),
        steps=int(cfg["steps"]),
        optimize_p=bool(cfg["optimize_p"]),
    )
    modes = _modes_from(cfg)
    rows: list[list[str]] = []
    for value in spec.values():
        point = _sweep_point_cfg(cfg, spec.variable, value)
        scenario = _scenario_from(point)
        for mode in modes:
            p_used = float(point["p"])
            status = "ok"
            if spec.optimize_p:
                try:
                    result = optimize(
                        scenario,
                        float(point["density"]),
                        OptimizerConfig(objective=Objective.MAX_UTILITY, mode=mode),
                    )
                    p_used = result.p_star
                except OptimizerConvergenceError:
                    rows.append([_csv_cell(float(value)), mode.value, "", "", "", "", "", "",
                                 "optimizer-failed"])
                    continue
            mac = MacModel(transmit_prob=p_used, density=float(point["density"]))
            report = compute_metrics(
                scenario, mac, mode, corrected_link_sr=bool(cfg["corrected_link_sr"])
            )
            rows.append([
                _csv_cell(float(value)),
                mode.value,
                _csv_cell(p_used),
                _csv_cell(report.success_prob),
                _csv_cell(_delay_cell(report.mean_local_delay)),
                _csv_cell(report.utility),
                _csv_cell(report.link_success_sr),
                _csv_cell(report.link_success_rd),
                status,
            ])

    echo = _echo_config(cfg, "sweep")
    if cfg.get("out_format") == "json":
        payload = {
            "config": echo,
            "rows": [dict(zip(_SWEEP_COLUMNS, row)) for row in rows],
        }
        _write_output(json.dumps(payload, indent=2) + "\n", cfg)
    else:
        lines = [f"# {k}={v}" for k, v in echo.items()]
        lines.append(",".join(_SWEEP_COLUMNS))
        lines.extend(",".join(row) for row in rows)
        _write_output("\n".join(lines) + "\n", cfg)
    return EXIT_OK


def cmd_optimize(cfg: dict) -> int:
    scenario = _scenario_from(cfg)
    modes = _modes_from(cfg)
    if len(modes) != 1:
        raise _UsageError("optimize requires --mode ic or --mode iu")
    config = OptimizerConfig(
        objective=Objective(cfg["objective"]),
        mode=modes[0],
        p_init=float(cfg["p_init"]),
        tol=float(cfg["tol"]),
        max_iters=int(cfg["max_iters"]),
    )
    result: OptimizeResult = optimize(scenario, float(cfg["density"]), config)
    payload = {
        "config": _echo_config(cfg, "optimize"),
        "status": "boundary" if result.boundary else "converged",
        "p_star": result.p_star,
        "objective": result.objective.value,
        "mode": result.mode.value,
        "bisection_fallbacks": result.bisection_fallbacks,
        "iterations": [
            {"p": step.p, "residual": step.residual, "residual_prime": step.residual_prime}
            for step in result.trace
        ],
    }
    _write_output(json.dumps(payload, indent=2) + "\n", cfg)
    return EXIT_OK


def cmd_validate(cfg: dict) -> int:
    scenario = _scenario_from(cfg)
    p = float(cfg["p"])
    if not 0.0 < p < 1.0:
        raise _UsageError("validate requires --p strictly inside (0, 1)")
    mac = MacModel(transmit_prob=p, density=float(cfg["density"]))
    sim = SimConfig(
        trials=int(cfg["trials"]),
        slots_per_trial=int(cfg["slots"]),
        seed=int(cfg["seed"]),
    )
    band_scale = 1.0
    warnings: list[str] = []
    if sim.trials < 100:
        band_scale = 2.0
        warnings.append(
            f"only {sim.trials} trials: standard errors are unreliable, bands widened x2"
        )

    skew = float(cfg["theta_skew"])
    analytic_scenario = scenario
    if skew != 1.0:
        analytic_scenario = RelayScenario(
            source=scenario.source,
            relay=scenario.relay,
            destination=scenario.destination,
            power_source=scenario.power_source,
            power_relay=scenario.power_relay,
            power_interferer=scenario.power_interferer,
            noise_power=scenario.noise_power,
            sinr_threshold=scenario.sinr_threshold * skew,
            path_loss_exponent=scenario.path_loss_exponent,
        )

    rows = []
    all_pass = True
    for mode in _modes_from(cfg):
        report = compute_metrics(analytic_scenario, mac, mode, corrected_link_sr=True)
        sim_success = estimate_success(scenario, mac, sim, mode)
        sim_delay = estimate_delay(scenario, mac, sim, mode, DelayMethod.SEMI_ANALYTIC)
        sim_sr, sim_rd = estimate_link_success(scenario, mac, sim, mode)
        comparisons = [
            ("success_prob", report.success_prob, sim_success),
            ("mean_local_delay", report.mean_local_delay, sim_delay),
            ("link_success_sr", report.link_success_sr, sim_sr),
            ("link_success_rd", report.link_success_rd, sim_rd),
        ]
        for name, analytic, estimate in comparisons:
            band = 3.0 * band_scale * estimate.std_error
            ok = abs(analytic - estimate.mean) <= band
            all_pass &= ok
            rows.append({
                "metric": name,
                "mode": mode.value,
                "analytic": analytic,
                "simulated": estimate.mean,
                "std_error": estimate.std_error,
                "band": band,
                "pass": bool(ok),
            })

    payload = {
        "config": _echo_config(cfg, "validate"),
        "warnings": warnings,
        "rows": rows,
        "result": "PASS" if all_pass else "FAIL",
    }
    _write_output(json.dumps(payload, indent=2) + "\n", cfg)
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_OK if all_pass else EXIT_VALIDATION


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _merge_config(args)
        cfg["command"] = args.command
        if args.command == "metrics":
            return cmd_metrics(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "optimize":
            return cmd_optimize(cfg)
        if args.command == "validate":
            return cmd_validate(cfg)
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureAccuracyError, OptimizerConvergenceError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
