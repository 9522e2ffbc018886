"""Command-line interface: outputs, config merging, exit codes."""

from __future__ import annotations

import json
import math

import pytest

from aloharelay.cli import (
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VALIDATION,
    SweepSpec,
    SweepVariable,
    main,
)
from refcase import B_REF


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_metrics_default_point_json(capsys):
    code, out, _ = run(capsys, "metrics", "--density", "0", "--p", "0.5")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["config"]["command"] == "metrics"
    assert payload["config"]["density"] == 0.0
    modes = [r["mode"] for r in payload["reports"]]
    assert modes == ["ic", "iu"]
    for report in payload["reports"]:
        assert report["success_prob"] == pytest.approx(0.5 * math.exp(-B_REF), rel=1e-12)
        assert report["mean_local_delay"] == pytest.approx(2.0 * math.exp(B_REF), rel=1e-12)


def test_metrics_single_mode_and_csv(capsys):
    code, out, _ = run(capsys, "metrics", "--mode", "iu", "--format", "csv")
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    header_rows = [l for l in lines if l.startswith("#")]
    data_rows = [l for l in lines if not l.startswith("#")]
    assert any(l.startswith("# command=metrics") for l in header_rows)
    assert data_rows[0].startswith("mode,p_used,")
    assert len(data_rows) == 2  # header + one mode
    assert data_rows[1].startswith("iu,")


def test_metrics_infinite_delay_marker(capsys):
    code, out, _ = run(capsys, "metrics", "--p", "1.0", "--density", "0.1")
    assert code == EXIT_OK
    payload = json.loads(out)
    for report in payload["reports"]:
        assert report["mean_local_delay"] == "infinite"
        assert report["utility"] == 0.0


def test_sweep_csv_structure_and_byte_stability(tmp_path, capsys):
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    argv = [
        "sweep", "--variable", "relay-x", "--start", "0.4", "--stop", "1.6",
        "--steps", "4", "--density", "0.05", "--corrected-link-sr",
    ]
    assert main(argv + ["--out", str(out_a)]) == EXIT_OK
    assert main(argv + ["--out", str(out_b)]) == EXIT_OK
    capsys.readouterr()
    assert out_a.read_bytes() == out_b.read_bytes()

    lines = out_a.read_text().strip().splitlines()
    data = [l for l in lines if not l.startswith("#")]
    assert data[0] == (
        "variable_value,mode,p_used,success_prob,mean_local_delay,utility,"
        "link_sr,link_rd,status"
    )
    rows = [l.split(",") for l in data[1:]]
    assert len(rows) == 8  # 4 points x 2 modes
    assert all(row[-1] == "ok" for row in rows)
    values = sorted({float(row[0]) for row in rows})
    assert values == pytest.approx([0.4, 0.8, 1.2, 1.6])
    # symmetric geometry: swapping the relay offset about the midpoint
    # mirrors the two link columns
    first, last = rows[0], rows[-2]
    assert float(first[6]) == pytest.approx(float(last[7]), rel=1e-9)


def test_sweep_json_format(capsys):
    code, out, _ = run(
        capsys, "sweep", "--variable", "p", "--start", "0.2", "--stop", "0.8",
        "--steps", "3", "--mode", "ic", "--format", "json", "--density", "0",
    )
    assert code == EXIT_OK
    payload = json.loads(out)
    assert len(payload["rows"]) == 3
    assert payload["rows"][0]["mode"] == "ic"
    assert payload["config"]["variable"] == "p"


def test_sweep_optimize_p_uses_per_point_optimum(capsys):
    code, out, _ = run(
        capsys, "sweep", "--variable", "density", "--start", "0.1", "--stop", "0.5",
        "--steps", "2", "--mode", "ic", "--optimize-p",
    )
    assert code == EXIT_OK
    rows = [l.split(",") for l in out.strip().splitlines() if not l.startswith("#")][1:]
    p_used = [float(r[2]) for r in rows]
    assert p_used[0] == pytest.approx(0.68139296, abs=1e-6)
    assert p_used[1] == pytest.approx(0.29169077, abs=1e-6)
    assert p_used[0] > p_used[1]  # optimum backs off as contention grows


def test_sweep_rejects_bad_spec(capsys):
    code, _, err = run(
        capsys, "sweep", "--variable", "p", "--start", "0.9", "--stop", "0.1",
        "--steps", "5",
    )
    assert code == EXIT_USAGE
    assert "start must be below stop" in err


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(variable=SweepVariable.DENSITY, start=-0.1, stop=0.5, steps=3)
    with pytest.raises(ValueError):
        SweepSpec(variable=SweepVariable.TRANSMIT_PROB, start=0.1, stop=1.5, steps=3)
    with pytest.raises(ValueError):
        SweepSpec(variable=SweepVariable.DENSITY, start=0.1, stop=0.5, steps=1)
    spec = SweepSpec(variable=SweepVariable.DENSITY, start=0.0, stop=1.0, steps=5)
    assert spec.values() == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])


def test_optimize_json_trace(capsys):
    code, out, _ = run(
        capsys, "optimize", "--mode", "ic", "--density", "0.1",
        "--objective", "min-delay",
    )
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["status"] == "converged"
    assert payload["p_star"] == pytest.approx(0.50799776, abs=1e-6)
    assert payload["iterations"]
    assert abs(payload["iterations"][-1]["residual"]) <= 1e-8


def test_optimize_boundary_status(capsys):
    code, out, _ = run(capsys, "optimize", "--mode", "ic", "--density", "0")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["status"] == "boundary"
    assert payload["p_star"] == 1.0


def test_optimize_requires_single_mode(capsys):
    code, _, err = run(capsys, "optimize", "--mode", "both", "--density", "0.1")
    assert code == EXIT_USAGE
    assert "requires --mode ic or --mode iu" in err


def test_optimize_numeric_failure_exit(capsys):
    code, _, err = run(
        capsys, "optimize", "--mode", "ic", "--density", "0.1", "--max-iters", "1",
    )
    assert code == EXIT_NUMERIC
    assert "numeric failure" in err


def test_validate_passes_and_reports_rows(capsys):
    code, out, _ = run(
        capsys, "validate", "--density", "0.05", "--p", "0.5",
        "--trials", "1500", "--seed", "7",
    )
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["result"] == "PASS"
    metrics = {(r["mode"], r["metric"]) for r in payload["rows"]}
    for mode in ("ic", "iu"):
        for name in ("success_prob", "mean_local_delay", "link_success_sr", "link_success_rd"):
            assert (mode, name) in metrics
    for row in payload["rows"]:
        assert row["pass"] is True
        assert abs(row["analytic"] - row["simulated"]) <= row["band"]


def test_validate_negative_control_fails(capsys):
    code, out, _ = run(
        capsys, "validate", "--density", "0.05", "--p", "0.5",
        "--trials", "1500", "--seed", "7", "--theta-skew", "1.1",
    )
    assert code == EXIT_VALIDATION
    payload = json.loads(out)
    assert payload["result"] == "FAIL"
    assert any(not r["pass"] for r in payload["rows"])


def test_validate_small_budget_warns(capsys):
    code, out, err = run(
        capsys, "validate", "--density", "0.02", "--p", "0.5",
        "--trials", "40", "--seed", "7",
    )
    payload = json.loads(out)
    assert payload["warnings"]
    assert "widened" in err
    assert code in (EXIT_OK, EXIT_VALIDATION)


def test_validate_rejects_boundary_p(capsys):
    code, _, err = run(capsys, "validate", "--p", "1.0")
    assert code == EXIT_USAGE
    assert "strictly inside" in err


def test_config_file_merge_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"density": 0.2, "p": 0.3, "mode": "ic"}))
    code, out, _ = run(capsys, "metrics", "--config", str(cfg), "--p", "0.4")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["config"]["density"] == 0.2  # from file
    assert payload["config"]["p"] == 0.4  # flag wins
    assert [r["mode"] for r in payload["reports"]] == ["ic"]


def test_config_file_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"densty": 0.2}))
    code, _, err = run(capsys, "metrics", "--config", str(cfg))
    assert code == EXIT_USAGE
    assert "unknown config key" in err


def test_config_file_rejects_bad_json(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    code, _, err = run(capsys, "metrics", "--config", str(cfg))
    assert code == EXIT_USAGE


@pytest.mark.parametrize(
    "argv",
    [
        ["metrics", "--p", "1.5"],
        ["metrics", "--alpha", "2.0"],
        ["metrics", "--density", "-0.1"],
        ["nonsense"],
        ["sweep", "--variable", "p", "--start", "0.1", "--stop", "0.9", "--steps", "1"],
    ],
)
def test_usage_errors_exit_one(argv, capsys):
    code = main(argv)
    capsys.readouterr()
    assert code == EXIT_USAGE


def test_out_flag_redirects_everything(tmp_path, capsys):
    target = tmp_path / "m.json"
    code, out, _ = run(capsys, "metrics", "--density", "0", "--out", str(target))
    assert code == EXIT_OK
    assert out == ""
    assert json.loads(target.read_text())["reports"]


def test_out_flag_unwritable_path_is_usage_error(tmp_path, capsys):
    target = tmp_path / "missing-dir" / "m.json"
    code, _, err = run(capsys, "metrics", "--density", "0", "--out", str(target))
    assert code == EXIT_USAGE
    assert "cannot write output file" in err
