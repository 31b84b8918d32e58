"""CSV schema, serialization determinism, and CLI subcommand tests."""

import json
import subprocess
import sys
from dataclasses import replace

import numpy as np
import pytest

from whmcsim import cli
from whmcsim import scenario as sc
from whmcsim.control import design_lqr
from whmcsim.dynamics import PlantParams
from whmcsim.orchestrator import compare_decision_makers, run_scenario, snr_sweep
from whmcsim.tables import (
    COMPARE_COLUMNS,
    COMPARE_MEAN_COLUMNS,
    RUN_COLUMNS,
    SWEEP_COLUMNS,
    format_number,
    validate_table,
    write_comparison_tables,
    write_run_table,
    write_sweep_table,
)

DESIGN = design_lqr(PlantParams(), 0.01)


def short(**overrides):
    base = dict(duration=1.0)
    base.update(overrides)
    return replace(sc.preset("case-study-whmc"), **base)


def test_format_number():
    assert format_number(-0.0) == "0"
    assert format_number(0.0) == "0"
    assert format_number(3.141592653589793) == "3.14159265"
    assert format_number(-60.0) == "-60"
    assert format_number(1e-7) == "1e-07"


def test_run_table_layout_and_validation(tmp_path):
    result = run_scenario(short(master_seed=4), design=DESIGN)
    path = write_run_table(result, tmp_path / "run.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(RUN_COLUMNS)
    assert len(lines) == result.t.size + 1
    assert validate_table(path) == []
    first = lines[1].split(",")
    assert first[0] == "0"
    assert first[3] == format_number(np.pi / 6)


def test_run_table_records_force_actions(tmp_path):
    scen = short(decision_maker=sc.HUMAN_ONLY, master_seed=2)
    result = run_scenario(scen, design=DESIGN)
    path = write_run_table(result, tmp_path / "run.csv")
    text = path.read_text()
    assert "force:-60" in text
    assert validate_table(path) == []


def test_validate_catches_corruption(tmp_path):
    result = run_scenario(short(master_seed=4), design=DESIGN)
    path = write_run_table(result, tmp_path / "run.csv")
    lines = path.read_text().splitlines()

    bad_flag = lines[:]
    bad_flag[5] = ",".join(
        part if i != 8 else "2" for i, part in enumerate(bad_flag[5].split(","))
    )
    p1 = tmp_path / "bad_flag.csv"
    p1.write_text("\n".join(bad_flag) + "\n")
    assert any("uplink_delivered" in issue for issue in validate_table(p1))

    bad_acc = lines[:]
    parts = bad_acc[10].split(",")
    parts[12] = "0"
    bad_acc[10] = ",".join(parts)
    p2 = tmp_path / "bad_acc.csv"
    p2.write_text("\n".join(bad_acc) + "\n")
    assert any("decreased" in issue for issue in validate_table(p2))

    p3 = tmp_path / "unknown.csv"
    p3.write_text("a,b,c\n1,2,3\n")
    assert any("unknown header" in issue for issue in validate_table(p3))

    p4 = tmp_path / "empty.csv"
    p4.write_text("")
    assert validate_table(p4)


def test_comparison_tables_match_direct_runs(tmp_path):
    base = short(master_seed=0)
    seeds = [0, 1]
    comp = compare_decision_makers(base, seeds)
    path, mean_path = write_comparison_tables(comp, tmp_path / "cmp.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(COMPARE_COLUMNS)
    n = comp.times.size
    assert len(lines) == 1 + 3 * len(seeds) * n
    assert validate_table(path) == [] and validate_table(mean_path) == []

    # re-aggregation oracle: long-form rows must equal a direct engine run
    variant, seed = sc.HUMAN_ONLY, 1
    direct = run_scenario(
        replace(base, decision_maker=variant, master_seed=seed), design=DESIGN
    )
    rows = [
        line.split(",")
        for line in lines[1:]
        if line.startswith(f"{variant},{seed},")
    ]
    assert len(rows) == n
    assert [r[3] for r in rows] == [format_number(v) for v in direct.accumulated_cost]

    mean_lines = mean_path.read_text().splitlines()
    assert mean_lines[0] == ",".join(COMPARE_MEAN_COLUMNS)
    assert len(mean_lines) == 1 + 3 * n


def test_sweep_table_layout(tmp_path):
    sweep = snr_sweep(short(), (20.0, 35.0), [0, 1])
    path = write_sweep_table(sweep, tmp_path / "sweep.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 1 + 4  # 2 attentions x 2 powers
    assert validate_table(path) == []


def test_cli_run_is_byte_deterministic(tmp_path, capsys):
    doc = tmp_path / "scen.json"
    doc.write_text(json.dumps({"preset": "case-study-whmc", "duration": 1.0}))
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    assert cli.main(["run", "--scenario", str(doc), "--seed", "7", "--out", str(out_a)]) == 0
    assert cli.main(["run", "--scenario", str(doc), "--seed", "7", "--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    printed = capsys.readouterr().out
    assert '"qoc"' in printed and "wrote" in printed


def test_cli_run_reports_qoc_summary(tmp_path, capsys):
    doc = tmp_path / "scen.json"
    doc.write_text(json.dumps({"preset": "case-study-whmc", "duration": 0.5}))
    assert cli.main(["run", "--scenario", str(doc), "--out", str(tmp_path / "r.csv")]) == 0
    head = capsys.readouterr().out.split("wrote")[0]
    summary = json.loads(head)
    assert set(summary["qoc"]) == {"task", "network", "human"}
    assert summary["rows"] == 50


def test_cli_compare_and_sweep(tmp_path, capsys):
    doc = tmp_path / "scen.json"
    doc.write_text(json.dumps({"preset": "fig5a", "duration": 0.5}))
    out = tmp_path / "cmp.csv"
    assert cli.main(["compare", "--scenario", str(doc), "--seeds", "2", "--out", str(out)]) == 0
    assert out.exists() and (tmp_path / "cmp_mean.csv").exists()
    text = capsys.readouterr().out
    for variant in ("machine_only", "human_only", "whmc"):
        assert variant in text

    sweep_out = tmp_path / "sweep.csv"
    assert (
        cli.main(
            [
                "sweep",
                "--scenario",
                str(doc),
                "--powers",
                "20,35",
                "--seeds",
                "2",
                "--out",
                str(sweep_out),
            ]
        )
        == 0
    )
    assert validate_table(sweep_out) == []


def test_cli_validate_suite_and_files(tmp_path, capsys):
    assert cli.main(["validate"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 8 and "FAIL" not in out

    good = tmp_path / "good.csv"
    write_run_table(run_scenario(short(master_seed=1), design=DESIGN), good)
    assert cli.main(["validate", str(good)]) == 0

    bad = tmp_path / "bad.csv"
    bad.write_text("nonsense\n")
    assert cli.main(["validate", str(good), str(bad)]) == 1
    out = capsys.readouterr().out
    assert f"PASS {good}" in out and f"FAIL {bad}" in out


def test_cli_usage_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["run", "--bogus-flag"])
    assert exc.value.code == 2


def test_cli_bad_scenario_and_powers(tmp_path):
    with pytest.raises(SystemExit):
        cli.main(["run", "--scenario", str(tmp_path / "missing.json")])
    with pytest.raises(SystemExit):
        cli.main(["sweep", "--powers", "20,abc"])
    with pytest.raises(SystemExit):
        cli.main(["sweep", "--powers", "10"])  # below the radio floor
    with pytest.raises(SystemExit):
        cli.main(["compare", "--seeds", "0"])


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "whmcsim.cli", "validate"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert "PASS" in proc.stdout
