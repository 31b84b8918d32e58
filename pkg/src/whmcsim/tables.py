"""CSV result tables: run traces, decision-maker comparisons, power sweeps.

Byte determinism contract: numbers are serialized with 9 significant digits
(%.9g), negative zero normalized to zero, rows joined with "\\n", so a fixed
(scenario, seed) pair always produces an identical file.
"""

from __future__ import annotations

import math
from pathlib import Path

from .human import ACTION_FORCE, ACTION_NONE, ACTION_REMOVE_WEIGHT
from .orchestrator import ComparisonResult, RunResult, SweepResult

RUN_COLUMNS = (
    "t",
    "x",
    "x_dot",
    "theta",
    "theta_dot",
    "machine_force",
    "applied_force",
    "human_action",
    "uplink_delivered",
    "downlink_delivered",
    "humanlink_delivered",
    "step_cost",
    "accumulated_cost",
)

COMPARE_COLUMNS = ("variant", "seed", "t", "accumulated_cost")
COMPARE_MEAN_COLUMNS = ("variant", "t", "mean_accumulated_cost")
SWEEP_COLUMNS = (
    "attention",
    "power_dbm",
    "mean_final_cost",
    "std_final_cost",
    "n_seeds",
    "uplink_delivery_ratio",
    "downlink_delivery_ratio",
    "humanlink_delivery_ratio",
)

_ACTION_LABELS = {0: ACTION_NONE, 1: ACTION_REMOVE_WEIGHT, 2: ACTION_FORCE}


def format_number(value: float) -> str:
    """%.9g with negative zero folded to zero."""
    if value == 0.0:
        value = 0.0
    return "%.9g" % value


def _action_label(kind_code: int, force: float) -> str:
    kind = _ACTION_LABELS[int(kind_code)]
    if kind == ACTION_FORCE:
        return f"force:{format_number(force)}"
    return kind


def run_table_lines(result: RunResult):
    """Yield header + data lines for the per-period run table."""
    yield ",".join(RUN_COLUMNS)
    n = result.t.size
    fmt = format_number
    for k in range(n):
        yield ",".join(
            (
                fmt(result.t[k]),
                fmt(result.x[k]),
                fmt(result.x_dot[k]),
                fmt(result.theta[k]),
                fmt(result.theta_dot[k]),
                fmt(result.machine_force[k]),
                fmt(result.applied_force[k]),
                _action_label(result.human_action_kind[k], result.human_action_force[k]),
                str(int(result.uplink_delivered[k])),
                str(int(result.downlink_delivered[k])),
                str(int(result.humanlink_delivered[k])),
                fmt(result.step_cost[k]),
                fmt(result.accumulated_cost[k]),
            )
        )


def write_run_table(result: RunResult, path) -> Path:
    path = Path(path)
    path.write_text("\n".join(run_table_lines(result)) + "\n", newline="")
    return path


def comparison_table_lines(comp: ComparisonResult):
    yield ",".join(COMPARE_COLUMNS)
    for variant, seed, t, cost in comp.rows():
        yield f"{variant},{seed},{format_number(t)},{format_number(cost)}"


def comparison_mean_lines(comp: ComparisonResult):
    yield ",".join(COMPARE_MEAN_COLUMNS)
    for variant, t, cost in comp.mean_rows():
        yield f"{variant},{format_number(t)},{format_number(cost)}"


def write_comparison_tables(comp: ComparisonResult, path) -> tuple[Path, Path]:
    """Write the per-seed long-form table plus a seed-averaged companion
    (``<stem>_mean.csv`` next to the main file)."""
    path = Path(path)
    path.write_text("\n".join(comparison_table_lines(comp)) + "\n", newline="")
    mean_path = path.with_name(path.stem + "_mean" + (path.suffix or ".csv"))
    mean_path.write_text("\n".join(comparison_mean_lines(comp)) + "\n", newline="")
    return path, mean_path


def sweep_table_lines(sweep: SweepResult):
    yield ",".join(SWEEP_COLUMNS)
    for attention, power, mean_cost, std_cost, n_seeds, up, down, human in sweep.rows():
        yield ",".join(
            (
                attention,
                format_number(power),
                format_number(mean_cost),
                format_number(std_cost),
                str(n_seeds),
                format_number(up),
                format_number(down),
                format_number(human),
            )
        )


def write_sweep_table(sweep: SweepResult, path) -> Path:
    path = Path(path)
    path.write_text("\n".join(sweep_table_lines(sweep)) + "\n", newline="")
    return path


def _parse_float(token: str, where: str, issues: list[str]) -> float:
    try:
        value = float(token)
    except ValueError:
        issues.append(f"{where}: not a number: {token!r}")
        return math.nan
    if not math.isfinite(value):
        issues.append(f"{where}: non-finite value {token!r}")
    return value


def validate_table(path) -> list[str]:
    """Check a CSV written by this module; returns problems (empty = valid).

    The header row selects the schema; every known schema gets column-count,
    numeric-parse, and table-specific invariant checks.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        return [f"{path}: unreadable: {exc}"]
    lines = text.splitlines()
    if not lines:
        return [f"{path}: empty file"]
    header = tuple(lines[0].split(","))
    issues: list[str] = []
    if header == RUN_COLUMNS:
        _validate_run_rows(lines[1:], issues)
    elif header == COMPARE_COLUMNS:
        _validate_compare_rows(lines[1:], issues)
    elif header == COMPARE_MEAN_COLUMNS:
        _validate_mean_rows(lines[1:], issues)
    elif header == SWEEP_COLUMNS:
        _validate_sweep_rows(lines[1:], issues)
    else:
        issues.append(f"unknown header: {lines[0]!r}")
    return [f"{path}: {msg}" for msg in issues]


def _validate_run_rows(rows: list[str], issues: list[str]) -> None:
    last_acc = -math.inf
    last_t = -math.inf
    for i, row in enumerate(rows, start=2):
        parts = row.split(",")
        if len(parts) != len(RUN_COLUMNS):
            issues.append(f"line {i}: expected {len(RUN_COLUMNS)} columns, got {len(parts)}")
            continue
        t = _parse_float(parts[0], f"line {i} t", issues)
        for name, token in zip(RUN_COLUMNS[1:7], parts[1:7]):
            _parse_float(token, f"line {i} {name}", issues)
        action = parts[7]
        if action not in (ACTION_NONE, ACTION_REMOVE_WEIGHT) and not action.startswith("force:"):
            issues.append(f"line {i}: bad human_action {action!r}")
        for name, token in zip(RUN_COLUMNS[8:11], parts[8:11]):
            if token not in ("0", "1"):
                issues.append(f"line {i}: {name} must be 0 or 1, got {token!r}")
        step = _parse_float(parts[11], f"line {i} step_cost", issues)
        acc = _parse_float(parts[12], f"line {i} accumulated_cost", issues)
        if step < 0:
            issues.append(f"line {i}: negative step_cost")
        if t <= last_t:
            issues.append(f"line {i}: non-increasing t")
        if acc < last_acc - 1e-12:
            issues.append(f"line {i}: accumulated_cost decreased")
        last_acc, last_t = acc, t


def _validate_compare_rows(rows: list[str], issues: list[str]) -> None:
    last_acc: dict[tuple[str, str], float] = {}
    for i, row in enumerate(rows, start=2):
        parts = row.split(",")
        if len(parts) != 4:
            issues.append(f"line {i}: expected 4 columns, got {len(parts)}")
            continue
        variant, seed = parts[0], parts[1]
        if not seed.lstrip("-").isdigit():
            issues.append(f"line {i}: seed must be an integer, got {seed!r}")
        _parse_float(parts[2], f"line {i} t", issues)
        acc = _parse_float(parts[3], f"line {i} accumulated_cost", issues)
        key = (variant, seed)
        if acc < last_acc.get(key, -math.inf) - 1e-12:
            issues.append(f"line {i}: accumulated_cost decreased for {key}")
        last_acc[key] = acc


def _validate_mean_rows(rows: list[str], issues: list[str]) -> None:
    last_acc: dict[str, float] = {}
    for i, row in enumerate(rows, start=2):
        parts = row.split(",")
        if len(parts) != 3:
            issues.append(f"line {i}: expected 3 columns, got {len(parts)}")
            continue
        _parse_float(parts[1], f"line {i} t", issues)
        acc = _parse_float(parts[2], f"line {i} mean_accumulated_cost", issues)
        if acc < last_acc.get(parts[0], -math.inf) - 1e-12:
            issues.append(f"line {i}: mean_accumulated_cost decreased for {parts[0]!r}")
        last_acc[parts[0]] = acc


def _validate_sweep_rows(rows: list[str], issues: list[str]) -> None:
    for i, row in enumerate(rows, start=2):
        parts = row.split(",")
        if len(parts) != len(SWEEP_COLUMNS):
            issues.append(f"line {i}: expected {len(SWEEP_COLUMNS)} columns, got {len(parts)}")
            continue
        for name, token in zip(SWEEP_COLUMNS[1:4], parts[1:4]):
            _parse_float(token, f"line {i} {name}", issues)
        if not parts[4].isdigit() or int(parts[4]) < 1:
            issues.append(f"line {i}: n_seeds must be a positive integer, got {parts[4]!r}")
        for name, token in zip(SWEEP_COLUMNS[5:], parts[5:]):
            ratio = _parse_float(token, f"line {i} {name}", issues)
            if not 0.0 <= ratio <= 1.0:
                issues.append(f"line {i}: {name} outside [0, 1]")
