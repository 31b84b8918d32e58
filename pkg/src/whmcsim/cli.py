"""Batch command line: run / compare / sweep / validate.

Outputs are byte-deterministic for fixed (scenario, seed, flags); see
tables.py for the CSV schemas.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace

import numpy as np

from . import scenario as sc
from .control import dare_residual, design_lqr
from .dynamics import PlantParams, PlantState, derivative, rk4_step, total_energy
from .human import ACTION_FORCE, ACTION_REMOVE_WEIGHT, HumanAction, NO_ACTION
from .orchestrator import arbitrate, compare_decision_makers, run_scenario, snr_sweep
from .tables import (
    validate_table,
    write_comparison_tables,
    write_run_table,
    write_sweep_table,
)
from .wireless import analytic_outage, is_delivered, mean_snr

DEFAULT_POWER_GRID = (20.0, 23.0, 26.0, 29.0, 32.0, 35.0)


def _load(name_or_path: str) -> sc.Scenario:
    try:
        return sc.load_scenario(name_or_path)
    except (OSError, ValueError) as exc:
        raise SystemExit(f"error: cannot load scenario {name_or_path!r}: {exc}")


def _seed_list(count: int) -> list[int]:
    if count < 1:
        raise SystemExit("error: --seeds must be >= 1")
    return list(range(count))


def cmd_run(args: argparse.Namespace) -> int:
    scen = _load(args.scenario)
    if args.seed is not None:
        scen = replace(scen, master_seed=args.seed)
    result = run_scenario(scen)
    path = write_run_table(result, args.out)
    summary = {
        "scenario": scen.name,
        "master_seed": scen.master_seed,
        "fingerprint": result.fingerprint,
        "rows": int(result.t.size),
        "aborted": result.aborted,
        "qoc": result.qoc.to_dict(),
    }
    print(json.dumps(summary, sort_keys=True, indent=2))
    print(f"wrote {path}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    base = _load(args.scenario)
    comp = compare_decision_makers(base, _seed_list(args.seeds))
    path, mean_path = write_comparison_tables(comp, args.out)
    for variant in (sc.MACHINE_ONLY, sc.HUMAN_ONLY, sc.WHMC):
        finals = comp.final_costs(variant)
        print(
            f"{variant}: mean final cost {finals.mean():.9g} over {finals.size} seeds"
        )
    print(f"wrote {path} and {mean_path}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    base = _load(args.scenario)
    try:
        powers = tuple(float(tok) for tok in args.powers.split(",") if tok.strip())
    except ValueError:
        raise SystemExit(f"error: --powers must be comma-separated numbers, got {args.powers!r}")
    try:
        sweep = snr_sweep(base, powers, _seed_list(args.seeds))
    except ValueError as exc:
        raise SystemExit(f"error: {exc}")
    path = write_sweep_table(sweep, args.out)
    for point in sweep.points:
        print(
            f"{point.attention} @ {point.power_dbm:g} dBm: "
            f"mean final cost {point.mean_final_cost:.9g}"
        )
    print(f"wrote {path}")
    return 0


def _invariant_checks():
    """Fast self-contained battery behind `validate` with no file arguments."""
    params = PlantParams()

    def equilibrium():
        ders = derivative(PlantState(), 0.0, params)
        return all(v == 0.0 for v in ders)

    def energy_drift():
        state = PlantState(theta=math.pi / 6)
        e0 = total_energy(state, params)
        for _ in range(2000):
            state = rk4_step(state, 0.0, params, 0.001)
        return abs(total_energy(state, params) - e0) / max(abs(e0), 1.0) < 1e-6

    def rk4_order():
        def integrate(h, steps):
            state = PlantState(theta=0.3)
            for _ in range(steps):
                state = rk4_step(state, 0.0, params, h)
            return state.theta

        ref = integrate(1e-5, 20000)
        coarse = integrate(4e-3, 50)
        fine = integrate(2e-3, 100)
        ratio = abs(coarse - ref) / abs(fine - ref)
        return 12.0 <= ratio <= 20.0

    def dare():
        design = design_lqr(params, 0.01)
        residual = dare_residual(
            design.discrete.a, design.discrete.b, design.q, design.r, design.p
        )
        return residual < 1e-10 and design.closed_loop_spectral_radius() < 1.0

    def outage_formula():
        link = sc.preset("case-study-whmc").links.sensor_uplink
        snr = mean_snr(link)
        expected = 0.089043256990142781  # 1 - exp(-(2^2-1)/32.168178384981011)
        return abs(analytic_outage(snr, 2.0) - expected) < 1e-12 and is_delivered(
            snr, 2.0, 3.0 / snr
        )

    def determinism():
        scen = replace(sc.preset("case-study-whmc"), duration=1.0, master_seed=5)
        a = run_scenario(scen)
        b = run_scenario(scen)
        return (
            np.array_equal(a.theta, b.theta)
            and np.array_equal(a.accumulated_cost, b.accumulated_cost)
            and a.final_cost == b.final_cost
        )

    def arbitration_grid():
        force = HumanAction(ACTION_FORCE, -60.0)
        remove = HumanAction(ACTION_REMOVE_WEIGHT)
        cases = (
            (sc.MACHINE_DOMINATED, NO_ACTION, 12.0, False),
            (sc.MACHINE_DOMINATED, force, 12.0, False),
            (sc.MACHINE_DOMINATED, remove, 12.0, True),
            (sc.SYMBIOSIS, NO_ACTION, 12.0, False),
            (sc.SYMBIOSIS, force, -48.0, False),
            (sc.SYMBIOSIS, remove, 12.0, True),
            (sc.HUMAN_DOMINATED, NO_ACTION, 0.0, False),
            (sc.HUMAN_DOMINATED, force, -60.0, False),
            (sc.HUMAN_DOMINATED, remove, 0.0, True),
        )
        for topology, action, want, wants_event in cases:
            applied, event = arbitrate(topology, 12.0, action, 200.0)
            if applied != want or (event is not None) != wants_event:
                return False
        return True

    def cost_accounting():
        scen = replace(sc.preset("case-study-whmc"), duration=2.0, master_seed=3)
        result = run_scenario(scen)
        diffs = np.diff(result.accumulated_cost)
        return (diffs >= 0).all() and np.allclose(
            result.accumulated_cost, np.cumsum(result.step_cost)
        )

    return (
        ("plant equilibrium is a fixed point", equilibrium),
        ("energy drift < 1e-6 over 2 s uncontrolled", energy_drift),
        ("integrator shows 4th-order convergence", rk4_order),
        ("DARE residual < 1e-10 and closed loop stable", dare),
        ("outage formula matches frozen case-study value", outage_formula),
        ("identical scenario and seed give identical runs", determinism),
        ("arbitration grid follows the topology rules", arbitration_grid),
        ("accumulated cost is the running sum of step costs", cost_accounting),
    )


def cmd_validate(args: argparse.Namespace) -> int:
    failures = 0
    if args.paths:
        for path in args.paths:
            issues = validate_table(path)
            if issues:
                failures += 1
                print(f"FAIL {path}")
                for issue in issues:
                    print(f"  {issue}")
            else:
                print(f"PASS {path}")
    else:
        for name, check in _invariant_checks():
            try:
                ok = check()
            except Exception as exc:  # a crash is a failure, not an abort
                ok = False
                print(f"FAIL {name} ({exc})")
                failures += 1
                continue
            if ok:
                print(f"PASS {name}")
            else:
                print(f"FAIL {name}")
                failures += 1
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="whmc",
        description="Wireless human-machine collaboration cart-pole simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one scenario and write its trace CSV")
    run_p.add_argument("--scenario", default="case-study-whmc", help="preset name or JSON file")
    run_p.add_argument("--seed", type=int, default=None, help="override the master seed")
    run_p.add_argument("--out", default="run.csv", help="output CSV path")
    run_p.set_defaults(func=cmd_run)

    cmp_p = sub.add_parser("compare", help="run the three decision makers over a seed batch")
    cmp_p.add_argument("--scenario", default="fig5a", help="preset name or JSON file")
    cmp_p.add_argument("--seeds", type=int, default=20, help="number of seeds (0..N-1)")
    cmp_p.add_argument("--out", default="compare.csv", help="output CSV path")
    cmp_p.set_defaults(func=cmd_compare)

    sweep_p = sub.add_parser("sweep", help="sweep transmit power for engaged and distracted operators")
    sweep_p.add_argument("--scenario", default="fig5b-engaged", help="preset name or JSON file")
    sweep_p.add_argument(
        "--powers",
        default=",".join(f"{p:g}" for p in DEFAULT_POWER_GRID),
        help="comma-separated transmit powers in dBm",
    )
    sweep_p.add_argument("--seeds", type=int, default=20, help="number of seeds per grid point")
    sweep_p.add_argument("--out", default="sweep.csv", help="output CSV path")
    sweep_p.set_defaults(func=cmd_sweep)

    val_p = sub.add_parser(
        "validate",
        help="check result CSVs, or run the invariant suite when no files are given",
    )
    val_p.add_argument("paths", nargs="*", help="CSV files to check")
    val_p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
