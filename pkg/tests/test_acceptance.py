"""Acceptance gate: one test per release criterion, one printed line each.

Each criterion prints "[criterion N] PASS ..." (or FAIL before re-raising),
so `pytest -v -s tests/test_acceptance.py` reads as a checklist.  Budgeted
runtimes are asserted too; the whole gate stays under ten minutes.
"""

import json
import math
import shutil
import subprocess
import time
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from whmcsim import cli
from whmcsim import scenario as sc
from whmcsim.control import (
    dare_residual,
    design_lqr,
    discretize_zoh,
    linearize_upright,
    lqr_gain,
    solve_dare,
)
from whmcsim.dynamics import PlantParams, PlantState, derivative, rk4_step, total_energy
from whmcsim.human import LoggedInput
from whmcsim.orchestrator import (
    compare_decision_makers,
    replay_from_log,
    run_scenario,
    snr_sweep,
)
from whmcsim.service import create_app
from whmcsim.wireless import (
    analytic_outage,
    average_gain,
    fading_samples,
    snr_threshold,
    to_db,
)

PARAMS = PlantParams()
ORACLE_GAIN_DB = -74.925735315677261
ORACLE_SNR_DB = 15.074264684322739


@contextmanager
def criterion(number, label):
    started = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"[criterion {number}] FAIL - {label}")
        raise
    print(f"[criterion {number}] PASS - {label} ({time.monotonic() - started:.1f}s)")


def test_criterion_1_physics():
    with criterion(1, "physics: equilibrium, energy drift, RK4 order"):
        # upright rest is an exact fixed point
        rest = PlantState(0.0, 0.0, 0.0, 0.0, False)
        stepped = rk4_step(rest, 0.0, PARAMS, 0.001)
        assert (stepped.x, stepped.x_dot, stepped.theta, stepped.theta_dot) == (0, 0, 0, 0)

        # unforced swing conserves energy to < 1e-6 relative over 10 s
        state = PlantState(0.0, 0.0, math.pi / 6, 0.0, False)
        reference = total_energy(state, PARAMS)
        for _ in range(10_000):
            state = rk4_step(state, 0.0, PARAMS, 0.001)
        drift = abs(total_energy(state, PARAMS) - reference) / abs(reference)
        assert drift < 1e-6

        # Richardson step-halving ratio ~ 2^4 for a 4th-order method
        def advance(h, steps):
            s = PlantState(0.0, 0.0, math.pi / 6, 0.0, False)
            for _ in range(steps):
                s = rk4_step(s, 1.5, PARAMS, h)
            return np.array([s.x, s.x_dot, s.theta, s.theta_dot])

        fine = advance(0.0005, 1600)
        err_h = np.linalg.norm(advance(0.002, 400) - fine)
        err_h2 = np.linalg.norm(advance(0.001, 800) - fine)
        ratio = err_h / err_h2
        assert 12.0 <= ratio <= 20.0, ratio


def test_criterion_2_control():
    with criterion(2, "control: DARE, stability, linearization, golden ratio"):
        design = design_lqr(PARAMS, 0.01)
        residual = dare_residual(
            design.discrete.a, design.discrete.b, design.q, design.r, design.p
        )
        assert residual < 1e-10, residual
        assert design.closed_loop_spectral_radius() < 1.0

        # analytic upright Jacobian vs central finite differences
        model = linearize_upright(PARAMS)
        eps = 1e-7
        fd_a = np.zeros((4, 4))
        base = np.zeros(4)
        for j in range(4):
            plus, minus = base.copy(), base.copy()
            plus[j] += eps
            minus[j] -= eps
            f_plus = derivative(PlantState(*plus, False), 0.0, PARAMS)
            f_minus = derivative(PlantState(*minus, False), 0.0, PARAMS)
            fd_a[:, j] = (np.array(f_plus) - np.array(f_minus)) / (2 * eps)
        fd_b = (
            np.array(derivative(PlantState(0, 0, 0, 0, False), eps, PARAMS))
            - np.array(derivative(PlantState(0, 0, 0, 0, False), -eps, PARAMS))
        ) / (2 * eps)
        assert np.max(np.abs(model.a - fd_a)) < 1e-6
        assert np.max(np.abs(model.b - fd_b)) < 1e-6

        # scalar sanity: a=b=q=r=1 has the golden ratio as its fixed point
        one = np.array([[1.0]])
        p = solve_dare(one, one, one, 1.0)
        assert abs(p[0, 0] - (1 + math.sqrt(5)) / 2) < 1e-9


def test_criterion_3_channel():
    with criterion(3, "channel: link budget and Monte-Carlo delivery"):
        started = time.monotonic()
        gain = average_gain(50.0, 915e6, 4.0, 2.9)
        assert abs(to_db(gain) - ORACLE_GAIN_DB) < 0.05
        snr_db = 20.0 + to_db(gain) - (-70.0)
        assert abs(snr_db - ORACLE_SNR_DB) < 0.05

        n = 1_000_000
        rng = np.random.default_rng(20260819)
        for rate in (0.5, 1.0, 2.0, 4.0):
            for gamma_db in (5.0, 15.0, 25.0):
                gamma = 10.0 ** (gamma_db / 10.0)
                fades = fading_samples(rng, n)
                delivered = np.count_nonzero(fades * gamma >= snr_threshold(rate)) / n
                expected = 1.0 - analytic_outage(gamma, rate)
                sigma = math.sqrt(expected * (1.0 - expected) / n)
                assert abs(delivered - expected) <= 3.0 * sigma, (rate, gamma_db)
        assert time.monotonic() - started < 60.0


def test_criterion_4_determinism(tmp_path):
    with criterion(4, "determinism: byte-identical CSV, distracted == machine-only"):
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["run", "--scenario", "case-study-whmc", "--seed", "7"]
        assert cli.main(argv + ["--out", str(out_a)]) == 0
        assert cli.main(argv + ["--out", str(out_b)]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()

        base = sc.preset("case-study-whmc")
        distracted = run_scenario(
            replace(base, human=replace(base.human, attention_mode="always_distracted"))
        )
        machine = run_scenario(replace(base, decision_maker=sc.MACHINE_ONLY))
        for field in (
            "t",
            "x",
            "x_dot",
            "theta",
            "theta_dot",
            "weight_present",
            "machine_force",
            "applied_force",
            "step_cost",
            "accumulated_cost",
            "uplink_delivered",
            "downlink_delivered",
            "humanlink_delivered",
        ):
            assert np.array_equal(getattr(distracted, field), getattr(machine, field)), field


def test_criterion_5_collaboration_beats_single_agents():
    with criterion(5, "cost comparison: collaboration wins, slope lower after event"):
        started = time.monotonic()
        comp = compare_decision_makers(sc.preset("fig5a"), range(20))
        finals = {v: comp.final_costs(v) for v in ("machine_only", "human_only", "whmc")}
        means = {v: float(np.mean(c)) for v, c in finals.items()}
        assert means["whmc"] < means["machine_only"]
        assert means["whmc"] < means["human_only"]

        per_seed = np.mean(
            (finals["whmc"] < finals["machine_only"]) & (finals["whmc"] < finals["human_only"])
        )
        assert per_seed >= 0.90, per_seed

        # post-event growth of the seed-averaged curves over [5 s, 30 s]
        t = comp.times
        i5, i30 = int(np.searchsorted(t, 5.0)), t.size - 1
        span = t[i30] - t[i5]
        slope = {
            v: (comp.mean_trajectory(v)[i30] - comp.mean_trajectory(v)[i5]) / span
            for v in ("machine_only", "whmc")
        }
        assert slope["whmc"] < slope["machine_only"], slope
        elapsed = time.monotonic() - started
        assert elapsed < 120.0, elapsed


def test_criterion_6_power_sweep():
    with criterion(6, "power sweep: engaged cost falls with power, distracted flat"):
        started = time.monotonic()
        powers = (20.0, 23.0, 26.0, 29.0, 32.0, 35.0)
        seeds = range(20)
        n = len(list(seeds))

        engaged = snr_sweep(sc.preset("fig5b-engaged"), powers, seeds)
        eng = [engaged.point("always_engaged", p) for p in powers]
        means = [pt.mean_final_cost for pt in eng]
        for lo, hi in zip(range(len(powers) - 1), range(1, len(powers))):
            sigma = math.sqrt(
                eng[lo].std_final_cost ** 2 / n + eng[hi].std_final_cost ** 2 / n
            )
            assert means[hi] <= means[lo] + 3.0 * sigma, (powers[lo], powers[hi])

        # paired one-sided 95% bound on cost(20 dBm) - cost(35 dBm)
        diffs = np.asarray(eng[0].final_costs) - np.asarray(eng[-1].final_costs)
        margin = 1.645 * np.std(diffs, ddof=1) / math.sqrt(n)
        assert float(np.mean(diffs)) > margin, (np.mean(diffs), margin)

        distracted = snr_sweep(sc.preset("fig5b-distracted"), powers, seeds)
        flat = [distracted.point("always_distracted", p).mean_final_cost for p in powers]
        spread = max(flat) - min(flat)
        assert spread < 0.10 * float(np.mean(flat)), (spread, np.mean(flat))
        elapsed = time.monotonic() - started
        assert elapsed < 300.0, elapsed


def test_criterion_7_protocol(tmp_path):
    with criterion(7, "protocol: ordering enforced, record/replay exact"):
        app = create_app(static_dir=tmp_path / "none", trace_dir=None)
        doc = {"preset": "case-study-whmc", "duration": 8.0}
        seed = 11
        with TestClient(app) as tc:
            with tc.websocket_connect("/session") as ws:
                ws.send_json({"type": "configure", "seq": 0, "scenario": doc})
                assert ws.receive_json()["error"] == "out-of-order"  # hello first
                ws.send_json({"type": "hello", "seq": 1})
                assert ws.receive_json()["type"] == "hello"
                ws.send_json({"type": "start", "seq": 2})
                assert ws.receive_json()["error"] == "out-of-order"  # configure first

                ws.send_json(
                    {
                        "type": "configure",
                        "seq": 3,
                        "scenario": doc,
                        "seed": seed,
                        "pacing_factor": 60,
                    }
                )
                assert ws.receive_json()["type"] == "configure"
                ws.send_json({"type": "start", "seq": 4})
                assert ws.receive_json()["type"] == "start"

                seq = 5
                report = None
                while report is None:
                    msg = ws.receive_json()
                    if msg["type"] == "state" and msg["weight_present"]:
                        ws.send_json(
                            {
                                "type": "input",
                                "seq": seq,
                                "action": "remove_weight",
                                "t_client": time.time(),
                            }
                        )
                        seq += 1
                    elif msg["type"] == "report":
                        report = msg

        log = [LoggedInput(e["period"], e["kind"], e["force"]) for e in report["input_log"]]
        assert log
        scen = replace(sc.parse_scenario(doc), master_seed=seed)
        replayed = replay_from_log(scen, log)
        assert replayed.final_cost == report["final_accumulated_cost"]
        assert json.dumps(report["qoc"])  # report payload is JSON-complete


FRONTEND = Path(__file__).resolve().parents[1] / "frontend"
DIST = FRONTEND / "dist"


@pytest.mark.skipif(
    not (DIST / "index.html").exists() or not (DIST / "app.js").exists(),
    reason="operator console not built (frontend/dist missing)",
)
def test_criterion_8_operator_console():
    with criterion(8, "operator console: served, case-study pose, one remove per press, replay"):
        seed = 3
        app = create_app(static_dir=DIST, trace_dir=None)
        with TestClient(app) as tc:
            # The session service serves the built console as its root page.
            page = tc.get("/")
            assert page.status_code == 200
            assert 'id="scene"' in page.text
            assert "app.js" in page.text
            bundle = tc.get("/app.js")
            assert bundle.status_code == 200
            assert "remove_weight" in bundle.text  # space binding wired
            assert "/session" in bundle.text  # talks to this endpoint

            # A console-shaped session: same frames the browser client sends.
            with tc.websocket_connect("/session") as ws:
                ws.send_json({"type": "hello", "seq": 1})
                hello = ws.receive_json()
                assert "case-study-whmc" in hello["presets"]
                ws.send_json(
                    {
                        "type": "configure",
                        "seq": 2,
                        "scenario": "case-study-whmc",
                        "seed": seed,
                        "pacing_factor": 60,
                        "decimation": 10,
                    }
                )
                assert ws.receive_json()["type"] == "configure"
                ws.send_json({"type": "start", "seq": 3})
                assert ws.receive_json()["type"] == "start"

                # The first rendered state is the case-study pose.
                first = ws.receive_json()
                assert first["type"] == "state"
                assert first["period"] == 0
                assert first["t"] == 0.0
                assert first["theta"] == math.pi / 6

                # One spacebar press: exactly one remove_weight frame.
                sent = False
                report = None
                while report is None:
                    msg = ws.receive_json()
                    if msg["type"] == "state" and msg["weight_present"] and not sent:
                        ws.send_json(
                            {
                                "type": "input",
                                "seq": 4,
                                "action": "remove_weight",
                                "t_client": time.time(),
                            }
                        )
                        sent = True
                    elif msg["type"] == "report":
                        report = msg

        assert sent
        assert len(report["input_log"]) == 1
        assert report["input_log"][0]["kind"] == "remove_weight"
        log = [LoggedInput(e["period"], e["kind"], e["force"]) for e in report["input_log"]]
        scen = replace(sc.preset("case-study-whmc"), master_seed=seed)
        assert replay_from_log(scen, log).final_cost == report["final_accumulated_cost"]

        # The console's own suite covers keydown handling and rendering;
        # run it when the toolchain is present in this checkout.
        npm = shutil.which("npm")
        if npm is not None and (FRONTEND / "node_modules").is_dir():
            proc = subprocess.run(
                [npm, "test", "--silent"],
                cwd=FRONTEND,
                capture_output=True,
                text=True,
                timeout=300,
            )
            assert proc.returncode == 0, proc.stdout + proc.stderr
