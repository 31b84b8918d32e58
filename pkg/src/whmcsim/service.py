"""WebSocket session server: a live operator drives the batch engine.

One WebSocket connection owns one session which owns one simulation;
connections share nothing mutable.  Text frames carry one JSON object
each, with a per-direction monotonically increasing ``seq``.  Lifecycle:

    hello -> configure -> start -> (state stream) -> report -> end

with pause/resume while running.  Out-of-order transitions draw an error
reply and leave the session unchanged; malformed JSON draws an error and
keeps the connection open.

Inputs are validated by ``human.live_input_adapter``, queued, and drained
at the next control-period boundary, so they traverse the simulated human
link and can be lost exactly like the scripted operator's commands.  The
engine's input log (period, kind, force) makes every session replayable
offline through ``orchestrator.replay_from_log``.

Pacing: with ``pacing_factor`` p > 0 the ticker advances one control
period per wall deadline T/p on a fixed deadline grid, so late ticks are
executed rather than skipped; p = 0 free-runs the whole scenario and
suppresses the stream until the final snapshot.  ``decimation`` (default
2) thins the state stream.
"""

from __future__ import annotations

import asyncio
import json
import math
import os
import uuid
from dataclasses import replace
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from . import scenario as sc
from .human import ProtocolError, live_input_adapter
from .orchestrator import Simulation
from .wireless import to_db

PROTOCOL_VERSION = 1
DEFAULT_DECIMATION = 2

PHASE_NEW = "new"
PHASE_CONFIGURED = "configured"
PHASE_RUNNING = "running"
PHASE_PAUSED = "paused"
PHASE_ENDED = "ended"

# client -> server message types; state/report/error flow the other way
_CLIENT_TYPES = ("hello", "configure", "start", "pause", "resume", "input", "end")
_SERVER_ONLY_TYPES = ("state", "report", "error")

HOST_ENV = "WHMCSIM_HOST"
PORT_ENV = "WHMCSIM_PORT"
STATIC_ENV = "WHMCSIM_STATIC"
TRACE_ENV = "WHMCSIM_TRACE_DIR"


def _default_static_dir() -> Path:
    return Path(__file__).resolve().parents[2] / "frontend" / "dist"


class LiveSession:
    """Protocol state machine plus the ticker that paces one simulation."""

    def __init__(self, ws: WebSocket, trace_dir: Path | None):
        self.ws = ws
        self.id = uuid.uuid4().hex[:12]
        self.trace_dir = trace_dir
        self.phase = PHASE_NEW
        self.greeted = False
        self.scenario: sc.Scenario | None = None
        self.sim: Simulation | None = None
        self.pacing = 1.0
        self.decimation = DEFAULT_DECIMATION
        self.server_seq = 0
        self.last_client_seq: int | None = None
        self.pending = []  # validated HumanActions awaiting the next period
        self.audit = []  # client-side metadata for each accepted input
        self.ticker: asyncio.Task | None = None
        self.lock = asyncio.Lock()
        self.send_lock = asyncio.Lock()
        self.resume_event = asyncio.Event()
        self.resume_event.set()
        self.report_sent = False
        self.disconnected = False
        self.last_state_period: int | None = None

    # -- outbound ------------------------------------------------------------

    async def _send(self, payload: dict) -> None:
        if self.disconnected:
            return
        async with self.send_lock:
            framed = {"type": payload["type"], "seq": self.server_seq}
            framed.update({k: v for k, v in payload.items() if k != "type"})
            self.server_seq += 1
            try:
                await self.ws.send_text(json.dumps(framed))
            except (WebSocketDisconnect, RuntimeError):
                self.disconnected = True

    async def _error(self, code: str, detail: str, in_reply_to: int | None = None) -> None:
        await self._send(
            {"type": "error", "error": code, "detail": detail, "in_reply_to": in_reply_to}
        )

    def _state_payload(self) -> dict:
        state = self.sim.current_state()
        links = {}
        for slot in sc.LINK_SLOTS:
            outcome = (self.sim.last_outcomes or {}).get(slot)
            if outcome is None:
                links[slot] = {"delivered": None, "snr_db": None}
            else:
                snr = float(outcome.instantaneous_snr)
                links[slot] = {
                    "delivered": bool(outcome.delivered),
                    "snr_db": to_db(snr) if snr > 0 else None,
                }
        self.last_state_period = self.sim.period
        return {
            "type": "state",
            "period": self.sim.period,
            "t": self.sim.current_time(),
            "theta": float(state.theta),
            "x": float(state.x),
            "weight_present": bool(state.weight_present),
            "accumulated_cost": float(self.sim.current_accumulated_cost),
            "links": links,
        }

    # -- inbound frames -------------------------------------------------------

    async def handle_frame(self, raw: str) -> None:
        try:
            msg = json.loads(raw)
        except json.JSONDecodeError as err:
            await self._error("malformed-json", f"frame is not valid JSON: {err}")
            return
        if not isinstance(msg, dict):
            await self._error("invalid-message", "frame must be a JSON object")
            return

        seq = msg.get("seq")
        if not isinstance(seq, int) or isinstance(seq, bool):
            await self._error("invalid-message", "'seq' must be an integer")
            return
        if self.last_client_seq is not None and seq <= self.last_client_seq:
            await self._error(
                "out-of-order",
                f"client seq must increase: got {seq} after {self.last_client_seq}",
                seq,
            )
            return
        self.last_client_seq = seq

        mtype = msg.get("type")
        if mtype in _SERVER_ONLY_TYPES:
            await self._error("invalid-message", f"'{mtype}' is server-emitted only", seq)
            return
        if mtype not in _CLIENT_TYPES:
            await self._error("invalid-message", f"unknown message type {mtype!r}", seq)
            return

        handler = getattr(self, f"_on_{mtype}")
        await handler(msg, seq)

    async def _on_hello(self, msg: dict, seq: int) -> None:
        if self.greeted:
            await self._error("out-of-order", "hello already exchanged", seq)
            return
        self.greeted = True
        await self._send(
            {
                "type": "hello",
                "server": "whmcsim",
                "protocol": PROTOCOL_VERSION,
                "session": self.id,
                "phase": self.phase,
                "presets": list(sc.preset_names()),
            }
        )

    async def _on_configure(self, msg: dict, seq: int) -> None:
        if not self.greeted or self.phase not in (PHASE_NEW, PHASE_CONFIGURED):
            await self._error("out-of-order", f"configure not allowed in phase {self.phase}", seq)
            return

        spec = msg.get("scenario")
        try:
            if isinstance(spec, str):
                scen = sc.preset(spec)
            elif isinstance(spec, dict):
                scen = sc.parse_scenario(spec)
            else:
                raise sc.ConfigurationError(
                    "'scenario' must be a preset name or a scenario object"
                )
            seed = msg.get("seed")
            if seed is not None:
                if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
                    raise sc.ConfigurationError("'seed' must be a non-negative integer")
                scen = replace(scen, master_seed=seed)
            pacing = msg.get("pacing_factor", 1.0)
            if (
                isinstance(pacing, bool)
                or not isinstance(pacing, (int, float))
                or not math.isfinite(pacing)
                or pacing < 0
            ):
                raise sc.ConfigurationError("'pacing_factor' must be a finite number >= 0")
            decimation = msg.get("decimation", DEFAULT_DECIMATION)
            if isinstance(decimation, bool) or not isinstance(decimation, int) or decimation < 1:
                raise sc.ConfigurationError("'decimation' must be an integer >= 1")
            sim = Simulation(scen, external_mode=True)
        except sc.ConfigurationError as err:
            await self._error("invalid-configuration", str(err), seq)
            return

        self.scenario = scen
        self.sim = sim
        self.pacing = float(pacing)
        self.decimation = decimation
        self.pending.clear()
        self.audit.clear()
        self.phase = PHASE_CONFIGURED
        await self._send(
            {
                "type": "configure",
                "session": self.id,
                "phase": self.phase,
                "scenario": sc.serialize_scenario(scen),
                "pacing_factor": self.pacing,
                "decimation": self.decimation,
                "periods": scen.periods,
            }
        )

    async def _on_start(self, msg: dict, seq: int) -> None:
        if self.phase != PHASE_CONFIGURED:
            await self._error("out-of-order", f"start not allowed in phase {self.phase}", seq)
            return
        self.phase = PHASE_RUNNING
        self.resume_event.set()
        await self._send({"type": "start", "phase": self.phase})
        if self.pacing > 0:
            await self._send(self._state_payload())  # period-0 snapshot
        self.ticker = asyncio.create_task(self._run_ticker())

    async def _on_pause(self, msg: dict, seq: int) -> None:
        if self.phase != PHASE_RUNNING:
            await self._error("out-of-order", f"pause not allowed in phase {self.phase}", seq)
            return
        self.phase = PHASE_PAUSED
        self.resume_event.clear()
        await self._send({"type": "pause", "phase": self.phase})

    async def _on_resume(self, msg: dict, seq: int) -> None:
        if self.phase != PHASE_PAUSED:
            await self._error("out-of-order", f"resume not allowed in phase {self.phase}", seq)
            return
        self.phase = PHASE_RUNNING
        self.resume_event.set()
        await self._send({"type": "resume", "phase": self.phase})

    async def _on_input(self, msg: dict, seq: int) -> None:
        if self.phase != PHASE_RUNNING:
            await self._error("out-of-order", f"input outside running phase ({self.phase})", seq)
            return
        stamp = msg.get("t_client")
        if isinstance(stamp, bool) or not isinstance(stamp, (int, float)) or not math.isfinite(stamp):
            await self._error("invalid-input", "input needs a finite numeric 't_client'", seq)
            return
        try:
            action = live_input_adapter(msg, self.scenario.human.human_force_level)
        except ProtocolError as err:
            await self._error("invalid-input", str(err), seq)
            return
        self.pending.append(action)
        self.audit.append(
            {
                "client_seq": seq,
                "t_client": float(stamp),
                "action": msg.get("action"),
                "value": msg.get("value"),
            }
        )

    async def _on_end(self, msg: dict, seq: int) -> None:
        if self.phase not in (PHASE_CONFIGURED, PHASE_RUNNING, PHASE_PAUSED):
            await self._error("out-of-order", f"end not allowed in phase {self.phase}", seq)
            return
        ticker = self.ticker
        if ticker is not None and not ticker.done():
            ticker.cancel()
            await asyncio.gather(ticker, return_exceptions=True)
        await self._finish("client-end")

    # -- pacing ---------------------------------------------------------------

    async def _run_ticker(self) -> None:
        loop = asyncio.get_running_loop()
        period_s = self.scenario.control_period
        next_deadline = loop.time()
        try:
            while True:
                if self.phase == PHASE_ENDED or self.sim.finished:
                    break
                if self.phase == PHASE_PAUSED:
                    await self.resume_event.wait()
                    next_deadline = loop.time()  # paused time is not "late"
                    continue
                if self.pacing > 0:
                    next_deadline += period_s / self.pacing
                    # a late tick still runs; sleep(0) keeps the loop fair
                    await asyncio.sleep(max(0.0, next_deadline - loop.time()))
                elif self.sim.period % 64 == 63:
                    await asyncio.sleep(0)
                async with self.lock:
                    if self.phase != PHASE_RUNNING or self.sim.finished:
                        continue
                    actions = tuple(self.pending)
                    self.pending.clear()
                    self.sim.step(actions)
                    if self.pacing > 0 and self.sim.period % self.decimation == 0:
                        await self._send(self._state_payload())
            await asyncio.shield(self._finish("finished"))
        except asyncio.CancelledError:
            raise

    async def _finish(self, reason: str) -> None:
        async with self.lock:
            if self.report_sent:
                return
            self.report_sent = True
            self.phase = PHASE_ENDED
            result = self.sim.finalize()
            if self.last_state_period != self.sim.period:
                await self._send(self._state_payload())
            await self._send(
                {
                    "type": "report",
                    "reason": reason,
                    "final_accumulated_cost": result.final_cost,
                    "periods": int(result.t.size),
                    "aborted": result.aborted,
                    "qoc": result.qoc.to_dict(),
                    "input_log": [
                        {"period": item.period, "kind": item.kind, "force": item.force}
                        for item in result.input_log
                    ],
                }
            )
            await self._send({"type": "end", "phase": self.phase, "reason": reason})
            self._write_trace(result, reason)

    def _write_trace(self, result, reason: str) -> None:
        if self.trace_dir is None:
            return
        inputs = []
        for i, item in enumerate(result.input_log):
            entry = {"period": item.period, "kind": item.kind, "force": item.force}
            if i < len(self.audit):
                entry.update(self.audit[i])
            inputs.append(entry)
        for leftover in self.audit[len(result.input_log):]:
            inputs.append({"period": None, **leftover})  # queued but never applied
        trace = {
            "session": self.id,
            "reason": reason,
            "scenario": sc.serialize_scenario(self.scenario),
            "pacing_factor": self.pacing,
            "decimation": self.decimation,
            "periods": int(result.t.size),
            "aborted": result.aborted,
            "final_accumulated_cost": result.final_cost,
            "qoc": result.qoc.to_dict(),
            "inputs": inputs,
        }
        self.trace_dir.mkdir(parents=True, exist_ok=True)
        path = self.trace_dir / f"{self.id}.json"
        path.write_text(json.dumps(trace, indent=2) + "\n", encoding="utf-8")

    async def shutdown(self) -> None:
        self.disconnected = True
        if self.ticker is not None and not self.ticker.done():
            self.ticker.cancel()
            await asyncio.gather(self.ticker, return_exceptions=True)


def create_app(static_dir: str | Path | None = None, trace_dir: str | Path | None = None) -> FastAPI:
    """Build the session-service app; directories default from environment."""
    if static_dir is None:
        static_dir = os.environ.get(STATIC_ENV) or _default_static_dir()
    static_dir = Path(static_dir)
    if trace_dir is None:
        trace_dir = os.environ.get(TRACE_ENV)
    trace_path = Path(trace_dir) if trace_dir else None

    app = FastAPI(title="whmcsim session service")

    @app.get("/presets")
    def presets() -> list[dict]:
        return [
            {
                "name": name,
                "description": sc.PRESET_DESCRIPTIONS.get(name, ""),
                "scenario": sc.serialize_scenario(sc.preset(name)),
            }
            for name in sc.preset_names()
        ]

    @app.websocket("/session")
    async def session_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        session = LiveSession(ws, trace_path)
        try:
            while True:
                raw = await ws.receive_text()
                await session.handle_frame(raw)
        except WebSocketDisconnect:
            pass
        finally:
            await session.shutdown()

    if static_dir.is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="console")

    return app


def main() -> int:
    import uvicorn

    host = os.environ.get(HOST_ENV, "127.0.0.1")
    port = int(os.environ.get(PORT_ENV, "8765"))
    uvicorn.run(create_app(), host=host, port=port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
