/**
 * Operator console entry point: wires the preset picker, session buttons,
 * keyboard bindings, and the canvas render loop to one live session.
 *
 * All browser dependencies (document, WebSocket, fetch, animation frames,
 * clocks) are injected through ConsoleDeps so the whole console can run
 * under a test DOM with scripted transports.
 */

import {
  SessionClient,
  decodeServerMessage,
  sessionUrl,
  type ClientCommand,
} from "./protocol.js";
import {
  applyServer,
  forceAuthority,
  initialView,
  markClosed,
  recordInput,
  type ViewModel,
} from "./viewmodel.js";
import { KeyBindings } from "./keyboard.js";
import { renderFrame, type Draw2D } from "./render.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
}

export interface ConsoleDeps {
  document: Document;
  openSocket(url: string): SocketLike;
  fetchJson(url: string): Promise<unknown>;
  requestFrame(cb: () => void): void;
  /** Monotonic ms clock for staleness checks and throttles. */
  now(): number;
  /** Epoch seconds for input timestamps. */
  wallClock(): number;
  location: { protocol: string; host: string };
  /** 2D context lookup; null disables drawing (headless test DOMs). */
  getDrawContext(canvas: HTMLCanvasElement): Draw2D | null;
}

export interface ConsoleHandle {
  view(): ViewModel;
  /** The live client, or null before the first connect. */
  client(): SessionClient | null;
}

function must<T extends Element>(doc: Document, id: string): T {
  const el = doc.getElementById(id);
  if (el === null) {
    throw new Error(`console markup is missing #${id}`);
  }
  return el as unknown as T;
}

export function bootConsole(deps: ConsoleDeps): ConsoleHandle {
  const doc = deps.document;
  const presetSel = must<HTMLSelectElement>(doc, "preset");
  const seedInput = must<HTMLInputElement>(doc, "seed");
  const pacingInput = must<HTMLInputElement>(doc, "pacing");
  const btnStart = must<HTMLButtonElement>(doc, "btn-start");
  const btnPause = must<HTMLButtonElement>(doc, "btn-pause");
  const btnResume = must<HTMLButtonElement>(doc, "btn-resume");
  const btnEnd = must<HTMLButtonElement>(doc, "btn-end");
  const canvas = must<HTMLCanvasElement>(doc, "scene");
  const statusEl = must<HTMLElement>(doc, "status");

  let view = initialView();
  let client: SessionClient | null = null;
  let socket: SocketLike | null = null;

  const keys = new KeyBindings({
    phase: () => view.phase,
    forceAuthority: () => forceAuthority(view.scenario),
    forceLevel: () => view.scenario?.human.human_force_level ?? 0,
    controlPeriod: () => view.scenario?.control_period ?? 0.01,
    now: deps.now,
  });

  function setStatus(): void {
    const parts = [`connection: ${view.connection}`, `phase: ${view.phase}`];
    if (view.report !== null) {
      parts.push(
        `final cost ${view.report.final_accumulated_cost.toFixed(6)}`,
        `${view.report.periods} periods`,
        view.report.aborted ? "aborted" : "completed",
      );
    }
    if (view.errors.length > 0) {
      parts.push(`last error: ${view.errors[view.errors.length - 1]}`);
    }
    statusEl.textContent = parts.join(" | ");
  }

  function sendCommand(command: ClientCommand): void {
    if (client === null || client.dead) {
      return;
    }
    client.send(command);
  }

  function connectAndStart(): void {
    if (socket !== null && view.connection === "open" && view.phase !== "ended") {
      // Already connected: treat the button as configure-and-go again
      // only before start; mid-run restarts need a fresh page.
      if (view.phase === "new" || view.phase === "configured") {
        sendConfigure();
      }
      return;
    }
    view = initialView();
    socket = deps.openSocket(sessionUrl(deps.location));
    client = new SessionClient(socket, {
      onConnectionError: () => {
        view = markClosed(view);
        setStatus();
        socket?.close();
      },
    });
    socket.onopen = () => {
      sendCommand({ type: "hello" });
    };
    socket.onclose = () => {
      view = markClosed(view);
      setStatus();
    };
    socket.onmessage = (ev) => {
      if (typeof ev.data !== "string") {
        return;
      }
      const msg = decodeServerMessage(ev.data);
      if (msg === null) {
        return;
      }
      view = applyServer(view, msg, deps.now());
      if (msg.type === "hello") {
        fillPresets(view.presets);
        sendConfigure();
      } else if (msg.type === "configure") {
        sendCommand({ type: "start" });
      }
      setStatus();
    };
  }

  function sendConfigure(): void {
    const seed = Number.parseInt(seedInput.value, 10);
    const pacing = Number.parseFloat(pacingInput.value);
    const command: ClientCommand = {
      type: "configure",
      scenario: presetSel.value || "case-study-whmc",
    };
    if (Number.isInteger(seed) && seed >= 0) {
      command.seed = seed;
    }
    if (Number.isFinite(pacing) && pacing >= 0) {
      command.pacing_factor = pacing;
    }
    sendCommand(command);
  }

  function fillPresets(names: string[]): void {
    if (presetSel.options.length > 0 || names.length === 0) {
      return;
    }
    for (const name of names) {
      const opt = doc.createElement("option");
      opt.value = name;
      opt.textContent = name;
      presetSel.appendChild(opt);
    }
  }

  btnStart.addEventListener("click", connectAndStart);
  btnPause.addEventListener("click", () => sendCommand({ type: "pause" }));
  btnResume.addEventListener("click", () => sendCommand({ type: "resume" }));
  btnEnd.addEventListener("click", () => sendCommand({ type: "end" }));

  doc.addEventListener("keydown", (ev) => {
    const intent = keys.keydown({ code: ev.code, repeat: ev.repeat });
    if (intent === null || client === null || client.dead) {
      return;
    }
    const command: ClientCommand = {
      type: "input",
      action: intent.action,
      t_client: deps.wallClock(),
    };
    if (intent.value !== undefined) {
      command.value = intent.value;
    }
    const seq = client.send(command);
    view = recordInput(view, {
      seq,
      t_client: command.t_client,
      action: intent.action,
      ...(intent.value !== undefined ? { value: intent.value } : {}),
    });
    ev.preventDefault();
  });
  doc.addEventListener("keyup", (ev) => keys.keyup({ code: ev.code, repeat: ev.repeat }));

  // Fill the preset picker early so the first click has options; the
  // hello reply refills it if the fetch lost the race.
  void deps
    .fetchJson("/presets")
    .then((doc_) => {
      if (Array.isArray(doc_)) {
        fillPresets(
          doc_
            .map((p) => (typeof p === "object" && p !== null ? (p as { name?: unknown }).name : null))
            .filter((n): n is string => typeof n === "string"),
        );
      }
    })
    .catch(() => {});

  const ctx = deps.getDrawContext(canvas);
  function frame(): void {
    if (ctx !== null) {
      renderFrame(ctx, view, deps.now(), canvas.width, canvas.height);
    }
    deps.requestFrame(frame);
  }
  deps.requestFrame(frame);
  setStatus();

  return { view: () => view, client: () => client };
}

/** Browser bootstrap; tests import bootConsole with their own deps. */
export function bootBrowser(): ConsoleHandle {
  return bootConsole({
    document,
    openSocket: (url) => new WebSocket(url) as unknown as SocketLike,
    fetchJson: (url) => fetch(url).then((r) => r.json()),
    requestFrame: (cb) => requestAnimationFrame(cb),
    now: () => performance.now(),
    wallClock: () => Date.now() / 1000,
    location: window.location,
    getDrawContext: (canvas) => canvas.getContext("2d") as unknown as Draw2D | null,
  });
}
