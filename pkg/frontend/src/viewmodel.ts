/**
 * Console view state as a pure fold over the session transcript.
 *
 * Everything drawn on screen derives from the received server frames plus
 * the locally recorded input log: applying the same transcript always
 * yields the same view, which is what makes session replays reviewable.
 * The reducer never extrapolates; between state frames the view simply
 * holds the last reported sample.
 */

import type {
  LinkReading,
  ScenarioDoc,
  ServerMessage,
  SessionPhase,
  StateMessage,
  ReportMessage,
} from "./protocol.js";

/** Width of the rolling accumulated-cost window, in simulated seconds. */
export const COST_WINDOW_S = 30;

/** Most errors worth keeping around for the status line. */
const MAX_ERRORS = 20;

export interface CostSample {
  t: number;
  cost: number;
}

export interface SentInput {
  seq: number;
  t_client: number;
  action: string;
  value?: number;
}

export interface ViewModel {
  connection: "connecting" | "open" | "closed";
  phase: SessionPhase;
  session: string | null;
  presets: string[];
  scenario: ScenarioDoc | null;
  pacingFactor: number | null;
  decimation: number | null;
  periods: number | null;
  latest: StateMessage | null;
  /** Accumulated cost over the last COST_WINDOW_S seconds of sim time. */
  costSeries: CostSample[];
  links: Record<string, LinkReading>;
  report: ReportMessage | null;
  endReason: string | null;
  errors: string[];
  /** Wall-clock ms of the most recent state frame, for staleness checks. */
  lastStateWallMs: number | null;
  inputLog: SentInput[];
}

export function initialView(): ViewModel {
  return {
    connection: "connecting",
    phase: "new",
    session: null,
    presets: [],
    scenario: null,
    pacingFactor: null,
    decimation: null,
    periods: null,
    latest: null,
    costSeries: [],
    links: {},
    report: null,
    endReason: null,
    errors: [],
    lastStateWallMs: null,
    inputLog: [],
  };
}

/** Fold one server frame into the view.  Returns a new view; never mutates. */
export function applyServer(view: ViewModel, msg: ServerMessage, wallMs: number): ViewModel {
  switch (msg.type) {
    case "hello":
      return { ...view, connection: "open", session: msg.session, presets: msg.presets, phase: msg.phase };
    case "configure":
      return {
        ...view,
        phase: msg.phase,
        scenario: msg.scenario,
        pacingFactor: msg.pacing_factor,
        decimation: msg.decimation,
        periods: msg.periods,
        latest: null,
        costSeries: [],
        links: {},
        report: null,
        endReason: null,
      };
    case "start":
    case "pause":
    case "resume":
      return { ...view, phase: msg.phase };
    case "state": {
      const series = view.costSeries
        .concat({ t: msg.t, cost: msg.accumulated_cost })
        .filter((s) => s.t >= msg.t - COST_WINDOW_S);
      return {
        ...view,
        latest: msg,
        costSeries: series,
        links: msg.links,
        lastStateWallMs: wallMs,
      };
    }
    case "report":
      return { ...view, report: msg };
    case "end":
      return { ...view, phase: msg.phase, endReason: msg.reason };
    case "error": {
      const line = `${msg.error}: ${msg.detail}`;
      return { ...view, errors: view.errors.concat(line).slice(-MAX_ERRORS) };
    }
  }
}

/** Record one input the console just sent.  Returns a new view. */
export function recordInput(view: ViewModel, input: SentInput): ViewModel {
  return { ...view, inputLog: view.inputLog.concat(input) };
}

export function markClosed(view: ViewModel): ViewModel {
  return { ...view, connection: "closed" };
}

/** True once the stream has gone quiet long enough to warn the operator. */
export function isStalled(view: ViewModel, nowMs: number, thresholdMs = 1000): boolean {
  if (view.phase !== "running" || view.lastStateWallMs === null) {
    return false;
  }
  return nowMs - view.lastStateWallMs > thresholdMs;
}

/**
 * Whether manual force inputs reach the plant in the configured topology.
 * Mirrors the authority rule the simulation applies on its side.
 */
export function forceAuthority(scenario: ScenarioDoc | null): boolean {
  if (scenario === null) {
    return false;
  }
  if (scenario.decision_maker === "human_only") {
    return true;
  }
  if (scenario.decision_maker === "machine_only") {
    return false;
  }
  return scenario.topology === "human_dominated" || scenario.topology === "symbiosis";
}
