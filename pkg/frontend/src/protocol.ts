/**
 * Wire types and the client-side socket wrapper for a live session.
 *
 * One WebSocket connection carries one session.  Every frame is a JSON
 * object with a "type" and a per-direction "seq" that must increase
 * strictly; the wrapper owns the client counter so callers never touch
 * sequence numbers.  Outbound traffic is limited to the seven command
 * types the service accepts.
 */

export type SessionPhase = "new" | "configured" | "running" | "paused" | "ended";

export const CLIENT_MESSAGE_TYPES = [
  "hello",
  "configure",
  "start",
  "pause",
  "resume",
  "input",
  "end",
] as const;

export type ClientMessageType = (typeof CLIENT_MESSAGE_TYPES)[number];

export interface LinkReading {
  delivered: boolean | null;
  snr_db: number | null;
}

export interface ScenarioDoc {
  name: string;
  decision_maker: string;
  topology: string;
  info_structure: string;
  duration: number;
  control_period: number;
  master_seed: number;
  human: { human_force_level: number; [key: string]: unknown };
  [key: string]: unknown;
}

export interface HelloMessage {
  type: "hello";
  seq: number;
  server: string;
  protocol: number;
  session: string;
  phase: SessionPhase;
  presets: string[];
}

export interface ConfigureMessage {
  type: "configure";
  seq: number;
  session: string;
  phase: SessionPhase;
  scenario: ScenarioDoc;
  pacing_factor: number;
  decimation: number;
  periods: number;
}

export interface PhaseAckMessage {
  type: "start" | "pause" | "resume";
  seq: number;
  phase: SessionPhase;
}

export interface StateMessage {
  type: "state";
  seq: number;
  period: number;
  t: number;
  theta: number;
  x: number;
  weight_present: boolean;
  accumulated_cost: number;
  links: Record<string, LinkReading>;
}

export interface LoggedInput {
  period: number;
  kind: string;
  force: number;
}

export interface ReportMessage {
  type: "report";
  seq: number;
  reason: string;
  final_accumulated_cost: number;
  periods: number;
  aborted: boolean;
  qoc: Record<string, unknown>;
  input_log: LoggedInput[];
}

export interface EndMessage {
  type: "end";
  seq: number;
  phase: SessionPhase;
  reason: string;
}

export interface ErrorMessage {
  type: "error";
  seq: number;
  error: string;
  detail: string;
  in_reply_to: number | null;
}

export type ServerMessage =
  | HelloMessage
  | ConfigureMessage
  | PhaseAckMessage
  | StateMessage
  | ReportMessage
  | EndMessage
  | ErrorMessage;

const SERVER_TYPES = new Set([
  "hello",
  "configure",
  "start",
  "pause",
  "resume",
  "state",
  "report",
  "end",
  "error",
]);

/** Parse one inbound frame; null for anything that is not a session message. */
export function decodeServerMessage(raw: string): ServerMessage | null {
  let value: unknown;
  try {
    value = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    return null;
  }
  const msg = value as { type?: unknown; seq?: unknown };
  if (typeof msg.type !== "string" || !SERVER_TYPES.has(msg.type)) {
    return null;
  }
  if (typeof msg.seq !== "number" || !Number.isInteger(msg.seq)) {
    return null;
  }
  return value as ServerMessage;
}

/** Body of an outbound frame before the wrapper stamps type-independent plumbing. */
export type ClientCommand =
  | { type: "hello" }
  | {
      type: "configure";
      scenario: string | Record<string, unknown>;
      seed?: number;
      pacing_factor?: number;
      decimation?: number;
    }
  | { type: "start" }
  | { type: "pause" }
  | { type: "resume" }
  | { type: "input"; action: string; value?: number; t_client: number }
  | { type: "end" };

/** The transport surface the wrapper needs; the browser WebSocket satisfies it. */
export interface WireSocket {
  send(data: string): void;
}

export interface SessionClientOptions {
  /** Called once if a frame cannot be delivered even after one retry. */
  onConnectionError?: (err: unknown) => void;
}

/**
 * Stamps client sequence numbers and serializes commands onto the socket.
 *
 * A send that throws parks the frame; the next send (or an explicit
 * flush) retries it ahead of new traffic.  A second failure for the same
 * frame is treated as a dead connection and reported exactly once.
 */
export class SessionClient {
  private seq = 0;
  private parked: string | null = null;
  private failed = false;
  private readonly onConnectionError: (err: unknown) => void;

  constructor(
    private readonly socket: WireSocket,
    options: SessionClientOptions = {},
  ) {
    this.onConnectionError = options.onConnectionError ?? (() => {});
  }

  get nextSeq(): number {
    return this.seq + 1;
  }

  get dead(): boolean {
    return this.failed;
  }

  /** Stamp and transmit; returns the sequence number used. */
  send(command: ClientCommand): number {
    if (!CLIENT_MESSAGE_TYPES.includes(command.type)) {
      throw new Error(`not a client message type: ${command.type}`);
    }
    this.seq += 1;
    const frame = JSON.stringify({ ...command, seq: this.seq });
    this.transmit(frame);
    return this.seq;
  }

  /** Retry a parked frame, e.g. after the socket reports open again. */
  flush(): void {
    if (this.parked === null || this.failed) {
      return;
    }
    const earlier = this.parked;
    this.parked = null;
    try {
      this.socket.send(earlier);
    } catch (err) {
      this.failed = true;
      this.onConnectionError(err);
    }
  }

  private transmit(frame: string): void {
    if (this.failed) {
      return;
    }
    // A parked frame gets its single retry ahead of new traffic.
    this.flush();
    if (this.failed) {
      return;
    }
    try {
      this.socket.send(frame);
    } catch {
      this.parked = frame;
    }
  }
}

/** WebSocket URL for the session endpoint served alongside the console. */
export function sessionUrl(location: { protocol: string; host: string }): string {
  const scheme = location.protocol === "https:" ? "wss" : "ws";
  return `${scheme}://${location.host}/session`;
}
