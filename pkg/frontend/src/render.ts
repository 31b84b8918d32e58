/**
 * Canvas drawing for the balance view.
 *
 * Rendering is latest-value sampling: each frame draws the most recent
 * reported state as-is, with no interpolation or prediction between
 * server frames.  When the stream goes quiet for more than a second the
 * frame gets a "link stalled" banner instead of a guess.  Everything is
 * a pure function of (view, clock, canvas size) against a minimal 2D
 * context so tests can record the draw calls.
 */

import type { ViewModel } from "./viewmodel.js";
import { isStalled } from "./viewmodel.js";

/** Subset of CanvasRenderingContext2D the renderer touches. */
export interface Draw2D {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  font: string;
  textAlign: string;
  globalAlpha: number;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fill(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
}

export const PX_PER_M = 24;
export const CART_W = 56;
export const CART_H = 26;
export const STALL_THRESHOLD_MS = 1000;

const SLOT_ORDER = ["sensor_uplink", "actuator_downlink", "human_link"];
const SLOT_LABELS: Record<string, string> = {
  sensor_uplink: "uplink",
  actuator_downlink: "downlink",
  human_link: "human",
};

const COLOR_BG = "#10151c";
const COLOR_TRACK = "#3a4454";
const COLOR_CART = "#8fb4d9";
const COLOR_POLE = "#e8c268";
const COLOR_WEIGHT = "#d97777";
const COLOR_TEXT = "#c7d1dd";
const COLOR_COST = "#7dc4a5";
const COLOR_OK = "#4caf6e";
const COLOR_LOST = "#d64545";
const COLOR_UNKNOWN = "#6b7686";

/** Pole tip in screen coordinates; angle 0 points straight up. */
export function poleTip(
  pivotX: number,
  pivotY: number,
  theta: number,
  lengthPx: number,
): { x: number; y: number } {
  return {
    x: pivotX + lengthPx * Math.sin(theta),
    y: pivotY - lengthPx * Math.cos(theta),
  };
}

/** Horizontal screen position of the cart center for a given cart x. */
export function cartScreenX(x: number, width: number): number {
  return width / 2 + x * PX_PER_M;
}

export function renderFrame(
  ctx: Draw2D,
  view: ViewModel,
  nowMs: number,
  width: number,
  height: number,
): void {
  ctx.globalAlpha = 1;
  ctx.fillStyle = COLOR_BG;
  ctx.fillRect(0, 0, width, height);

  const groundY = height - 110;
  const sparkTop = height - 86;
  const sparkH = 64;

  // Track.
  ctx.strokeStyle = COLOR_TRACK;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(0, groundY);
  ctx.lineTo(width, groundY);
  ctx.stroke();

  const state = view.latest;
  if (state !== null) {
    const cx = cartScreenX(state.x, width);
    const cartTop = groundY - CART_H;

    // Cart body and wheels.
    ctx.fillStyle = COLOR_CART;
    ctx.fillRect(cx - CART_W / 2, cartTop, CART_W, CART_H);
    ctx.fillStyle = COLOR_TRACK;
    for (const dx of [-CART_W / 3, CART_W / 3]) {
      ctx.beginPath();
      ctx.arc(cx + dx, groundY, 5, 0, 2 * Math.PI);
      ctx.fill();
    }

    // Attachable weight rides on top of the cart while present.
    if (state.weight_present) {
      ctx.fillStyle = COLOR_WEIGHT;
      ctx.fillRect(cx - 12, cartTop - 14, 24, 12);
    }

    // Pole, hinged at the cart top center.
    const poleLenM =
      typeof view.scenario?.plant === "object" && view.scenario !== null
        ? Number((view.scenario.plant as Record<string, unknown>).pole_length ?? 4)
        : 4;
    const tip = poleTip(cx, cartTop, state.theta, poleLenM * PX_PER_M);
    ctx.strokeStyle = COLOR_POLE;
    ctx.lineWidth = 4;
    ctx.beginPath();
    ctx.moveTo(cx, cartTop);
    ctx.lineTo(tip.x, tip.y);
    ctx.stroke();
    ctx.fillStyle = COLOR_POLE;
    ctx.beginPath();
    ctx.arc(tip.x, tip.y, 6, 0, 2 * Math.PI);
    ctx.fill();
  }

  // Link health dots.
  ctx.font = "12px system-ui, sans-serif";
  ctx.textAlign = "left";
  let dotY = 22;
  for (const slot of SLOT_ORDER) {
    const reading = view.links[slot];
    const color =
      reading === undefined || reading.delivered === null
        ? COLOR_UNKNOWN
        : reading.delivered
          ? COLOR_OK
          : COLOR_LOST;
    ctx.fillStyle = color;
    ctx.beginPath();
    ctx.arc(16, dotY - 4, 5, 0, 2 * Math.PI);
    ctx.fill();
    const snr =
      reading?.snr_db != null ? ` ${reading.snr_db.toFixed(1)} dB` : "";
    ctx.fillStyle = COLOR_TEXT;
    ctx.fillText(`${SLOT_LABELS[slot] ?? slot}${snr}`, 28, dotY);
    dotY += 18;
  }

  // Status line.
  ctx.fillStyle = COLOR_TEXT;
  ctx.textAlign = "right";
  const name = view.scenario?.name ?? "no scenario";
  const tLabel = state === null ? "t=-" : `t=${state.t.toFixed(2)} s`;
  const costLabel =
    state === null ? "cost=-" : `cost=${state.accumulated_cost.toFixed(4)}`;
  ctx.fillText(`${name} | ${view.phase} | ${tLabel} | ${costLabel}`, width - 12, 22);

  // Rolling accumulated-cost sparkline.
  const series = view.costSeries;
  ctx.strokeStyle = COLOR_COST;
  ctx.lineWidth = 1.5;
  if (series.length >= 2) {
    const first = series[0]!;
    const last = series[series.length - 1]!;
    const tSpan = Math.max(last.t - first.t, 1e-9);
    const cMax = Math.max(last.cost - first.cost, 1e-9);
    ctx.beginPath();
    series.forEach((s, i) => {
      const px = 12 + ((s.t - first.t) / tSpan) * (width - 24);
      const py = sparkTop + sparkH - ((s.cost - first.cost) / cMax) * sparkH;
      if (i === 0) {
        ctx.moveTo(px, py);
      } else {
        ctx.lineTo(px, py);
      }
    });
    ctx.stroke();
  }
  ctx.textAlign = "left";
  ctx.fillStyle = COLOR_TEXT;
  ctx.fillText("accumulated cost, last 30 s", 12, sparkTop - 6);

  // Stale stream warning; drawn last so nothing covers it.
  if (isStalled(view, nowMs, STALL_THRESHOLD_MS)) {
    ctx.globalAlpha = 0.85;
    ctx.fillStyle = "#46201f";
    ctx.fillRect(width / 2 - 110, 40, 220, 38);
    ctx.globalAlpha = 1;
    ctx.strokeStyle = COLOR_LOST;
    ctx.lineWidth = 1;
    ctx.strokeRect(width / 2 - 110, 40, 220, 38);
    ctx.fillStyle = "#f0b9b4";
    ctx.textAlign = "center";
    ctx.font = "15px system-ui, sans-serif";
    ctx.fillText("link stalled", width / 2, 64);
    ctx.textAlign = "left";
  }
}
