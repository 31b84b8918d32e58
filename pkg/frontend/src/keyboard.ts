/**
 * Keyboard bindings for manual intervention during a running session.
 *
 * Space removes the attached weight; left/right arrows push the cart with
 * the scenario's human force level.  Bindings act only while the session
 * is running, and force pushes only when the topology grants the operator
 * force authority.  A held space bar emits exactly one remove_weight per
 * physical keydown (key repeat is ignored), and held arrows are throttled
 * to one push per reaction-scale window so a repeating key cannot flood
 * the plant with pseudo-continuous force.
 */

import type { SessionPhase } from "./protocol.js";

/** Throttle window for held arrows, in control periods. */
export const FORCE_THROTTLE_PERIODS = 10;

export interface KeyEventLike {
  code: string;
  repeat: boolean;
}

/** What a binding wants sent, minus transport plumbing. */
export interface InputIntent {
  action: "remove_weight" | "force";
  value?: number;
}

export interface KeyboardHooks {
  phase(): SessionPhase;
  /** Whether operator force inputs reach the plant at all. */
  forceAuthority(): boolean;
  /** Newtons for one arrow push; sign applied per direction. */
  forceLevel(): number;
  /** Control period in seconds; scales the arrow throttle window. */
  controlPeriod(): number;
  /** Monotonic clock in milliseconds. */
  now(): number;
}

/**
 * Stateful key tracker.  Feed it keydown/keyup events; it returns the
 * input intent to transmit, or null when the event binds to nothing.
 */
export class KeyBindings {
  private spaceHeld = false;
  private lastForceAtMs: number | null = null;

  constructor(private readonly hooks: KeyboardHooks) {}

  keydown(ev: KeyEventLike): InputIntent | null {
    if (this.hooks.phase() !== "running") {
      return null;
    }
    if (ev.code === "Space") {
      // One action per physical press: both the browser repeat flag and
      // our own held latch guard it, since some environments omit repeat.
      if (ev.repeat || this.spaceHeld) {
        return null;
      }
      this.spaceHeld = true;
      return { action: "remove_weight" };
    }
    if (ev.code === "ArrowLeft" || ev.code === "ArrowRight") {
      if (!this.hooks.forceAuthority()) {
        return null;
      }
      const now = this.hooks.now();
      const windowMs = this.hooks.controlPeriod() * 1000 * FORCE_THROTTLE_PERIODS;
      if (this.lastForceAtMs !== null && now - this.lastForceAtMs < windowMs) {
        return null;
      }
      this.lastForceAtMs = now;
      const magnitude = this.hooks.forceLevel();
      return {
        action: "force",
        value: ev.code === "ArrowLeft" ? -magnitude : magnitude,
      };
    }
    return null;
  }

  keyup(ev: KeyEventLike): void {
    if (ev.code === "Space") {
      this.spaceHeld = false;
    }
  }

  /** Drop held-key state, e.g. when the window loses focus. */
  reset(): void {
    this.spaceHeld = false;
    this.lastForceAtMs = null;
  }
}
