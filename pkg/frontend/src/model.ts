/**
 * Cockpit view model. Holds the latest server state plus the local
 * input devices; everything the renderer draws about the world comes
 * from the last State message, never from client-side prediction.
 */

import type {
  CircleDict,
  EnvironmentDict,
  ServerMsg,
  StateMsg,
  TrialConfigDict,
  TrialEndMsg,
  Vec2,
  YawInput,
} from "./protocol";
import { VirtualStylus } from "./stylus";

export type ConnectionStatus =
  | "idle"
  | "connecting"
  | "connected"
  | "in_trial"
  | "ended"
  | "closed"
  | "error";

// A live session streams one state per tick; half a second of silence
// while in a trial means the link is degraded.
export const STALE_AFTER_MS = 500;

export class CockpitModel {
  status: ConnectionStatus = "idle";
  lastError: string | null = null;
  config: TrialConfigDict | null = null;
  environment: EnvironmentDict | null = null;
  latest: StateMsg | null = null;
  lastStateAtMs = Number.NEGATIVE_INFINITY;
  end: TrialEndMsg | null = null;

  readonly stylus = new VirtualStylus();
  yawCcwHeld = false;
  yawCwHeld = false;
  private inspectQueued = false;

  /** Net yaw command from the held keys; opposing keys cancel. */
  yawInput(): YawInput {
    const y = (this.yawCcwHeld ? 1 : 0) - (this.yawCwHeld ? 1 : 0);
    return y as YawInput;
  }

  queueInspect(): void {
    this.inspectQueued = true;
  }

  /** Consume the pending inspect press; it rides exactly one input. */
  takeInspect(): boolean {
    const pressed = this.inspectQueued;
    this.inspectQueued = false;
    return pressed;
  }

  applyServer(msg: ServerMsg, nowMs: number): void {
    switch (msg.type) {
      case "trial_start": {
        this.config = msg.config;
        this.environment = msg.environment;
        this.latest = null;
        this.end = null;
        this.status = "in_trial";
        const im = msg.config.input_map;
        if (im && typeof im.stylus_max === "number") {
          this.stylus.configure(im.stylus_max, im.deadzone);
        }
        break;
      }
      case "state": {
        this.latest = msg;
        this.lastStateAtMs = nowMs;
        break;
      }
      case "trial_end": {
        this.end = msg;
        this.status = "ended";
        break;
      }
      case "error": {
        this.lastError = msg.reason;
        this.status = "error";
        break;
      }
    }
  }

  /** Server-authoritative pose; null until the first state arrives. */
  pose(): { x1: Vec2; yaw: number } | null {
    if (this.latest === null) {
      return null;
    }
    return { x1: this.latest.x1, yaw: this.latest.yaw };
  }

  isStale(nowMs: number): boolean {
    return (
      this.status === "in_trial" &&
      this.latest !== null &&
      nowMs - this.lastStateAtMs > STALE_AFTER_MS
    );
  }

  /**
   * Split the session's targets by inspection status. The state stream
   * carries the remaining centers with the exact floats of the served
   * environment, so membership is a plain coordinate match.
   */
  targetsByStatus(): { remaining: CircleDict[]; inspected: CircleDict[] } {
    const all = this.environment?.targets ?? [];
    if (this.latest === null) {
      return { remaining: all.slice(), inspected: [] };
    }
    const left = new Set(this.latest.targets.map((c) => `${c[0]},${c[1]}`));
    const remaining: CircleDict[] = [];
    const inspected: CircleDict[] = [];
    for (const t of all) {
      (left.has(`${t.x},${t.y}`) ? remaining : inspected).push(t);
    }
    return { remaining, inspected };
  }
}
