/**
 * Wire protocol "cbf-teleop/1": JSON text frames over a websocket,
 * one object per message, tagged with `type` and versioned under `v`.
 * Field names and units mirror the server exactly; the client never
 * invents state, it only echoes operator input and renders what it
 * is sent.
 */

export const PROTOCOL = "cbf-teleop/1";

export type Vec2 = [number, number];
export type YawInput = -1 | 0 | 1;

export interface CircleDict {
  x: number;
  y: number;
  radius: number;
}

export interface EnvironmentDict {
  format: string;
  width: number;
  height: number;
  uav_radius: number;
  seed: number;
  spawn: { x: number; y: number; yaw: number };
  obstacles: CircleDict[];
  targets: CircleDict[];
}

/** Session config as served in trial_start; only the fields the cockpit reads. */
export interface TrialConfigDict {
  condition: string;
  seed: number;
  operator: string;
  dynamics: { dt: number; u_max: number; yaw_rate: number };
  input_map: { kv: number; deadzone: number; stylus_max: number };
  paradigm: { kf: number; f_max: number };
  [section: string]: unknown;
}

export interface TrialStartMsg {
  type: "trial_start";
  config: TrialConfigDict;
  environment: EnvironmentDict;
}

export interface StateMsg {
  type: "state";
  tick: number;
  t: number;
  x1: Vec2;
  x2: Vec2;
  yaw: number;
  u_ref: Vec2;
  u_cbf: Vec2;
  u_applied: Vec2;
  force: Vec2;
  h_min: number;
  targets: Vec2[];
  phase: string;
}

export interface TrialEndMsg {
  type: "trial_end";
  outcome: string;
  metrics: Record<string, unknown> | null;
}

export interface ErrorMsg {
  type: "error";
  reason: string;
}

export type ServerMsg = TrialStartMsg | StateMsg | TrialEndMsg | ErrorMsg;

export class ProtocolError extends Error {}

function asVec2(value: unknown, field: string): Vec2 {
  if (!Array.isArray(value) || value.length !== 2) {
    throw new ProtocolError(`${field} must be a pair`);
  }
  const [x, y] = value;
  if (typeof x !== "number" || typeof y !== "number") {
    throw new ProtocolError(`${field} must be numeric`);
  }
  return [x, y];
}

/**
 * Decode one server frame. Throws ProtocolError on anything that is not
 * a versioned message of a known type; the caller treats that as a
 * broken connection, never as renderable state.
 */
export function parseServerMessage(text: string): ServerMsg {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new ProtocolError("malformed json");
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new ProtocolError("message must be an object");
  }
  const msg = raw as Record<string, unknown>;
  if (msg.v !== PROTOCOL) {
    throw new ProtocolError(`version mismatch: ${String(msg.v)}`);
  }
  switch (msg.type) {
    case "trial_start": {
      if (typeof msg.config !== "object" || msg.config === null) {
        throw new ProtocolError("trial_start missing config");
      }
      if (typeof msg.environment !== "object" || msg.environment === null) {
        throw new ProtocolError("trial_start missing environment");
      }
      return {
        type: "trial_start",
        config: msg.config as TrialConfigDict,
        environment: msg.environment as unknown as EnvironmentDict,
      };
    }
    case "state": {
      if (typeof msg.tick !== "number" || typeof msg.t !== "number") {
        throw new ProtocolError("state missing tick clock");
      }
      if (!Array.isArray(msg.targets)) {
        throw new ProtocolError("state missing targets");
      }
      return {
        type: "state",
        tick: msg.tick,
        t: msg.t,
        x1: asVec2(msg.x1, "x1"),
        x2: asVec2(msg.x2, "x2"),
        yaw: typeof msg.yaw === "number" ? msg.yaw : 0,
        u_ref: asVec2(msg.u_ref, "u_ref"),
        u_cbf: asVec2(msg.u_cbf, "u_cbf"),
        u_applied: asVec2(msg.u_applied, "u_applied"),
        force: asVec2(msg.force, "force"),
        h_min: typeof msg.h_min === "number" ? msg.h_min : NaN,
        targets: msg.targets.map((c, i) => asVec2(c, `targets[${i}]`)),
        phase: String(msg.phase),
      };
    }
    case "trial_end": {
      return {
        type: "trial_end",
        outcome: String(msg.outcome),
        metrics:
          typeof msg.metrics === "object" && msg.metrics !== null
            ? (msg.metrics as Record<string, unknown>)
            : null,
      };
    }
    case "error": {
      return { type: "error", reason: String(msg.reason) };
    }
    default:
      throw new ProtocolError(`unknown message type ${String(msg.type)}`);
  }
}

export function startTrialMessage(condition: string, seed: number): string {
  return JSON.stringify({ v: PROTOCOL, type: "start_trial", condition, seed });
}

export function inputMessage(
  seq: number,
  stylus: Vec2,
  yawInput: YawInput,
  inspect: boolean,
): string {
  return JSON.stringify({
    v: PROTOCOL,
    type: "input",
    seq,
    stylus: [stylus[0], stylus[1]],
    yaw_input: yawInput,
    inspect,
  });
}

export function abortMessage(): string {
  return JSON.stringify({ v: PROTOCOL, type: "abort" });
}
