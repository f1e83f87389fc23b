import { describe, expect, it } from "vitest";

import {
  PROTOCOL,
  ProtocolError,
  abortMessage,
  inputMessage,
  parseServerMessage,
  startTrialMessage,
} from "../src/protocol";

function stateFrame(overrides: Record<string, unknown> = {}): string {
  return JSON.stringify({
    v: PROTOCOL,
    type: "state",
    tick: 3,
    t: 0.06,
    x1: [1.5, 2.0],
    x2: [0.1, -0.2],
    yaw: 0.4,
    u_ref: [2.0, 0.0],
    u_cbf: [1.2, 0.3],
    u_applied: [1.2, 0.3],
    force: [-0.4, 0.15],
    h_min: 0.8,
    targets: [
      [7.0, 2.0],
      [13.0, 12.0],
    ],
    phase: "running",
    ...overrides,
  });
}

describe("parseServerMessage", () => {
  it("decodes a state frame field for field", () => {
    const msg = parseServerMessage(stateFrame());
    expect(msg.type).toBe("state");
    if (msg.type !== "state") {
      return;
    }
    expect(msg.tick).toBe(3);
    expect(msg.x1).toEqual([1.5, 2.0]);
    expect(msg.force).toEqual([-0.4, 0.15]);
    expect(msg.targets).toEqual([
      [7.0, 2.0],
      [13.0, 12.0],
    ]);
    expect(msg.phase).toBe("running");
  });

  it("decodes trial_start with config and environment attached", () => {
    const env = {
      format: "cbf-teleop-env/1",
      width: 25,
      height: 15,
      uav_radius: 0.25,
      seed: 7,
      spawn: { x: 0.3, y: 3.4, yaw: -1.1 },
      obstacles: [{ x: 5, y: 5, radius: 0.5 }],
      targets: [{ x: 7, y: 2, radius: 0.5 }],
    };
    const config = {
      condition: "hsa",
      seed: 7,
      operator: "waypoint",
      dynamics: { dt: 0.02, u_max: 10, yaw_rate: 0.785 },
      input_map: { kv: 2, deadzone: 1, stylus_max: 5 },
      paradigm: { kf: 0.5, f_max: 3 },
    };
    const msg = parseServerMessage(
      JSON.stringify({ v: PROTOCOL, type: "trial_start", config, environment: env }),
    );
    expect(msg.type).toBe("trial_start");
    if (msg.type !== "trial_start") {
      return;
    }
    expect(msg.config.dynamics.dt).toBe(0.02);
    expect(msg.environment.obstacles).toHaveLength(1);
  });

  it("passes trial_end metrics through, null included", () => {
    const withMetrics = parseServerMessage(
      JSON.stringify({
        v: PROTOCOL,
        type: "trial_end",
        outcome: "timeout",
        metrics: { duration: 3.0, disagreement: 0.2 },
      }),
    );
    expect(withMetrics.type === "trial_end" && withMetrics.metrics?.duration).toBe(3.0);

    const without = parseServerMessage(
      JSON.stringify({ v: PROTOCOL, type: "trial_end", outcome: "aborted", metrics: null }),
    );
    expect(without.type === "trial_end" && without.metrics).toBeNull();
  });

  it("rejects a missing or wrong protocol version", () => {
    expect(() => parseServerMessage(JSON.stringify({ type: "state" }))).toThrow(ProtocolError);
    expect(() =>
      parseServerMessage(JSON.stringify({ v: "cbf-teleop/2", type: "error", reason: "x" })),
    ).toThrow(/version/);
  });

  it("rejects unknown types, non-objects, and malformed json", () => {
    expect(() => parseServerMessage(JSON.stringify({ v: PROTOCOL, type: "dance" }))).toThrow(
      /unknown message type/,
    );
    expect(() => parseServerMessage("[1,2]")).toThrow(/object/);
    expect(() => parseServerMessage("{oops")).toThrow(/malformed/);
  });

  it("rejects a state frame with a scalar where a pair belongs", () => {
    expect(() => parseServerMessage(stateFrame({ force: 0.5 }))).toThrow(/force/);
    expect(() => parseServerMessage(stateFrame({ x1: [1, "a"] }))).toThrow(/x1/);
  });
});

describe("outgoing frames", () => {
  it("builds input messages with every field the server requires", () => {
    const raw = JSON.parse(inputMessage(12, [3.0, -1.5], 1, true));
    expect(raw).toEqual({
      v: PROTOCOL,
      type: "input",
      seq: 12,
      stylus: [3.0, -1.5],
      yaw_input: 1,
      inspect: true,
    });
  });

  it("builds start_trial and abort frames", () => {
    expect(JSON.parse(startTrialMessage("hsa", 7))).toEqual({
      v: PROTOCOL,
      type: "start_trial",
      condition: "hsa",
      seed: 7,
    });
    expect(JSON.parse(abortMessage())).toEqual({ v: PROTOCOL, type: "abort" });
  });
});
