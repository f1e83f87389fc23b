/** Shared builders for server message objects used across the suites. */

import type {
  EnvironmentDict,
  StateMsg,
  TrialConfigDict,
  TrialStartMsg,
  Vec2,
} from "../src/protocol";

export function makeEnvironment(overrides: Partial<EnvironmentDict> = {}): EnvironmentDict {
  return {
    format: "cbf-teleop-env/1",
    width: 25,
    height: 15,
    uav_radius: 0.25,
    seed: 7,
    spawn: { x: 0.4, y: 3.5, yaw: 0 },
    obstacles: [
      { x: 10, y: 5, radius: 0.5 },
      { x: 14, y: 9, radius: 0.5 },
    ],
    targets: [
      { x: 7, y: 2, radius: 0.5 },
      { x: 13, y: 12, radius: 0.5 },
      { x: 20, y: 4, radius: 0.5 },
    ],
    ...overrides,
  };
}

export function makeConfig(overrides: Partial<TrialConfigDict> = {}): TrialConfigDict {
  return {
    condition: "hsa",
    seed: 7,
    operator: "waypoint",
    dynamics: { dt: 0.02, u_max: 10, yaw_rate: 0.785 },
    input_map: { kv: 2, deadzone: 1, stylus_max: 5 },
    paradigm: { kf: 0.5, f_max: 3 },
    ...overrides,
  };
}

export function makeTrialStart(
  config: Partial<TrialConfigDict> = {},
  environment: Partial<EnvironmentDict> = {},
): TrialStartMsg {
  return {
    type: "trial_start",
    config: makeConfig(config),
    environment: makeEnvironment(environment),
  };
}

export function makeState(overrides: Partial<StateMsg> = {}): StateMsg {
  const targets: Vec2[] = [
    [7, 2],
    [13, 12],
    [20, 4],
  ];
  return {
    type: "state",
    tick: 0,
    t: 0,
    x1: [0.4, 3.5],
    x2: [0, 0],
    yaw: 0,
    u_ref: [0, 0],
    u_cbf: [0, 0],
    u_applied: [0, 0],
    force: [0, 0],
    h_min: 1.0,
    targets,
    phase: "running",
    ...overrides,
  };
}
