import { describe, expect, it } from "vitest";

import { CockpitModel } from "../src/model";
import {
  COLORS,
  FORCE_PX_PER_N,
  cockpitLayout,
  computeView,
  drawScene,
  forceArrow,
  worldToScreen,
} from "../src/render";
import { RecordingContext } from "./canvas_stub";
import { makeState, makeTrialStart } from "./helpers";

const W = 960;
const H = 560;

function trialModel(): CockpitModel {
  const m = new CockpitModel();
  m.applyServer(makeTrialStart(), 0);
  return m;
}

function uavScreen(m: CockpitModel): [number, number] {
  const env = m.environment!;
  const view = computeView(env.width, env.height, cockpitLayout(W, H).arena);
  const p = m.latest!.x1;
  return worldToScreen(view, p);
}

describe("forceArrow", () => {
  it("draws nothing for zero force", () => {
    expect(forceArrow([100, 100], [0, 0], FORCE_PX_PER_N)).toBeNull();
  });

  it("points along +x with length proportional to the magnitude", () => {
    const seg = forceArrow([100, 100], [0.78, 0], FORCE_PX_PER_N);
    expect(seg).not.toBeNull();
    expect(seg!.to[1]).toBe(100);
    expect(seg!.to[0] - seg!.from[0]).toBeCloseTo(0.78 * FORCE_PX_PER_N, 12);
  });

  it("scales every direction by the same display gain", () => {
    const forces: [number, number][] = [
      [0.3, 0.4],
      [-1.2, 0.05],
      [0, -2.7],
      [2.1, 2.1],
    ];
    for (const f of forces) {
      const seg = forceArrow([50, 60], f, 33);
      const len = Math.hypot(seg!.to[0] - seg!.from[0], seg!.to[1] - seg!.from[1]);
      expect(len).toBeCloseTo(Math.hypot(f[0], f[1]) * 33, 9);
    }
  });

  it("flips y so a +y force points up the screen", () => {
    const seg = forceArrow([0, 0], [0, 1], 10);
    expect(seg!.to[1]).toBe(-10);
  });
});

describe("drawScene", () => {
  it("asks for a connection when nothing is known yet", () => {
    const ctx = new RecordingContext();
    drawScene(ctx, new CockpitModel(), W, H);
    expect(ctx.texts.some((t) => t.text.includes("connect and start"))).toBe(true);
  });

  it("draws the vehicle exactly at the last served position", () => {
    const m = trialModel();
    m.applyServer(makeState({ x1: [12.25, 7.5], yaw: 0.3 }), 10);
    const ctx = new RecordingContext();
    drawScene(ctx, m, W, H);
    const [sx, sy] = uavScreen(m);
    const discs = ctx.arcAt(sx, sy).filter((a) => a.fillStyle === COLORS.uav && a.filled);
    expect(discs).toHaveLength(1);
  });

  it("moves the vehicle within one frame of a new state", () => {
    const m = trialModel();
    m.applyServer(makeState({ x1: [5, 5] }), 10);
    const before = new RecordingContext();
    drawScene(before, m, W, H);
    const posBefore = uavScreen(m);
    expect(before.arcAt(posBefore[0], posBefore[1]).length).toBeGreaterThan(0);

    m.applyServer(makeState({ tick: 1, x1: [6, 4] }), 30);
    const after = new RecordingContext();
    drawScene(after, m, W, H);
    const posAfter = uavScreen(m);
    expect(after.arcAt(posAfter[0], posAfter[1]).length).toBeGreaterThan(0);
    expect(after.arcAt(posBefore[0], posBefore[1])).toHaveLength(0);
  });

  it("changes a target glyph the frame its center leaves the remaining list", () => {
    const m = trialModel();
    const env = m.environment!;
    const view = computeView(env.width, env.height, cockpitLayout(W, H).arena);
    const [tx, ty] = worldToScreen(view, [13, 12]);

    const before = new RecordingContext();
    drawScene(before, m, W, H);
    const ringBefore = before.arcAt(tx, ty).filter((a) => a.strokeStyle === COLORS.targetLeft);
    expect(ringBefore.length).toBeGreaterThan(0);

    m.applyServer(
      makeState({
        targets: [
          [7, 2],
          [20, 4],
        ],
      }),
      10,
    );
    const after = new RecordingContext();
    drawScene(after, m, W, H);
    const done = after.arcAt(tx, ty).filter((a) => a.fillStyle === COLORS.targetDone && a.filled);
    expect(done).toHaveLength(1);
    expect(after.arcAt(tx, ty).filter((a) => a.strokeStyle === COLORS.targetLeft && a.stroked)).toHaveLength(0);
  });

  it("omits the force arrow at zero force and scales it with the served force", () => {
    const m = trialModel();
    m.applyServer(makeState(), 10);
    const quiet = new RecordingContext();
    drawScene(quiet, m, W, H);
    expect(quiet.segmentsInColor(COLORS.force)).toHaveLength(0);

    m.applyServer(makeState({ tick: 1, force: [0.78, 0] }), 30);
    const loud = new RecordingContext();
    drawScene(loud, m, W, H, { forcePxPerN: 40 });
    const segs = loud.segmentsInColor(COLORS.force);
    expect(segs.length).toBeGreaterThan(0);
    // The shaft starts at the puck; the head segments start at the tip.
    const { panelCenter } = cockpitLayout(W, H);
    const shaft = segs.find((s) => s.from[0] === panelCenter[0] && s.from[1] === panelCenter[1]);
    expect(shaft).toBeDefined();
    const len = Math.hypot(shaft!.to[0] - shaft!.from[0], shaft!.to[1] - shaft!.from[1]);
    expect(len).toBeCloseTo(0.78 * 40, 9);
  });

  it("shows a degraded banner once the state stream stalls", () => {
    const m = trialModel();
    m.applyServer(makeState(), 1000);
    const fresh = new RecordingContext();
    drawScene(fresh, m, W, H, { nowMs: 1100 });
    expect(fresh.texts.some((t) => t.text.includes("DEGRADED"))).toBe(false);

    const stalled = new RecordingContext();
    drawScene(stalled, m, W, H, { nowMs: 1700 });
    expect(stalled.texts.some((t) => t.text.includes("DEGRADED"))).toBe(true);
  });
});
