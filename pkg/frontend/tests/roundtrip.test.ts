/**
 * Live round trip against a real server: start a trial over the
 * websocket, stream paced input from the scripted cockpit, collect the
 * full state stream, and check what the renderer would show at the end
 * of it. Requires the cbf-teleop package on PATH; the server is
 * spawned on a private port with a short tick cap.
 */

import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { WebSocket as WsWebSocket } from "ws";

import { CockpitClient, type CockpitSocket } from "../src/client";
import { CockpitModel } from "../src/model";
import type { StateMsg } from "../src/protocol";
import {
  COLORS,
  cockpitLayout,
  computeView,
  drawScene,
  worldToScreen,
} from "../src/render";
import { RecordingContext } from "./canvas_stub";

const PORT = 8800 + (process.pid % 700);
const TICK_CAP = 150;
const W = 960;
const H = 560;

let server: ChildProcess;
let workDir: string;
let serverErr = "";

async function waitForServer(): Promise<void> {
  for (let i = 0; i < 150; i++) {
    try {
      const res = await fetch(`http://127.0.0.1:${PORT}/`);
      if (res.ok) {
        const body = (await res.json()) as { protocol?: string };
        if (body.protocol === "cbf-teleop/1") {
          return;
        }
      }
    } catch {
      // Not listening yet.
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error(`server never came up on :${PORT}\n${serverErr}`);
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "cockpit-rt-"));
  const cfgPath = join(workDir, "config.yaml");
  writeFileSync(cfgPath, `session:\n  tick_cap: ${TICK_CAP}\n`);
  server = spawn("cbf-teleop", ["serve", "--port", String(PORT), "--config", cfgPath], {
    stdio: ["ignore", "ignore", "pipe"],
  });
  server.stderr?.on("data", (chunk: Buffer) => {
    serverErr += chunk.toString();
  });
  await waitForServer();
}, 30000);

afterAll(async () => {
  server?.kill("SIGTERM");
  await new Promise((r) => {
    server?.once("exit", r);
    setTimeout(r, 3000);
  });
  rmSync(workDir, { recursive: true, force: true });
});

describe("cockpit round trip", () => {
  it(
    "runs a full trial cycle and renders what was served",
    async () => {
      const sock = new WsWebSocket(`ws://127.0.0.1:${PORT}/ws`);
      const sent: Record<string, unknown>[] = [];
      const origSend = sock.send.bind(sock);
      (sock as unknown as { send: (d: string) => void }).send = (d: string) => {
        sent.push(JSON.parse(d));
        origSend(d);
      };

      const model = new CockpitModel();
      const states: StateMsg[] = [];
      let lastSeen: StateMsg | null = null;
      let finish: () => void = () => {};
      const done = new Promise<void>((resolve, reject) => {
        finish = resolve;
        setTimeout(() => reject(new Error(`trial never ended\n${serverErr}`)), 25000);
      });
      const client = new CockpitClient(sock as unknown as CockpitSocket, model, {
        onUpdate: () => {
          if (model.latest !== null && model.latest !== lastSeen) {
            lastSeen = model.latest;
            states.push(model.latest);
          }
          if (model.end !== null || model.status === "error" || model.status === "closed") {
            finish();
          }
        },
      });

      // Push hard toward +x the whole trial; the field is dense enough
      // that the filter corrects, so HSA serves a nonzero force.
      model.stylus.grab();
      model.stylus.moveTo([3.0, 0.0]);
      client.startTrial("hsa", 7);
      await done;
      client.close();

      // Full cycle: trial_start, a complete state stream, trial_end.
      expect(model.lastError).toBeNull();
      expect(model.config?.condition).toBe("hsa");
      expect(model.config?.seed).toBe(7);
      expect(model.config?.dynamics.dt).toBe(0.02);
      expect(model.environment?.format).toBe("cbf-teleop-env/1");
      expect(states).toHaveLength(TICK_CAP);
      expect(states.map((s) => s.tick)).toEqual([...Array(TICK_CAP).keys()]);
      expect(model.end?.outcome).toBe("timeout");
      expect(model.end?.metrics).not.toBeNull();

      // Outgoing input: saturated stylus, seq strictly increasing.
      const inputs = sent.filter((m) => m.type === "input");
      expect(inputs.length).toBeGreaterThan(10);
      let prevSeq = -1;
      for (const m of inputs) {
        const seq = m.seq as number;
        expect(seq).toBeGreaterThan(prevSeq);
        prevSeq = seq;
        const [sx, sy] = m.stylus as [number, number];
        expect(Math.hypot(sx, sy)).toBeLessThanOrEqual(5 + 1e-12);
      }

      // The rendered vehicle sits exactly at the last served position.
      const ctx = new RecordingContext();
      drawScene(ctx, model, W, H, { nowMs: model.lastStateAtMs });
      const env = model.environment!;
      const view = computeView(env.width, env.height, cockpitLayout(W, H).arena);
      const last = states.at(-1)!;
      const [sx, sy] = worldToScreen(view, last.x1);
      const discs = ctx.arcAt(sx, sy).filter((a) => a.fillStyle === COLORS.uav && a.filled);
      expect(discs).toHaveLength(1);

      // The force arrow tracks the served force, one frame at a time,
      // with one fixed display gain.
      const active = states.filter((s) => Math.hypot(s.force[0], s.force[1]) > 0.01);
      expect(active.length).toBeGreaterThan(0);
      const norms = new Set(active.map((s) => Math.hypot(s.force[0], s.force[1]).toFixed(6)));
      const samples = [active[0]!, active.at(-1)!];
      if (norms.size > 1) {
        const uniq = active.find(
          (s) =>
            Math.hypot(s.force[0], s.force[1]).toFixed(6) !==
            Math.hypot(samples[0]!.force[0], samples[0]!.force[1]).toFixed(6),
        );
        if (uniq) {
          samples[1] = uniq;
        }
      }
      const gain = 40;
      const { panelCenter, panelPxPerCm } = cockpitLayout(W, H);
      // The arrow anchors at the puck, which is still deflected to [3, 0].
      const puck = [
        panelCenter[0] + model.stylus.displacement[0] * panelPxPerCm,
        panelCenter[1] - model.stylus.displacement[1] * panelPxPerCm,
      ];
      for (const s of samples) {
        model.applyServer(s, model.lastStateAtMs);
        const frame = new RecordingContext();
        drawScene(frame, model, W, H, { forcePxPerN: gain, nowMs: model.lastStateAtMs });
        const shaft = frame
          .segmentsInColor(COLORS.force)
          .find((seg) => seg.from[0] === puck[0] && seg.from[1] === puck[1]);
        expect(shaft).toBeDefined();
        const len = Math.hypot(shaft!.to[0] - shaft!.from[0], shaft!.to[1] - shaft!.from[1]);
        expect(len).toBeCloseTo(Math.hypot(s.force[0], s.force[1]) * gain, 9);
      }
    },
    40000,
  );

  it("keeps the trial honest about server authority while inputs fly", async () => {
    const sock = new WsWebSocket(`ws://127.0.0.1:${PORT}/ws`);
    const model = new CockpitModel();
    let finish: () => void = () => {};
    const done = new Promise<void>((resolve, reject) => {
      finish = resolve;
      setTimeout(() => reject(new Error("no states")), 20000);
    });
    let count = 0;
    let poseMismatches = 0;
    const client = new CockpitClient(sock as unknown as CockpitSocket, model, {
      onUpdate: () => {
        if (model.latest !== null) {
          count += 1;
          // Local device state never leaks into the rendered pose.
          model.stylus.drive([Math.random() * 5, Math.random() * 5 - 2.5]);
          const pose = model.pose();
          if (
            pose === null ||
            pose.x1[0] !== model.latest.x1[0] ||
            pose.x1[1] !== model.latest.x1[1] ||
            pose.yaw !== model.latest.yaw
          ) {
            poseMismatches += 1;
          }
        }
        if (count >= 30) {
          finish();
        }
      },
    });
    client.startTrial("sa", 11);
    await done;
    client.abort();
    await new Promise((r) => setTimeout(r, 300));
    client.close();
    expect(count).toBeGreaterThanOrEqual(30);
    expect(poseMismatches).toBe(0);
  }, 30000);
});
