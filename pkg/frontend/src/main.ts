/**
 * Browser entry point: wires the DOM, the websocket client, and the
 * render loop together. All trial state comes from the server; this
 * file only routes devices in and pixels out.
 */

import { CockpitClient } from "./client";
import { GamepadPoller } from "./gamepad";
import { CockpitModel } from "./model";
import { FORCE_PX_PER_N, cockpitLayout, drawScene } from "./render";

const W = 960;
const H = 560;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing #${id}`);
  }
  return node as T;
}

const canvas = el<HTMLCanvasElement>("cockpit");
const maybeCtx = canvas.getContext("2d");
if (maybeCtx === null) {
  throw new Error("no 2d context");
}
const ctx = maybeCtx;
const serverInput = el<HTMLInputElement>("server");
const conditionSel = el<HTMLSelectElement>("condition");
const seedInput = el<HTMLInputElement>("seed");
const gainInput = el<HTMLInputElement>("gain");
const connectBtn = el<HTMLButtonElement>("connect");
const startBtn = el<HTMLButtonElement>("start");
const abortBtn = el<HTMLButtonElement>("abort");

let model = new CockpitModel();
let client: CockpitClient | null = null;
const pads = new GamepadPoller();

function connect(): void {
  client?.close();
  model = new CockpitModel();
  const sock = new WebSocket(serverInput.value);
  client = new CockpitClient(sock, model);
}

connectBtn.addEventListener("click", connect);
startBtn.addEventListener("click", () => {
  if (client === null || model.status === "closed" || model.status === "error") {
    connect();
  }
  const seed = Number.parseInt(seedInput.value, 10) || 0;
  client?.startTrial(conditionSel.value, seed);
});
abortBtn.addEventListener("click", () => client?.abort());

// Pointer drag on the stylus panel.
canvas.addEventListener("pointerdown", (e) => {
  const p = toLogical(e);
  const { panelCenter, panelRadiusPx } = cockpitLayout(W, H);
  if (Math.hypot(p[0] - panelCenter[0], p[1] - panelCenter[1]) <= panelRadiusPx + 10) {
    model.stylus.grab();
    canvas.setPointerCapture(e.pointerId);
    dragTo(p);
  }
});
canvas.addEventListener("pointermove", (e) => {
  if (model.stylus.isHeld) {
    dragTo(toLogical(e));
  }
});
const endDrag = () => model.stylus.release();
canvas.addEventListener("pointerup", endDrag);
canvas.addEventListener("pointercancel", endDrag);

function toLogical(e: PointerEvent): [number, number] {
  const r = canvas.getBoundingClientRect();
  return [((e.clientX - r.left) / r.width) * W, ((e.clientY - r.top) / r.height) * H];
}

function dragTo(p: [number, number]): void {
  const { panelCenter, panelPxPerCm } = cockpitLayout(W, H);
  model.stylus.moveTo([
    (p[0] - panelCenter[0]) / panelPxPerCm,
    -(p[1] - panelCenter[1]) / panelPxPerCm,
  ]);
}

// Yaw on A/D or the arrow keys, inspect on Space or I.
window.addEventListener("keydown", (e) => {
  if (e.key === "a" || e.key === "ArrowLeft") {
    model.yawCcwHeld = true;
  } else if (e.key === "d" || e.key === "ArrowRight") {
    model.yawCwHeld = true;
  } else if ((e.key === " " || e.key === "i") && !e.repeat) {
    model.queueInspect();
    e.preventDefault();
  }
});
window.addEventListener("keyup", (e) => {
  if (e.key === "a" || e.key === "ArrowLeft") {
    model.yawCcwHeld = false;
  } else if (e.key === "d" || e.key === "ArrowRight") {
    model.yawCwHeld = false;
  }
});

let lastFrame = performance.now();
function frame(now: number): void {
  requestAnimationFrame(frame);
  const dt = Math.min(0.05, (now - lastFrame) / 1000);
  lastFrame = now;

  const pad = pads.poll(model.stylus.max);
  if (pad !== null) {
    if (pad.stylusCm !== null) {
      model.stylus.drive(pad.stylusCm);
    }
    if (pad.yaw !== 0) {
      model.yawCcwHeld = pad.yaw === 1;
      model.yawCwHeld = pad.yaw === -1;
    }
    if (pad.inspectPressed) {
      model.queueInspect();
    }
    const f = model.latest?.force ?? [0, 0];
    const fMax = model.config?.paradigm.f_max ?? 3;
    const n = Math.hypot(f[0], f[1]);
    if (n > 0) {
      pads.rumble(n / fMax);
    }
  }
  model.stylus.update(dt);

  const dpr = window.devicePixelRatio || 1;
  if (canvas.width !== W * dpr) {
    canvas.width = W * dpr;
    canvas.height = H * dpr;
  }
  ctx.setTransform(dpr, 0, 0, dpr, 0, 0);
  drawScene(ctx, model, W, H, { forcePxPerN: Number(gainInput.value) || FORCE_PX_PER_N });
}
requestAnimationFrame(frame);
