/**
 * Canvas renderer: top-down arena on the left, virtual stylus panel on
 * the right, one line of HUD text along the top. All world geometry is
 * drawn from the last State message; the only client-side motion is the
 * stylus puck itself.
 *
 * Pure geometry helpers (view fit, world-to-screen, force arrow) are
 * exported separately so they can be checked without a canvas.
 */

import type { CockpitModel } from "./model";
import type { Vec2 } from "./protocol";

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface View {
  origin: Vec2;
  pxPerM: number;
}

export interface Layout {
  arena: Rect;
  panelCenter: Vec2;
  panelPxPerCm: number;
  panelRadiusPx: number;
}

// Display gain for the force arrow, pixels per newton. Presentation
// only; input messages never depend on it.
export const FORCE_PX_PER_N = 40;

const HUD_H = 28;
const PANEL_W = 230;
const PAD = 12;

export function cockpitLayout(widthPx: number, heightPx: number): Layout {
  const arena: Rect = {
    x: PAD,
    y: HUD_H + PAD,
    w: widthPx - PANEL_W - 3 * PAD,
    h: heightPx - HUD_H - 2 * PAD,
  };
  const cx = widthPx - PAD - (PANEL_W - PAD) / 2;
  const radius = (PANEL_W - PAD) / 2 - 6;
  return {
    arena,
    panelCenter: [cx, arena.y + radius + 24],
    panelPxPerCm: radius / 5.6,
    panelRadiusPx: radius,
  };
}

/** Fit a width x height meter arena into a pixel rect, centered, y up. */
export function computeView(widthM: number, heightM: number, rect: Rect): View {
  const pxPerM = Math.min(rect.w / widthM, rect.h / heightM);
  const originX = rect.x + (rect.w - widthM * pxPerM) / 2;
  const originY = rect.y + rect.h - (rect.h - heightM * pxPerM) / 2;
  return { origin: [originX, originY], pxPerM };
}

export function worldToScreen(view: View, p: Vec2): Vec2 {
  return [view.origin[0] + p[0] * view.pxPerM, view.origin[1] - p[1] * view.pxPerM];
}

/**
 * Arrow segment for a force vector anchored at a screen point. Returns
 * null for zero force so nothing is drawn. The screen length is
 * ||force|| * pxPerN exactly; the y flip only reorients it.
 */
export function forceArrow(
  origin: Vec2,
  force: Vec2,
  pxPerN: number,
): { from: Vec2; to: Vec2 } | null {
  if (Math.hypot(force[0], force[1]) === 0) {
    return null;
  }
  return {
    from: [origin[0], origin[1]],
    to: [origin[0] + force[0] * pxPerN, origin[1] - force[1] * pxPerN],
  };
}

type StyleValue = string | CanvasGradient | CanvasPattern;

/** The slice of CanvasRenderingContext2D the renderer touches. */
export interface Canvas2D {
  fillStyle: StyleValue;
  strokeStyle: StyleValue;
  lineWidth: number;
  font: string;
  textAlign: CanvasTextAlign;
  globalAlpha: number;
  save(): void;
  restore(): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fill(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
}

export interface DrawOptions {
  forcePxPerN?: number;
  nowMs?: number;
}

export const COLORS = {
  bg: "#10141a",
  frame: "#3a4656",
  obstacle: "#55647a",
  targetLeft: "#ffd24a",
  targetDone: "#3f9e62",
  uav: "#4fc3f7",
  heading: "#e8eef5",
  velocity: "#4fc3f780",
  puck: "#e0e6ee",
  ring: "#56607a",
  force: "#ff5a5a",
  text: "#c7d0dc",
  warn: "#ffb347",
  err: "#ff6b6b",
};

function circle(ctx: Canvas2D, c: Vec2, r: number): void {
  ctx.beginPath();
  ctx.arc(c[0], c[1], r, 0, Math.PI * 2);
}

function arrow(ctx: Canvas2D, from: Vec2, to: Vec2): void {
  const dx = to[0] - from[0];
  const dy = to[1] - from[1];
  const len = Math.hypot(dx, dy);
  ctx.beginPath();
  ctx.moveTo(from[0], from[1]);
  ctx.lineTo(to[0], to[1]);
  ctx.stroke();
  if (len < 1e-9) {
    return;
  }
  const head = Math.min(9, 0.35 * len);
  const ux = dx / len;
  const uy = dy / len;
  ctx.beginPath();
  ctx.moveTo(to[0], to[1]);
  ctx.lineTo(to[0] - head * (ux + 0.55 * uy), to[1] - head * (uy - 0.55 * ux));
  ctx.moveTo(to[0], to[1]);
  ctx.lineTo(to[0] - head * (ux - 0.55 * uy), to[1] - head * (uy + 0.55 * ux));
  ctx.stroke();
}

function drawArena(ctx: Canvas2D, model: CockpitModel, view: View): void {
  const env = model.environment;
  if (env === null) {
    return;
  }
  const m = view.pxPerM;
  const tl = worldToScreen(view, [0, env.height]);
  ctx.strokeStyle = COLORS.frame;
  ctx.lineWidth = 1.5;
  ctx.strokeRect(tl[0], tl[1], env.width * m, env.height * m);

  ctx.fillStyle = COLORS.obstacle;
  for (const o of env.obstacles) {
    circle(ctx, worldToScreen(view, [o.x, o.y]), o.radius * m);
    ctx.fill();
  }

  const { remaining, inspected } = model.targetsByStatus();
  ctx.strokeStyle = COLORS.targetLeft;
  ctx.lineWidth = 2;
  for (const t of remaining) {
    const c = worldToScreen(view, [t.x, t.y]);
    circle(ctx, c, t.radius * m);
    ctx.stroke();
    ctx.fillStyle = COLORS.targetLeft;
    circle(ctx, c, 2);
    ctx.fill();
  }
  ctx.fillStyle = COLORS.targetDone;
  ctx.globalAlpha = 0.55;
  for (const t of inspected) {
    circle(ctx, worldToScreen(view, [t.x, t.y]), t.radius * m);
    ctx.fill();
  }
  ctx.globalAlpha = 1;

  const pose = model.pose();
  if (pose === null) {
    return;
  }
  const c = worldToScreen(view, pose.x1);
  const r = env.uav_radius * m;
  const state = model.latest;
  if (state !== null) {
    ctx.strokeStyle = COLORS.velocity;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(c[0], c[1]);
    ctx.lineTo(c[0] + state.x2[0] * m * 0.4, c[1] - state.x2[1] * m * 0.4);
    ctx.stroke();
  }
  ctx.fillStyle = COLORS.uav;
  circle(ctx, c, r);
  ctx.fill();
  ctx.strokeStyle = COLORS.heading;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(c[0], c[1]);
  ctx.lineTo(c[0] + Math.cos(pose.yaw) * r * 2.2, c[1] - Math.sin(pose.yaw) * r * 2.2);
  ctx.stroke();
}

function drawStylusPanel(
  ctx: Canvas2D,
  model: CockpitModel,
  layout: Layout,
  forcePxPerN: number,
): void {
  const [cx, cy] = layout.panelCenter;
  const st = model.stylus;
  const g = layout.panelPxPerCm;

  ctx.strokeStyle = COLORS.ring;
  ctx.lineWidth = 1;
  ctx.setLineDash([]);
  circle(ctx, [cx, cy], st.max * g);
  ctx.stroke();
  ctx.setLineDash([4, 4]);
  circle(ctx, [cx, cy], st.deadzone * g);
  ctx.stroke();
  ctx.setLineDash([]);

  const px: Vec2 = [cx + st.displacement[0] * g, cy - st.displacement[1] * g];
  ctx.fillStyle = COLORS.puck;
  ctx.globalAlpha = st.inDeadzone ? 0.6 : 1;
  circle(ctx, px, 7);
  ctx.fill();
  ctx.globalAlpha = 1;

  // World-frame feedback force, anchored at the puck.
  const force = model.latest?.force ?? [0, 0];
  const seg = forceArrow(px, [force[0], force[1]], forcePxPerN);
  if (seg !== null) {
    ctx.strokeStyle = COLORS.force;
    ctx.lineWidth = 2.5;
    arrow(ctx, seg.from, seg.to);
  }

  ctx.fillStyle = COLORS.text;
  ctx.textAlign = "center";
  ctx.fillText("stylus [cm]", cx, cy + st.max * g + 18);
  const n = Math.hypot(force[0], force[1]);
  ctx.fillText(`force ${n.toFixed(2)} N`, cx, cy + st.max * g + 34);
  ctx.textAlign = "left";
}

function drawHud(ctx: Canvas2D, model: CockpitModel, widthPx: number, nowMs: number): void {
  ctx.fillStyle = COLORS.text;
  ctx.font = "13px ui-monospace, monospace";
  const s = model.latest;
  const cond = model.config?.condition ?? "-";
  const parts = [
    `cond ${cond}`,
    `seed ${model.config?.seed ?? "-"}`,
    s ? `t ${s.t.toFixed(2)}s` : "t -",
    s ? `h_min ${s.h_min.toFixed(3)}` : "h_min -",
    s ? `targets ${s.targets.length}` : "targets -",
    s ? `phase ${s.phase}` : "phase -",
  ];
  ctx.fillText(parts.join("   "), PAD, 19);

  ctx.textAlign = "right";
  if (model.isStale(nowMs)) {
    ctx.fillStyle = COLORS.warn;
    ctx.fillText(`DEGRADED ${model.status}`, widthPx - PAD, 19);
  } else {
    ctx.fillStyle = model.status === "error" ? COLORS.err : COLORS.text;
    ctx.fillText(model.status, widthPx - PAD, 19);
  }
  ctx.textAlign = "left";
}

function drawEndBanner(ctx: Canvas2D, model: CockpitModel, arena: Rect): void {
  const end = model.end;
  if (end === null) {
    return;
  }
  const cx = arena.x + arena.w / 2;
  const cy = arena.y + arena.h / 2;
  ctx.fillStyle = "#000000a0";
  ctx.fillRect(arena.x, cy - 34, arena.w, 68);
  ctx.fillStyle = end.outcome === "succeeded" ? COLORS.targetDone : COLORS.warn;
  ctx.textAlign = "center";
  ctx.font = "18px ui-monospace, monospace";
  ctx.fillText(`trial ${end.outcome}`, cx, cy - 6);
  ctx.font = "13px ui-monospace, monospace";
  ctx.fillStyle = COLORS.text;
  const m = end.metrics;
  if (m !== null) {
    const dur = typeof m.duration === "number" ? m.duration.toFixed(1) : "-";
    const dis = typeof m.disagreement === "number" ? m.disagreement.toFixed(3) : "-";
    ctx.fillText(`duration ${dur}s   disagreement ${dis}`, cx, cy + 16);
  }
  ctx.textAlign = "left";
}

export function drawScene(
  ctx: Canvas2D,
  model: CockpitModel,
  widthPx: number,
  heightPx: number,
  opts: DrawOptions = {},
): void {
  const nowMs = opts.nowMs ?? Date.now();
  const layout = cockpitLayout(widthPx, heightPx);

  ctx.clearRect(0, 0, widthPx, heightPx);
  ctx.fillStyle = COLORS.bg;
  ctx.fillRect(0, 0, widthPx, heightPx);
  ctx.font = "13px ui-monospace, monospace";

  drawHud(ctx, model, widthPx, nowMs);
  const env = model.environment;
  if (env === null) {
    ctx.fillStyle = COLORS.text;
    ctx.textAlign = "center";
    ctx.fillText("connect and start a trial", widthPx / 2, heightPx / 2);
    ctx.textAlign = "left";
    return;
  }
  const view = computeView(env.width, env.height, layout.arena);
  drawArena(ctx, model, view);
  drawStylusPanel(ctx, model, layout, opts.forcePxPerN ?? FORCE_PX_PER_N);
  drawEndBanner(ctx, model, layout.arena);
}
