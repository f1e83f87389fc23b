/**
 * Virtual stylus puck. Displacement is in centimeters, the unit the
 * server expects, and is always saturated to the configured radius.
 * When nothing holds the puck a centering spring animates it back to
 * the origin, which is the visual stand-in for the restoring force of
 * a physical device.
 */

import type { Vec2 } from "./protocol";

// Exponential return rate per second once released; ~80 ms time constant.
const RETURN_RATE = 12;

export function clampToDisc(v: Vec2, radius: number): Vec2 {
  const n = Math.hypot(v[0], v[1]);
  if (n <= radius || n === 0) {
    return [v[0], v[1]];
  }
  const s = radius / n;
  return [v[0] * s, v[1] * s];
}

export class VirtualStylus {
  displacement: Vec2 = [0, 0];
  max: number;
  deadzone: number;
  private held = false;

  constructor(max = 5.0, deadzone = 1.0) {
    this.max = max;
    this.deadzone = deadzone;
  }

  /** Adopt the served input map so rings and saturation match the session. */
  configure(max: number, deadzone: number): void {
    this.max = max;
    this.deadzone = deadzone;
    this.displacement = clampToDisc(this.displacement, max);
  }

  grab(): void {
    this.held = true;
  }

  release(): void {
    this.held = false;
  }

  get isHeld(): boolean {
    return this.held;
  }

  /** Pointer drag: set the displacement directly, saturated. */
  moveTo(v: Vec2): void {
    this.displacement = clampToDisc(v, this.max);
  }

  /**
   * One-frame drive from a polled source such as a gamepad stick.
   * Acts like a momentary hold; the spring takes over the frame the
   * source goes idle.
   */
  drive(v: Vec2): void {
    this.displacement = clampToDisc(v, this.max);
  }

  get inDeadzone(): boolean {
    return Math.hypot(this.displacement[0], this.displacement[1]) < this.deadzone;
  }

  /** Advance the centering spring; no-op while the puck is held. */
  update(dtSeconds: number): void {
    if (this.held || dtSeconds <= 0) {
      return;
    }
    const decay = Math.exp(-RETURN_RATE * dtSeconds);
    let [x, y] = this.displacement;
    x *= decay;
    y *= decay;
    if (Math.hypot(x, y) < 1e-3) {
      x = 0;
      y = 0;
    }
    this.displacement = [x, y];
  }
}
