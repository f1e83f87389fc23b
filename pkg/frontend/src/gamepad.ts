/**
 * Optional gamepad support. The left stick drives the stylus, the
 * shoulder buttons yaw, button 0 inspects, and the feedback force is
 * echoed as rumble where the browser exposes an actuator.
 */

import type { Vec2, YawInput } from "./protocol";

const STICK_IDLE = 0.15;

export interface PadSample {
  /** Stylus displacement in cm, or null while the stick is idle. */
  stylusCm: Vec2 | null;
  yaw: YawInput;
  inspectPressed: boolean;
}

export class GamepadPoller {
  private inspectWasDown = false;

  poll(stylusMax: number): PadSample | null {
    if (typeof navigator === "undefined" || !navigator.getGamepads) {
      return null;
    }
    let gp: Gamepad | null = null;
    for (const p of navigator.getGamepads()) {
      if (p?.connected) {
        gp = p;
        break;
      }
    }
    if (gp === null) {
      return null;
    }

    const ax = gp.axes[0] ?? 0;
    const ay = gp.axes[1] ?? 0;
    const active = Math.hypot(ax, ay) > STICK_IDLE;
    // Stick up is a negative axis value; forward is +y in stylus space.
    const stylusCm: Vec2 | null = active ? [ax * stylusMax, -ay * stylusMax] : null;

    const ccw = gp.buttons[4]?.pressed ?? false;
    const cw = gp.buttons[5]?.pressed ?? false;
    const yaw = ((ccw ? 1 : 0) - (cw ? 1 : 0)) as YawInput;

    const down = gp.buttons[0]?.pressed ?? false;
    const inspectPressed = down && !this.inspectWasDown;
    this.inspectWasDown = down;

    return { stylusCm, yaw, inspectPressed };
  }

  /** Best-effort haptic echo; silently absent on most pads. */
  rumble(level: number): void {
    if (typeof navigator === "undefined" || !navigator.getGamepads) {
      return;
    }
    for (const p of navigator.getGamepads()) {
      const actuator = (p as unknown as { vibrationActuator?: any })?.vibrationActuator;
      if (p?.connected && actuator?.playEffect) {
        actuator.playEffect("dual-rumble", {
          duration: 50,
          strongMagnitude: Math.min(1, Math.max(0, level)),
          weakMagnitude: Math.min(1, Math.max(0, level)) * 0.5,
        });
        return;
      }
    }
  }
}
