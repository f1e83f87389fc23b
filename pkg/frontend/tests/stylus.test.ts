import { describe, expect, it } from "vitest";

import { VirtualStylus, clampToDisc } from "../src/stylus";

describe("clampToDisc", () => {
  it("leaves interior points untouched", () => {
    expect(clampToDisc([1.2, -0.7], 5)).toEqual([1.2, -0.7]);
    expect(clampToDisc([0, 0], 5)).toEqual([0, 0]);
  });

  it("projects exterior points onto the boundary", () => {
    const v = clampToDisc([30, 40], 5);
    expect(v[0]).toBeCloseTo(3, 12);
    expect(v[1]).toBeCloseTo(4, 12);
    expect(Math.hypot(v[0], v[1])).toBeCloseTo(5, 12);
  });
});

describe("VirtualStylus", () => {
  it("saturates drags to the configured radius", () => {
    const st = new VirtualStylus(5, 1);
    st.moveTo([100, 0]);
    expect(st.displacement).toEqual([5, 0]);
    st.drive([0, -7]);
    expect(st.displacement).toEqual([0, -5]);
  });

  it("re-clamps when the served input map shrinks the radius", () => {
    const st = new VirtualStylus(5, 1);
    st.moveTo([4, 0]);
    st.configure(2, 0.5);
    expect(st.displacement).toEqual([2, 0]);
    expect(st.deadzone).toBe(0.5);
  });

  it("reports the deadzone by strict radius comparison", () => {
    const st = new VirtualStylus(5, 1);
    st.moveTo([0.5, 0]);
    expect(st.inDeadzone).toBe(true);
    st.moveTo([1.01, 0]);
    expect(st.inDeadzone).toBe(false);
  });

  it("springs back to an exact zero after release", () => {
    const st = new VirtualStylus(5, 1);
    st.grab();
    st.moveTo([3, 2]);
    st.update(10);
    expect(st.displacement).toEqual([3, 2]);

    st.release();
    for (let i = 0; i < 50; i++) {
      st.update(1 / 60);
    }
    expect(st.displacement).toEqual([0, 0]);
  });

  it("decays monotonically while returning", () => {
    const st = new VirtualStylus(5, 1);
    st.moveTo([4, 0]);
    let prev = 4;
    for (let i = 0; i < 5; i++) {
      st.update(0.01);
      const mag = Math.hypot(st.displacement[0], st.displacement[1]);
      expect(mag).toBeLessThan(prev);
      prev = mag;
    }
  });
});
