import { describe, expect, it } from "vitest";

import { clampV, decodeHash, defaultState, encodeHash } from "../src/state.js";

describe("view state", () => {
  it("hash round-trips the full state", () => {
    const s = defaultState(800, 800);
    s.system = "standard";
    s.V = -0.123456789;
    s.k = 1.75;
    s.sheet = "lower";
    s.viewport.centerX = 0.25;
    s.viewport.unitsPerPixel = 0.0005;
    s.overlays.heatmap = true;
    s.overlays.singularities = false;
    s.seeds.push({ x: 0.1, y: -0.2, color: "#e41a1c" });
    const back = decodeHash(encodeHash(s), 800, 800);
    expect(back.system).toBe("standard");
    expect(back.V).toBeCloseTo(s.V, 9);
    expect(back.k).toBeCloseTo(1.75, 9);
    expect(back.sheet).toBe("lower");
    expect(back.viewport.centerX).toBeCloseTo(0.25, 9);
    expect(back.overlays.heatmap).toBe(true);
    expect(back.overlays.singularities).toBe(false);
    expect(back.seeds).toHaveLength(1);
    expect(back.seeds[0].y).toBeCloseTo(-0.2, 9);
  });

  it("V slider range is clamped to [-1, -0.001]", () => {
    expect(clampV(-2)).toBe(-1);
    expect(clampV(0)).toBe(-0.001);
    expect(clampV(0.5)).toBe(-0.001);
    expect(clampV(-0.4)).toBe(-0.4);
  });

  it("garbage hashes fall back to the default state", () => {
    const s = decodeHash("#%zz-not-json", 640, 640);
    expect(s.system).toBe("trace");
    expect(s.V).toBe(-0.5);
  });
});
