/**
 * End-to-end latency against the real local service (spawned in the global
 * setup): a click-to-seed round trip for a 1e4-point orbit must complete in
 * under 300 ms, measured as request + decode + the per-point render
 * transform pass (rasterization itself happens on the GPU path in the
 * browser and is not the budget driver).
 */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { chartToCanvas, defaultViewport } from "../src/transform.js";

const api = new ApiClient("http://127.0.0.1:8719");

describe("service integration", () => {
  it("meta reports the defaults table", async () => {
    const meta = await api.meta();
    expect(meta).toHaveProperty("defaults");
  });

  it("click-to-seed renders a 1e4-point orbit in under 300 ms", async () => {
    const system = { kind: "trace" as const, V: -0.5 };
    // warm pass: JIT compilation and caches are amortized across a session
    await api.orbit(system, [0.05, -0.1], 10_000);

    const vp = defaultViewport(800, 800);
    const t0 = performance.now();
    const resp = await api.orbit(system, [0.12, -0.07], 10_000);
    let visible = 0;
    for (const p of resp.points) {
      const [px, py] = chartToCanvas(vp, p[0], p[1]);
      if (px >= 0 && px < vp.widthPx && py >= 0 && py < vp.heightPx) visible++;
    }
    const elapsed = performance.now() - t0;
    expect(resp.points.length).toBe(10_001);
    expect(visible).toBeGreaterThan(0);
    expect(elapsed).toBeLessThan(300);
  }, 120_000);

  it("off-surface clicks return the 422 suggestion contract", async () => {
    try {
      await api.orbit({ kind: "trace", V: -0.5 }, [0.0, 0.0, 0.9], 100);
      expect.unreachable("expected a 422");
    } catch (err) {
      const e = err as { status: number; body: { detail: { suggestion: number[] } } };
      expect(e.status).toBe(422);
      expect(e.body.detail.suggestion).toHaveLength(3);
    }
  });

  it("identical requests return identical bodies (cache determinism)", async () => {
    const system = { kind: "standard" as const, k: 1.2 };
    const a = await api.orbit(system, [0.3, 0.2], 2000);
    const b = await api.orbit(system, [0.3, 0.2], 2000);
    expect(a).toEqual(b);
  });
}, 180_000);
