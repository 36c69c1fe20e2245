import { describe, expect, it } from "vitest";

import { RequestTokens } from "../src/tokens.js";

describe("request tokens", () => {
  it("a newer dispatch invalidates the older response", () => {
    const t = new RequestTokens();
    const first = t.issue("orbit");
    const second = t.issue("orbit");
    expect(t.isCurrent("orbit", first)).toBe(false);
    expect(t.isCurrent("orbit", second)).toBe(true);
  });

  it("kinds are independent", () => {
    const t = new RequestTokens();
    const orbit = t.issue("orbit");
    t.issue("heatmap");
    t.issue("heatmap");
    expect(t.isCurrent("orbit", orbit)).toBe(true);
  });

  it("cancel invalidates without a new dispatch", () => {
    const t = new RequestTokens();
    const tok = t.issue("manifold");
    t.cancel("manifold");
    expect(t.isCurrent("manifold", tok)).toBe(false);
  });

  it("slider-drag storm: only the last request may commit", async () => {
    // acceptance: slider drag never leaves a stale overlay
    const t = new RequestTokens();
    const committed: number[] = [];
    const launch = (value: number, delayMs: number) => {
      const tok = t.issue("heatmap");
      return new Promise<void>((resolve) =>
        setTimeout(() => {
          if (t.isCurrent("heatmap", tok)) committed.push(value);
          resolve();
        }, delayMs));
    };
    // older requests resolve *after* newer ones (out-of-order network)
    await Promise.all([launch(1, 30), launch(2, 20), launch(3, 5)]);
    expect(committed).toEqual([3]);
  });
});
