/**
 * ViewState: everything needed to restore the explorer, encoded in the URL
 * hash so views are shareable.
 */

import { Viewport, defaultViewport } from "./transform.js";

export interface SeedEntry {
  x: number;
  y: number;
  color: string;
}

export interface ViewState {
  system: "trace" | "standard";
  /** trace-map level, clamped to [-1, -0.001] */
  V: number;
  /** standard-map kick strength, >= 0 */
  k: number;
  sheet: "upper" | "lower";
  viewport: Viewport;
  overlays: {
    orbits: boolean;
    heatmap: boolean;
    periodic: boolean;
    manifolds: boolean;
    singularities: boolean;
  };
  seeds: SeedEntry[];
}

export const V_MIN = -1.0;
export const V_MAX = -0.001;

export function clampV(V: number): number {
  return Math.min(V_MAX, Math.max(V_MIN, V));
}

export function clampK(k: number): number {
  return Math.max(0, k);
}

export function defaultState(widthPx = 800, heightPx = 800): ViewState {
  return {
    system: "trace",
    V: -0.5,
    k: 0.8,
    sheet: "upper",
    viewport: defaultViewport(widthPx, heightPx),
    overlays: {
      orbits: true,
      heatmap: false,
      periodic: false,
      manifolds: false,
      singularities: true,
    },
    seeds: [],
  };
}

const round = (x: number) => Math.round(x * 1e9) / 1e9;

export function encodeHash(s: ViewState): string {
  const payload = {
    sys: s.system,
    V: round(s.V),
    k: round(s.k),
    sh: s.sheet,
    vp: [round(s.viewport.centerX), round(s.viewport.centerY),
         round(s.viewport.unitsPerPixel)],
    ov: [s.overlays.orbits, s.overlays.heatmap, s.overlays.periodic,
         s.overlays.manifolds, s.overlays.singularities].map(Number).join(""),
    sd: s.seeds.map((p) => [round(p.x), round(p.y), p.color]),
  };
  return "#" + encodeURIComponent(JSON.stringify(payload));
}

export function decodeHash(hash: string, widthPx = 800, heightPx = 800): ViewState {
  const base = defaultState(widthPx, heightPx);
  if (!hash || hash.length < 2) return base;
  try {
    const p = JSON.parse(decodeURIComponent(hash.slice(1)));
    const ov = String(p.ov ?? "10001");
    return {
      system: p.sys === "standard" ? "standard" : "trace",
      V: clampV(Number(p.V ?? base.V)),
      k: clampK(Number(p.k ?? base.k)),
      sheet: p.sh === "lower" ? "lower" : "upper",
      viewport: {
        centerX: Number(p.vp?.[0] ?? 0),
        centerY: Number(p.vp?.[1] ?? 0),
        unitsPerPixel: Number(p.vp?.[2] ?? base.viewport.unitsPerPixel),
        widthPx,
        heightPx,
      },
      overlays: {
        orbits: ov[0] === "1",
        heatmap: ov[1] === "1",
        periodic: ov[2] === "1",
        manifolds: ov[3] === "1",
        singularities: ov[4] === "1",
      },
      seeds: Array.isArray(p.sd)
        ? p.sd.map((row: [number, number, string]) => ({
            x: Number(row[0]),
            y: Number(row[1]),
            color: String(row[2]),
          }))
        : [],
    };
  } catch {
    return base;
  }
}
