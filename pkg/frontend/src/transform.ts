/**
 * Viewport transforms between canvas pixels and chart coordinates.
 *
 * The chart is the (x, y) plane of the trace-map projection (or the unit
 * torus for the standard map).  These are the only numerics the UI is
 * allowed to perform; everything else comes from service responses.
 */

export interface Viewport {
  centerX: number;
  centerY: number;
  /** chart units per pixel */
  unitsPerPixel: number;
  widthPx: number;
  heightPx: number;
}

export function defaultViewport(widthPx: number, heightPx: number): Viewport {
  return {
    centerX: 0,
    centerY: 0,
    unitsPerPixel: 2.4 / Math.min(widthPx, heightPx),
    widthPx,
    heightPx,
  };
}

export function canvasToChart(v: Viewport, px: number, py: number): [number, number] {
  const x = v.centerX + (px - v.widthPx / 2) * v.unitsPerPixel;
  const y = v.centerY - (py - v.heightPx / 2) * v.unitsPerPixel;
  return [x, y];
}

export function chartToCanvas(v: Viewport, x: number, y: number): [number, number] {
  const px = v.widthPx / 2 + (x - v.centerX) / v.unitsPerPixel;
  const py = v.heightPx / 2 - (y - v.centerY) / v.unitsPerPixel;
  return [px, py];
}

/** Zoom about a fixed canvas point so the point stays put on screen. */
export function zoomAbout(v: Viewport, px: number, py: number, factor: number): Viewport {
  const [cx, cy] = canvasToChart(v, px, py);
  const unitsPerPixel = v.unitsPerPixel / factor;
  const centerX = cx - (px - v.widthPx / 2) * unitsPerPixel;
  const centerY = cy + (py - v.heightPx / 2) * unitsPerPixel;
  return { ...v, centerX, centerY, unitsPerPixel };
}

export function pan(v: Viewport, dxPx: number, dyPx: number): Viewport {
  return {
    ...v,
    centerX: v.centerX - dxPx * v.unitsPerPixel,
    centerY: v.centerY + dyPx * v.unitsPerPixel,
  };
}

/** Clamp the viewport center to the projected domain bounds. */
export function clampCenter(v: Viewport, bound: number): Viewport {
  return {
    ...v,
    centerX: Math.min(bound, Math.max(-bound, v.centerX)),
    centerY: Math.min(bound, Math.max(-bound, v.centerY)),
  };
}
