// Fixed colormaps, hex stops identical to the backend's PNG export so
// legends and golden images agree across both components.

export const HEAT_STOPS = ["#0d0887", "#7e03a8", "#cc4778", "#f89441", "#f0f921"];
export const DIVERGING_STOPS = ["#2166ac", "#f7f7f7", "#b2182b"];
export const NODATA_COLOR = "#808080";

export type Rgb = [number, number, number];

export function hexToRgb(hex: string): Rgb {
  const h = hex.replace("#", "");
  return [
    parseInt(h.slice(0, 2), 16),
    parseInt(h.slice(2, 4), 16),
    parseInt(h.slice(4, 6), 16),
  ];
}

/** Piecewise-linear lookup of t in [0, 1] over the stops (clamped outside). */
export function colormapLookup(stops: string[], t: number): Rgb {
  const x = Math.min(1, Math.max(0, t));
  const pos = x * (stops.length - 1);
  const lo = Math.floor(pos);
  const hi = Math.min(lo + 1, stops.length - 1);
  const frac = pos - lo;
  const a = hexToRgb(stops[lo]);
  const b = hexToRgb(stops[hi]);
  return [
    Math.round(a[0] * (1 - frac) + b[0] * frac),
    Math.round(a[1] * (1 - frac) + b[1] * frac),
    Math.round(a[2] * (1 - frac) + b[2] * frac),
  ];
}

/**
 * Pure cell color: a function of (value, min, max, stops) only.
 * `centerZero` maps symmetrically around 0, which diff layers use.
 */
export function valueToColor(
  value: number,
  min: number,
  max: number,
  stops: string[],
  centerZero = false,
): Rgb {
  let lo = min;
  let hi = max;
  if (centerZero) {
    const bound = Math.max(Math.abs(min), Math.abs(max), 1e-30);
    lo = -bound;
    hi = bound;
  }
  const span = hi > lo ? hi - lo : 1;
  return colormapLookup(stops, (value - lo) / span);
}

export function rgbCss([r, g, b]: Rgb): string {
  return `rgb(${r},${g},${b})`;
}
