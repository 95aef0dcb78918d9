/**
 * Symmetric diverging colormap for quasiprobability heatmaps.
 *
 * Negative values shade toward blue, positive toward red, zero is white;
 * the scale is always centered at zero so negativity is visually honest.
 */

const NEGATIVE: [number, number, number] = [33, 102, 172];
const CENTER: [number, number, number] = [255, 255, 255];
const POSITIVE: [number, number, number] = [178, 24, 43];

function lerp(a: [number, number, number], b: [number, number, number], t: number): [number, number, number] {
  return [
    Math.round(a[0] + (b[0] - a[0]) * t),
    Math.round(a[1] + (b[1] - a[1]) * t),
    Math.round(a[2] + (b[2] - a[2]) * t),
  ];
}

function toHex(rgb: [number, number, number]): string {
  return "#" + rgb.map((v) => v.toString(16).padStart(2, "0")).join("");
}

/** Color at t in [0, 1], with t = 0.5 mapping to the white center. */
export function divergingColor(t: number): string {
  const clamped = Math.min(1, Math.max(0, t));
  if (clamped < 0.5) return toHex(lerp(NEGATIVE, CENTER, clamped * 2));
  return toHex(lerp(CENTER, POSITIVE, (clamped - 0.5) * 2));
}

/** Evenly spaced color stops, suitable for a continuous visual map. */
export function divergingStops(count = 33): string[] {
  return Array.from({ length: count }, (_, i) => divergingColor(i / (count - 1)));
}

/** Symmetric value range [-m, m] covering all finite entries. */
export function symmetricRange(values: number[][]): [number, number] {
  let m = 0;
  for (const row of values) {
    for (const v of row) {
      if (Number.isFinite(v)) m = Math.max(m, Math.abs(v));
    }
  }
  if (m === 0) m = 1;
  return [-m, m];
}
