/**
 * Shared SVG plotting helpers for the figure panels.
 *
 * Everything here is a pure string builder: fixed inputs produce
 * byte-identical markup, which is what keeps rendered figures
 * reproducible across runs.
 */

// ── Rounding ────────────────────────────────────────────────────────────────

/** Round to 2 decimals for compact, stable SVG coordinates. */
export const r = (v: number): string => v.toFixed(2);

// ── Scale factories ─────────────────────────────────────────────────────────

/** Linear scale mapping [domainMin, domainMax] → [rangeMin, rangeMax]. */
export function makeLinearScale(
  domainMin: number, domainMax: number,
  rangeMin: number, rangeMax: number,
): (v: number) => number {
  const domainSpan = domainMax - domainMin;
  const rangeSpan = rangeMax - rangeMin;
  return (v: number) => rangeMin + ((v - domainMin) / domainSpan) * rangeSpan;
}

/** Log10 scale mapping [domainMin, domainMax] (both > 0) → [rangeMin, rangeMax]. */
export function makeLog10Scale(
  domainMin: number, domainMax: number,
  rangeMin: number, rangeMax: number,
): (v: number) => number {
  const lo = Math.log10(domainMin);
  const span = Math.log10(domainMax) - lo;
  const rangeSpan = rangeMax - rangeMin;
  return (v: number) => rangeMin + ((Math.log10(v) - lo) / span) * rangeSpan;
}

// ── Tick generation ─────────────────────────────────────────────────────────

/** Evenly spaced ticks with a 1/2/5 step sized for roughly `target` ticks. */
export function niceLinearTicks(min: number, max: number, target = 5): number[] {
  const span = max - min;
  const raw = span / Math.max(target, 2);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm <= 1 ? 1 : norm <= 2 ? 2 : norm <= 5 ? 5 : 10) * mag;
  const ticks: number[] = [];
  const start = Math.ceil(min / step) * step;
  for (let v = start; v <= max + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

/** Decade ticks (…, 0.1, 1, 10, …) covering [min, max], plus 2×/5× minors when sparse. */
export function decadeTicks(min: number, max: number): number[] {
  const loExp = Math.floor(Math.log10(min));
  const hiExp = Math.ceil(Math.log10(max));
  const inRange = (v: number): boolean => v >= min / (1 + 1e-12) && v <= max * (1 + 1e-12);
  const majors: number[] = [];
  for (let e = loExp; e <= hiExp; e++) {
    const v = Math.pow(10, e);
    if (inRange(v)) majors.push(v);
  }
  if (majors.length >= 4) return majors;
  const ticks: number[] = [];
  for (let e = loExp; e <= hiExp; e++) {
    for (const k of [1, 2, 5]) {
      const v = k * Math.pow(10, e);
      if (inRange(v)) ticks.push(v);
    }
  }
  return [...new Set(ticks)].sort((a, b) => a - b);
}

/** Compact tick label: plain decimal when short, exponent form otherwise. */
export function formatTick(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 0.001 && abs < 10000) {
    return String(parseFloat(v.toPrecision(4)));
  }
  const exp = Math.floor(Math.log10(abs));
  const mant = parseFloat((v / Math.pow(10, exp)).toPrecision(3));
  return mant === 1 ? `1e${exp}` : `${mant}e${exp}`;
}

// ── SVG element helpers ─────────────────────────────────────────────────────

/** Build an SVG polyline `points` string from parallel x/y arrays. */
export function polylinePoints(
  xs: number[], ys: number[],
  sx: (v: number) => number, sy: (v: number) => number,
): string {
  return xs.map((x, i) => `${r(sx(x))},${r(sy(ys[i] ?? NaN))}`).join(" ");
}

/** Horizontal grid lines at the given y-tick values. */
export function renderGridLines(
  yTicks: number[], sy: (v: number) => number,
  leftX: number, rightX: number,
): string[] {
  return yTicks.map((v) =>
    `<line x1="${leftX}" y1="${r(sy(v))}" x2="${rightX}" y2="${r(sy(v))}" stroke="#e5e7eb" stroke-width="1"/>`,
  );
}

/** Y-axis tick marks and labels. */
export function renderYAxis(
  yTicks: number[], sy: (v: number) => number, leftX: number,
): string[] {
  return yTicks.flatMap((v) => {
    const yy = r(sy(v));
    return [
      `<line x1="${leftX - 5}" y1="${yy}" x2="${leftX}" y2="${yy}" stroke="#333" stroke-width="1.5"/>`,
      `<text x="${leftX - 8}" y="${yy}" text-anchor="end" dominant-baseline="middle" fill="#333" font-size="11">${formatTick(v)}</text>`,
    ];
  });
}

/** X-axis tick marks and labels. */
export function renderXAxis(
  xTicks: number[], sx: (v: number) => number, bottomY: number,
): string[] {
  return xTicks.flatMap((v) => {
    const xx = r(sx(v));
    return [
      `<line x1="${xx}" y1="${bottomY}" x2="${xx}" y2="${bottomY + 5}" stroke="#333" stroke-width="1.5"/>`,
      `<text x="${xx}" y="${bottomY + 18}" text-anchor="middle" fill="#333" font-size="11">${formatTick(v)}</text>`,
    ];
  });
}

/** Left and bottom plot-frame borders. */
export function renderAxesBorder(
  leftX: number, topY: number, rightX: number, bottomY: number,
): string[] {
  return [
    `<line x1="${leftX}" y1="${topY}" x2="${leftX}" y2="${bottomY}" stroke="#333" stroke-width="1.5"/>`,
    `<line x1="${leftX}" y1="${bottomY}" x2="${rightX}" y2="${bottomY}" stroke="#333" stroke-width="1.5"/>`,
  ];
}
