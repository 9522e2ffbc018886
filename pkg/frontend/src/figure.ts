/**
 * Figure panels for aloharelay sweep output.
 *
 * One panel = one metric (success probability, mean local delay, or
 * utility) against the swept variable, with one curve per interference
 * mode: the correlated case (ic) is drawn dotted, the uncorrelated case
 * (iu) solid.  Rendering is a pure function of the parsed CSV and the
 * style constants below, so identical inputs give byte-identical SVG.
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import { CsvFormatError, parseSweepCsv } from "./csv.js";
import type { SweepRow, SweepTable } from "./csv.js";
import {
  decadeTicks,
  makeLinearScale,
  makeLog10Scale,
  niceLinearTicks,
  polylinePoints,
  renderAxesBorder,
  renderGridLines,
  renderXAxis,
  renderYAxis,
} from "./svg.js";

// ── Spec ────────────────────────────────────────────────────────────────────

export type Panel = "success" | "delay" | "utility";

export const PANELS: readonly Panel[] = ["success", "delay", "utility"];

export interface FigureSpec {
  /** Path of a CSV produced by `aloharelay sweep --format csv`. */
  inputCsv: string;
  panel: Panel;
  /** Where the SVG is written; parent directories are created. */
  outputPath: string;
  /** Log-scale the y axis (meant for delay panels, which diverge). */
  logY?: boolean;
  /**
   * Optional expectation for the swept variable (`p`, `density`, …).
   * When given, it must match the `variable` echoed in the CSV header.
   */
  xAxis?: string;
}

// ── Style (bump the version when any of this changes) ───────────────────────

export const STYLE_VERSION = 1;

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { left: 70, right: 24, top: 44, bottom: 52 } as const;
const CURVE_COLOR = "#1f2937";
const IC_DASH = "2 5"; // dotted, per the correlated-case convention
const FONT = "Helvetica, Arial, sans-serif";

interface PanelStyle {
  column: keyof Pick<SweepRow, "successProb" | "meanLocalDelay" | "utility">;
  yLabel: string;
  titleNoun: string;
}

const PANEL_STYLE: Record<Panel, PanelStyle> = {
  success: {
    column: "successProb",
    yLabel: "end-to-end success probability",
    titleNoun: "Success probability",
  },
  delay: {
    column: "meanLocalDelay",
    yLabel: "mean local delay (slots)",
    titleNoun: "Mean local delay",
  },
  utility: {
    column: "utility",
    yLabel: "utility p·P/D (slots⁻¹)",
    titleNoun: "Utility",
  },
};

const X_LABEL: Record<string, string> = {
  density: "interferer density λ (nodes per unit area)",
  p: "transmit probability p",
  theta: "SINR threshold θ (linear)",
  "relay-x": "relay x-coordinate (distance units)",
};

// ── Rendering ───────────────────────────────────────────────────────────────

interface Series {
  xs: number[];
  ys: number[];
  excluded: number;
}

function seriesFor(rows: SweepRow[], mode: "ic" | "iu", column: PanelStyle["column"]): Series {
  const usable = rows
    .filter((row) => row.mode === mode && row.status === "ok")
    .sort((a, b) => a.variableValue - b.variableValue);
  const finite = usable.filter((row) => Number.isFinite(row[column]));
  return {
    xs: finite.map((row) => row.variableValue),
    ys: finite.map((row) => row[column]),
    excluded: usable.length - finite.length,
  };
}

/**
 * Render one panel from a parsed sweep table.  Pure: no I/O.
 *
 * Throws {@link CsvFormatError} when a mode has no plottable rows, since a
 * panel without both curves cannot show the correlated/uncorrelated contrast.
 */
export function renderPanel(table: SweepTable, panel: Panel, logY = false): string {
  const style = PANEL_STYLE[panel];
  const ic = seriesFor(table.rows, "ic", style.column);
  const iu = seriesFor(table.rows, "iu", style.column);
  for (const [mode, series] of [["ic", ic], ["iu", iu]] as const) {
    if (series.xs.length === 0) {
      throw new CsvFormatError(`no plottable rows for mode ${mode}`);
    }
  }

  const variable = table.config.get("variable") ?? "variable_value";
  const xLabel = X_LABEL[variable] ?? variable;
  const xs = [...ic.xs, ...iu.xs];
  const ys = [...ic.ys, ...iu.ys];
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  let yMin = Math.min(...ys);
  let yMax = Math.max(...ys);
  if (logY && yMin <= 0) {
    throw new CsvFormatError("log y-axis requires strictly positive values");
  }
  if (logY) {
    const pad = Math.pow(yMax / yMin, 0.05);
    yMin /= pad;
    yMax *= pad;
  } else {
    const pad = (yMax - yMin || Math.abs(yMax) || 1) * 0.05;
    yMin -= pad;
    yMax += pad;
  }

  const left = MARGIN.left;
  const right = WIDTH - MARGIN.right;
  const top = MARGIN.top;
  const bottom = HEIGHT - MARGIN.bottom;
  const sx = makeLinearScale(xMin, xMax, left, right);
  const sy = logY
    ? makeLog10Scale(yMin, yMax, bottom, top)
    : makeLinearScale(yMin, yMax, bottom, top);
  const yTicks = logY ? decadeTicks(yMin, yMax) : niceLinearTicks(yMin, yMax);
  const xTicks = niceLinearTicks(xMin, xMax, 6);

  const excluded = ic.excluded + iu.excluded;
  const title = `${style.titleNoun} vs ${xLabel.split(" (")[0]}`;
  const legendX = right - 170;
  const legendY = top + 10;

  const lines: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="${FONT}">`,
    `<!-- aloharelay-figures style v${STYLE_VERSION} -->`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
    `<text x="${WIDTH / 2}" y="${top - 18}" text-anchor="middle" fill="#111" font-size="15">${title}</text>`,
    ...renderGridLines(yTicks, sy, left, right),
    ...renderAxesBorder(left, top, right, bottom),
    ...renderYAxis(yTicks, sy, left),
    ...renderXAxis(xTicks, sx, bottom),
    `<text x="${(left + right) / 2}" y="${HEIGHT - 12}" text-anchor="middle" fill="#111" font-size="12">${xLabel}</text>`,
    `<text x="18" y="${(top + bottom) / 2}" text-anchor="middle" fill="#111" font-size="12" transform="rotate(-90 18 ${(top + bottom) / 2})">${style.yLabel}</text>`,
    `<polyline points="${polylinePoints(ic.xs, ic.ys, sx, sy)}" fill="none" stroke="${CURVE_COLOR}" stroke-width="2" stroke-dasharray="${IC_DASH}" stroke-linecap="round"/>`,
    `<polyline points="${polylinePoints(iu.xs, iu.ys, sx, sy)}" fill="none" stroke="${CURVE_COLOR}" stroke-width="2"/>`,
    `<line x1="${legendX}" y1="${legendY}" x2="${legendX + 34}" y2="${legendY}" stroke="${CURVE_COLOR}" stroke-width="2" stroke-dasharray="${IC_DASH}" stroke-linecap="round"/>`,
    `<text x="${legendX + 42}" y="${legendY}" dominant-baseline="middle" fill="#111" font-size="12">IC (correlated)</text>`,
    `<line x1="${legendX}" y1="${legendY + 18}" x2="${legendX + 34}" y2="${legendY + 18}" stroke="${CURVE_COLOR}" stroke-width="2"/>`,
    `<text x="${legendX + 42}" y="${legendY + 18}" dominant-baseline="middle" fill="#111" font-size="12">IU (uncorrelated)</text>`,
  ];
  if (excluded > 0) {
    lines.push(
      `<text x="${right}" y="${bottom - 8}" text-anchor="end" fill="#6b7280" font-size="10">${excluded} non-finite point${excluded === 1 ? "" : "s"} not drawn</text>`,
    );
  }
  lines.push(`</svg>`);
  return lines.join("\n");
}

/**
 * Render a spec end to end: read, parse, draw, write.
 *
 * Any parse or invariant failure throws before the output path is touched,
 * so a bad CSV never leaves a file behind.  Returns the SVG text.
 */
export function render(spec: FigureSpec): string {
  const text = readFileSync(spec.inputCsv, "utf8");
  const table = parseSweepCsv(text);
  const variable = table.config.get("variable");
  if (spec.xAxis !== undefined && variable !== undefined && spec.xAxis !== variable) {
    throw new CsvFormatError(
      `x-axis mismatch: spec expects ${spec.xAxis}, CSV sweeps ${variable}`,
    );
  }
  const svg = renderPanel(table, spec.panel, spec.logY ?? false);
  mkdirSync(dirname(spec.outputPath), { recursive: true });
  writeFileSync(spec.outputPath, svg, "utf8");
  return svg;
}

// Re-exported so CLI and tests treat this module as the package surface.
export { CsvFormatError, parseSweepCsv } from "./csv.js";
export type { SweepRow, SweepTable } from "./csv.js";
