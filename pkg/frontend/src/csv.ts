/**
 * Parser for the sweep CSV emitted by the aloharelay CLI.
 *
 * The producer writes a strict, quote-free format: `# key=value` config
 * comments, one header row, then one data row per (sweep point, mode).
 * Because no cell ever contains a comma or a quote, plain comma splitting
 * is exact; the work here is validating the contract and turning the
 * `infinite` delay marker into a proper Infinity.
 */

// ── Contract ────────────────────────────────────────────────────────────────

/** Column order produced by `aloharelay sweep --format csv`. */
export const SWEEP_COLUMNS = [
  "variable_value",
  "mode",
  "p_used",
  "success_prob",
  "mean_local_delay",
  "utility",
  "link_sr",
  "link_rd",
  "status",
] as const;

/** Marker the producer writes for a diverged (non-finite) mean delay. */
const INFINITE_MARKER = "infinite";

/** One sweep point for one interference mode. */
export interface SweepRow {
  variableValue: number;
  mode: "ic" | "iu";
  pUsed: number;
  successProb: number;
  /** Infinity when the CSV holds the `infinite` marker. */
  meanLocalDelay: number;
  utility: number;
  linkSr: number;
  linkRd: number;
  /** `ok`, or a failure tag such as `optimizer-failed` (metric cells empty). */
  status: string;
}

/** Parsed sweep file: config echo plus data rows in file order. */
export interface SweepTable {
  /** Key/value pairs recovered from the `# key=value` header comments. */
  config: Map<string, string>;
  rows: SweepRow[];
}

/** Raised for any violation of the sweep CSV contract. */
export class CsvFormatError extends Error {}

// ── Cell parsing ────────────────────────────────────────────────────────────

function numericCell(cell: string, column: string, line: number, status: string): number {
  if (cell === INFINITE_MARKER) return Infinity;
  if (cell === "") {
    // Failed sweep points legitimately carry empty metric cells.
    if (status !== "ok") return NaN;
    throw new CsvFormatError(`line ${line}: empty ${column} cell on an ok row`);
  }
  const value = Number(cell);
  if (Number.isNaN(value)) {
    throw new CsvFormatError(`line ${line}: cannot parse ${column} value ${JSON.stringify(cell)}`);
  }
  return value;
}

function modeCell(cell: string, line: number): "ic" | "iu" {
  if (cell === "ic" || cell === "iu") return cell;
  throw new CsvFormatError(`line ${line}: mode must be "ic" or "iu", got ${JSON.stringify(cell)}`);
}

// ── File parsing ────────────────────────────────────────────────────────────

/**
 * Parse the text of a sweep CSV.
 *
 * Throws {@link CsvFormatError} when required columns are missing (named in
 * the message), when a row has the wrong width, when a numeric cell fails to
 * parse, or when no data rows are present.
 */
export function parseSweepCsv(text: string): SweepTable {
  const lines = text.split(/\r?\n/);
  const config = new Map<string, string>();
  let header: string[] | null = null;
  let columnIndex: Map<string, number> | null = null;
  const rows: SweepRow[] = [];

  for (let i = 0; i < lines.length; i++) {
    const line = lines[i] ?? "";
    if (line === "") continue;
    if (line.startsWith("#")) {
      const body = line.replace(/^#\s*/, "");
      const eq = body.indexOf("=");
      if (eq > 0) config.set(body.slice(0, eq), body.slice(eq + 1));
      continue;
    }
    const cells = line.split(",");
    if (header === null) {
      header = cells;
      const present = new Set(header);
      const missing = SWEEP_COLUMNS.filter((c) => !present.has(c));
      if (missing.length > 0) {
        throw new CsvFormatError(`missing column(s): ${missing.join(", ")}`);
      }
      columnIndex = new Map(header.map((name, idx) => [name, idx]));
      continue;
    }
    if (cells.length !== header.length) {
      throw new CsvFormatError(
        `line ${i + 1}: expected ${header.length} cells, got ${cells.length}`,
      );
    }
    const at = (column: string): string => cells[columnIndex!.get(column)!] ?? "";
    const lineNo = i + 1;
    const status = at("status");
    rows.push({
      variableValue: numericCell(at("variable_value"), "variable_value", lineNo, status),
      mode: modeCell(at("mode"), lineNo),
      pUsed: numericCell(at("p_used"), "p_used", lineNo, status),
      successProb: numericCell(at("success_prob"), "success_prob", lineNo, status),
      meanLocalDelay: numericCell(at("mean_local_delay"), "mean_local_delay", lineNo, status),
      utility: numericCell(at("utility"), "utility", lineNo, status),
      linkSr: numericCell(at("link_sr"), "link_sr", lineNo, status),
      linkRd: numericCell(at("link_rd"), "link_rd", lineNo, status),
      status,
    });
  }

  if (header === null) throw new CsvFormatError("no header row");
  if (rows.length === 0) throw new CsvFormatError("no data rows");
  return { config, rows };
}
