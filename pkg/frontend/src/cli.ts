#!/usr/bin/env node
/**
 * Standalone figure renderer for aloharelay sweep CSVs.
 *
 *   aloharelay-figure --input sweep.csv --panel delay --log-y --out delay.svg
 *
 * Flags: --input <csv>  --panel {success,delay,utility}  --out <svg>
 *        [--log-y]  [--x-axis <variable>]
 *
 * Exit codes: 0 rendered, 1 usage error, 2 input could not be read,
 * parsed, or rendered.
 */

import { parseArgs } from "node:util";
import { fileURLToPath } from "node:url";

import { CsvFormatError, PANELS, render } from "./figure.js";
import type { Panel } from "./figure.js";

export const EXIT_OK = 0;
export const EXIT_USAGE = 1;
export const EXIT_INPUT = 2;

const USAGE =
  "usage: aloharelay-figure --input <sweep.csv> --panel <success|delay|utility> " +
  "--out <figure.svg> [--log-y] [--x-axis <variable>]";

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        input: { type: "string" },
        panel: { type: "string" },
        out: { type: "string" },
        "log-y": { type: "boolean", default: false },
        "x-axis": { type: "string" },
        help: { type: "boolean", default: false },
      },
      allowPositionals: false,
    });
  } catch (err) {
    process.stderr.write(`usage error: ${(err as Error).message}\n${USAGE}\n`);
    return EXIT_USAGE;
  }
  const { values } = parsed;
  if (values.help) {
    process.stdout.write(`${USAGE}\n`);
    return EXIT_OK;
  }
  for (const flag of ["input", "panel", "out"] as const) {
    if (values[flag] === undefined) {
      process.stderr.write(`usage error: --${flag} is required\n${USAGE}\n`);
      return EXIT_USAGE;
    }
  }
  if (!(PANELS as readonly string[]).includes(values.panel!)) {
    process.stderr.write(
      `usage error: --panel must be one of ${PANELS.join(", ")}, got ${JSON.stringify(values.panel)}\n`,
    );
    return EXIT_USAGE;
  }

  try {
    render({
      inputCsv: values.input!,
      panel: values.panel as Panel,
      outputPath: values.out!,
      logY: values["log-y"],
      xAxis: values["x-axis"],
    });
  } catch (err) {
    const kind = err instanceof CsvFormatError ? "parse error" : "input error";
    process.stderr.write(`${kind}: ${(err as Error).message}\n`);
    return EXIT_INPUT;
  }
  process.stdout.write(`wrote ${values.out}\n`);
  return EXIT_OK;
}

if (process.argv[1] && fileURLToPath(import.meta.url) === process.argv[1]) {
  process.exit(main(process.argv.slice(2)));
}
