#!/usr/bin/env node
/** plots <kind> --in a.csv [b.csv ...] --out figure.svg [--omega 6.1261] */

import { readFileSync, writeFileSync } from "node:fs";
import { parseCsv } from "./csv.js";
import { FIGURE_KINDS, FigureKind, render } from "./figures.js";

export interface Args {
  kind: FigureKind;
  inputs: string[];
  out: string;
  omega: number;
}

export function parseArgs(argv: string[]): Args {
  const [kind, ...rest] = argv;
  if (!FIGURE_KINDS.includes(kind as FigureKind)) {
    throw new Error(`unknown figure kind ${kind ?? "<missing>"}; ` +
      `expected one of ${FIGURE_KINDS.join(", ")}`);
  }
  const inputs: string[] = [];
  let out: string | null = null;
  let omega = 1.95 * Math.PI;
  for (let i = 0; i < rest.length; i++) {
    const a = rest[i];
    if (a === "--in") {
      while (i + 1 < rest.length && !rest[i + 1].startsWith("--")) inputs.push(rest[++i]);
    } else if (a === "--out") {
      out = rest[++i];
    } else if (a === "--omega") {
      omega = Number(rest[++i]);
      if (!Number.isFinite(omega) || omega <= 0) throw new Error("bad --omega value");
    } else {
      throw new Error(`unknown argument ${a}`);
    }
  }
  if (inputs.length === 0) throw new Error("no input CSVs (--in)");
  if (!out) throw new Error("no output path (--out)");
  return { kind: kind as FigureKind, inputs, out, omega };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }
  try {
    const tables = args.inputs.map((p) => parseCsv(readFileSync(p, "utf8"), p));
    const svg = render(args.kind, tables, args.omega);
    writeFileSync(args.out, svg);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
  console.log(args.out);
  return 0;
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("plots")) {
  process.exit(main(process.argv.slice(2)));
}
