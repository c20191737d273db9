#!/usr/bin/env node
import { readFileSync, writeFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { SchemaError, parseCsv } from "./csv.js";
import { FigureId, selectFigure } from "./figure.js";
import { renderFigure } from "./svg.js";

const USAGE = "usage: figures --csv <path> --figure <3|4|5> --out <path>";

export function run(argv: string[]): number {
  const opts = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i] as string;
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      console.error(USAGE);
      return 2;
    }
    opts.set(flag.slice(2), value);
  }
  const csvPath = opts.get("csv");
  const figureArg = opts.get("figure");
  const outPath = opts.get("out");
  const unknown = [...opts.keys()].filter((k) => !["csv", "figure", "out"].includes(k));
  if (!csvPath || !figureArg || !outPath || unknown.length > 0) {
    console.error(USAGE);
    return 2;
  }
  if (!["3", "4", "5"].includes(figureArg)) {
    console.error(`unknown figure ${JSON.stringify(figureArg)}\n${USAGE}`);
    return 2;
  }
  let text: string;
  try {
    text = readFileSync(csvPath, "utf8");
  } catch (e) {
    console.error(`cannot read ${csvPath}: ${(e as Error).message}`);
    return 2;
  }
  try {
    const data = selectFigure(parseCsv(text), Number(figureArg) as FigureId);
    writeFileSync(outPath, renderFigure(data));
  } catch (e) {
    if (e instanceof SchemaError) {
      console.error(`bad CSV: ${e.message}`);
      return 1;
    }
    throw e;
  }
  console.log(`wrote figure ${figureArg} to ${outPath}`);
  return 0;
}

if (process.argv[1] && fileURLToPath(import.meta.url) === process.argv[1]) {
  process.exit(run(process.argv.slice(2)));
}
