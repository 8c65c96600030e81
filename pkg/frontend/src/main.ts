/**
 * CLI: render sweep CSVs into an output directory.
 *
 *   node dist/src/main.js --out-dir figures results/*.csv
 *   node dist/src/main.js --metric hop_mean --out-dir figures a.csv b.csv
 *
 * Without --metric both charts are produced. Local files only.
 */

import { mkdirSync } from "node:fs";
import { join } from "node:path";

import { Metric } from "./csv.js";
import { plotSweep } from "./plot.js";

function usage(): never {
  console.error("usage: plot [--metric max_edge_load|hop_mean] --out-dir DIR csv [csv ...]");
  process.exit(2);
}

export function main(argv: string[]): number {
  let outDir: string | null = null;
  let metrics: Metric[] = ["max_edge_load", "hop_mean"];
  const csvPaths: string[] = [];
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i]!;
    if (arg === "--out-dir") {
      outDir = argv[++i] ?? usage();
    } else if (arg === "--metric") {
      const m = argv[++i];
      if (m !== "max_edge_load" && m !== "hop_mean") usage();
      metrics = [m];
    } else if (arg.startsWith("--")) {
      usage();
    } else {
      csvPaths.push(arg);
    }
  }
  if (outDir === null || csvPaths.length === 0) usage();
  mkdirSync(outDir, { recursive: true });
  for (const metric of metrics) {
    const result = plotSweep(csvPaths, metric, join(outDir, `${metric}.svg`));
    for (const warning of result.warnings) {
      console.error(`warning: ${warning}`);
    }
    console.log(`wrote ${result.outPath} (${result.protocols.length} protocols)`);
  }
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("main.js")) {
  process.exit(main(process.argv.slice(2)));
}
