/**
 * plotSweep: CSV files in, one SVG line chart out.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { Metric, parseSweepCsv, SweepRow } from "./csv.js";
import { SweepFrame } from "./frame.js";
import { renderLineChart } from "./svg.js";

const METRIC_LABEL: Record<Metric, string> = {
  max_edge_load: "mean max edge load",
  hop_mean: "mean hops",
};

export interface PlotResult {
  outPath: string;
  warnings: string[];
  protocols: string[];
}

export function plotSweep(csvPaths: string[], metric: Metric, outPath: string): PlotResult {
  if (csvPaths.length === 0) throw new Error("no CSV files given");
  const rows: SweepRow[] = [];
  for (const path of csvPaths) {
    rows.push(...parseSweepCsv(readFileSync(path, "utf-8"), path));
  }
  const frame = new SweepFrame(rows);
  const series = frame.series(metric);
  if (series.every((s) => s.points.length === 0)) {
    throw new Error(`no aggregate rows with ${metric} found`);
  }
  const topology = rows[0] ? `${rows[0].topology} ${rows[0].nOrK}` : "";
  const svg = renderLineChart({
    title: `${METRIC_LABEL[metric]} vs failure fraction (${topology})`,
    xLabel: "failed edge fraction p",
    yLabel: METRIC_LABEL[metric],
    series,
  });
  writeFileSync(outPath, svg, "utf-8");
  return { outPath, warnings: frame.mismatches(metric), protocols: frame.protocols() };
}
