import assert from "node:assert/strict";
import { test } from "node:test";

import { parseSweepCsv, metricValue } from "../src/csv.js";
import { sweepCsv, gridRows } from "./helpers.js";

test("parses detail and aggregate rows", () => {
  const text = sweepCsv(gridRows("threep-id", (p) => 20 + 10 * p));
  const rows = parseSweepCsv(text);
  assert.equal(rows.length, 33);
  const means = rows.filter((r) => r.repetition === "mean");
  assert.equal(means.length, 11);
  assert.equal(means[0]!.protocol, "threep-id");
  assert.equal(metricValue(means[0]!, "max_edge_load"), 20);
  assert.equal(metricValue(means[0]!, "hop_mean"), 4);
});

test("empty hop_mean becomes null", () => {
  const text = sweepCsv([
    { protocol: "square1", p: 0.2, repetition: "mean", maxEdgeLoad: 9, hopMean: "" },
  ]);
  const rows = parseSweepCsv(text);
  assert.equal(rows[0]!.hopMean, null);
});

test("rejects empty input", () => {
  assert.throws(() => parseSweepCsv("", "x.csv"), /empty CSV/);
});

test("rejects header-only input", () => {
  const headerOnly = sweepCsv([]);
  assert.throws(() => parseSweepCsv(headerOnly, "x.csv"), /no rows/);
});

test("rejects unknown header", () => {
  assert.throws(() => parseSweepCsv("a,b,c\n1,2,3\n"), /unexpected header/);
});

test("rejects ragged rows", () => {
  const text = sweepCsv(gridRows("a-det", () => 5)).replace(/,0,\n/, ",0\n");
  assert.throws(() => parseSweepCsv(text.split("\n")[0] + "\n1,2,3\n"), /fields/);
});
