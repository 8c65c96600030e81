/**
 * Sweep CSV parsing.
 *
 * The simulator writes one detail row per (p, repetition) and one aggregate
 * row per p marked by repetition == "mean". Columns are fixed; a file whose
 * header deviates from the schema is rejected outright.
 */

export const SWEEP_COLUMNS = [
  "protocol",
  "topology",
  "n_or_k",
  "p",
  "repetition",
  "seed",
  "max_edge_load",
  "max_node_load",
  "hop_mean",
  "hop_max",
  "undelivered",
  "loop_events",
  "interval_disconnected",
  "budget_ok",
] as const;

export type Metric = "max_edge_load" | "hop_mean";

export interface SweepRow {
  protocol: string;
  topology: string;
  nOrK: number;
  p: number;
  repetition: string;
  maxEdgeLoad: number | null;
  maxNodeLoad: number | null;
  hopMean: number | null;
  hopMax: number | null;
  undelivered: number | null;
  loopEvents: number | null;
  intervalDisconnected: number | null;
  budgetOk: string;
}

function num(field: string | undefined): number | null {
  if (field === undefined || field === "") return null;
  const value = Number(field);
  if (!Number.isFinite(value)) throw new Error(`not a number: ${field!}`);
  return value;
}

export function parseSweepCsv(text: string, source = "<csv>"): SweepRow[] {
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  if (lines.length === 0) throw new Error(`${source}: empty CSV`);
  const header = lines[0]!.split(",");
  if (header.join(",") !== SWEEP_COLUMNS.join(",")) {
    throw new Error(`${source}: unexpected header ${lines[0]!}`);
  }
  const rows: SweepRow[] = [];
  for (const line of lines.slice(1)) {
    const f = line.split(",");
    if (f.length !== SWEEP_COLUMNS.length) {
      throw new Error(`${source}: row has ${f.length} fields: ${line}`);
    }
    rows.push({
      protocol: f[0]!,
      topology: f[1]!,
      nOrK: num(f[2]) ?? 0,
      p: num(f[3]) ?? 0,
      repetition: f[4]!,
      maxEdgeLoad: num(f[6]),
      maxNodeLoad: num(f[7]),
      hopMean: num(f[8]),
      hopMax: num(f[9]),
      undelivered: num(f[10]),
      loopEvents: num(f[11]),
      intervalDisconnected: num(f[12]),
      budgetOk: f[13]!,
    });
  }
  if (rows.length === 0) throw new Error(`${source}: CSV has a header but no rows`);
  return rows;
}

export function metricValue(row: SweepRow, metric: Metric): number | null {
  return metric === "max_edge_load" ? row.maxEdgeLoad : row.hopMean;
}
