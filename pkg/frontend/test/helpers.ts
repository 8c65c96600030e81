import { SWEEP_COLUMNS } from "../src/csv.js";

export interface RowSpec {
  protocol: string;
  p: number;
  repetition: string | number;
  maxEdgeLoad: number | "";
  hopMean?: number | "";
  intervalDisconnected?: number;
}

/** Build schema-correct CSV text from terse row specs. */
export function sweepCsv(rows: RowSpec[]): string {
  const lines = [SWEEP_COLUMNS.join(",")];
  for (const r of rows) {
    lines.push(
      [
        r.protocol,
        "clos",
        "16",
        String(r.p),
        String(r.repetition),
        r.repetition === "mean" ? "" : "12345",
        String(r.maxEdgeLoad),
        "3",
        String(r.hopMean ?? 4),
        "6",
        "0",
        "0",
        String(r.intervalDisconnected ?? 0),
        "",
      ].join(","),
    );
  }
  return lines.join("\n") + "\n";
}

/** One protocol's detail + aggregate rows over an 11-point grid. */
export function gridRows(
  protocol: string,
  load: (p: number) => number,
  disconnectsAbove: number | null = null,
): RowSpec[] {
  const rows: RowSpec[] = [];
  for (let i = 0; i <= 10; i++) {
    const p = Number((i * 0.02).toFixed(2));
    const disconnected = disconnectsAbove !== null && p > disconnectsAbove ? 2 : 0;
    for (let rep = 0; rep < 2; rep++) {
      rows.push({
        protocol,
        p,
        repetition: rep,
        maxEdgeLoad: load(p),
        intervalDisconnected: disconnected,
      });
    }
    rows.push({ protocol, p, repetition: "mean", maxEdgeLoad: load(p) });
  }
  return rows;
}
