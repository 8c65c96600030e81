/**
 * SweepFrame: grouped view of parsed sweep rows.
 *
 * Plotting renders aggregate rows verbatim. When the detail rows' mean
 * disagrees with the stored aggregate the frame reports the mismatch as a
 * warning; it never recomputes or repairs the value. Interval-protocol
 * lines are truncated at the last p whose detail rows saw zero
 * interval-disconnection events, mirroring how such runs are reported.
 */

import { Metric, SweepRow, metricValue } from "./csv.js";

export interface SeriesPoint {
  p: number;
  value: number;
}

export interface ProtocolSeries {
  protocol: string;
  points: SeriesPoint[];
}

const REL_TOLERANCE = 1e-9;

export class SweepFrame {
  readonly details: SweepRow[];
  readonly aggregates: SweepRow[];

  constructor(rows: SweepRow[]) {
    this.details = rows.filter((r) => r.repetition !== "mean");
    this.aggregates = rows.filter((r) => r.repetition === "mean");
  }

  protocols(): string[] {
    return [...new Set(this.aggregates.map((r) => r.protocol))].sort();
  }

  /** Largest p whose detail rows are free of interval disconnections. */
  intervalCutoff(protocol: string): number | null {
    const byP = new Map<number, number>();
    for (const row of this.details) {
      if (row.protocol !== protocol) continue;
      const seen = byP.get(row.p) ?? 0;
      byP.set(row.p, seen + (row.intervalDisconnected ?? 0));
    }
    let cutoff: number | null = null;
    for (const [p, disconnects] of byP) {
      if (disconnects === 0 && (cutoff === null || p > cutoff)) cutoff = p;
    }
    return cutoff;
  }

  series(metric: Metric): ProtocolSeries[] {
    const out: ProtocolSeries[] = [];
    for (const protocol of this.protocols()) {
      const isInterval = protocol.startsWith("interval");
      const cutoff = isInterval ? this.intervalCutoff(protocol) : null;
      const points: SeriesPoint[] = [];
      for (const row of this.aggregates) {
        if (row.protocol !== protocol) continue;
        if (isInterval && (cutoff === null || row.p > cutoff)) continue;
        const value = metricValue(row, metric);
        if (value === null) continue;
        points.push({ p: row.p, value });
      }
      points.sort((a, b) => a.p - b.p);
      out.push({ protocol, points });
    }
    return out;
  }

  /** Aggregate rows whose value differs from the detail mean (reported, never fixed). */
  mismatches(metric: Metric): string[] {
    const warnings: string[] = [];
    for (const agg of this.aggregates) {
      const values = this.details
        .filter((r) => r.protocol === agg.protocol && r.p === agg.p)
        .map((r) => metricValue(r, metric))
        .filter((v): v is number => v !== null);
      const stored = metricValue(agg, metric);
      if (values.length === 0 || stored === null) continue;
      const mean = values.reduce((a, b) => a + b, 0) / values.length;
      const scale = Math.max(Math.abs(mean), Math.abs(stored), 1);
      if (Math.abs(mean - stored) > REL_TOLERANCE * scale) {
        warnings.push(
          `${agg.protocol} p=${agg.p}: aggregate ${metric} ${stored} != detail mean ${mean}`,
        );
      }
    }
    return warnings;
  }
}
