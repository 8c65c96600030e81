/**
 * Minimal deterministic SVG line charts.
 *
 * No timestamps, no randomness: the same series always render to the same
 * bytes. Numbers are emitted with fixed precision.
 */

import { ProtocolSeries } from "./frame.js";

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { top: 40, right: 170, bottom: 48, left: 64 };

const PALETTE = [
  "#1f77b4",
  "#ff7f0e",
  "#2ca02c",
  "#d62728",
  "#9467bd",
  "#8c564b",
  "#e377c2",
  "#7f7f7f",
  "#bcbd22",
  "#17becf",
];

function fmt(x: number): string {
  return x.toFixed(2);
}

function tickLabel(x: number): string {
  return Math.abs(x) >= 1000 ? x.toFixed(0) : String(Number(x.toPrecision(4)));
}

/** 5-ish "nice" tick values spanning [0 | min, max]. */
function niceTicks(min: number, max: number, count = 5): number[] {
  if (min === max) {
    max = min + 1;
  }
  const span = max - min;
  const step0 = span / (count - 1);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * mag).find((s) => span / s <= count - 1) ?? mag * 10;
  const start = Math.floor(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step / 2; v += step) ticks.push(Number(v.toFixed(10)));
  return ticks;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: ProtocolSeries[];
}

export function renderLineChart(spec: ChartSpec): string {
  const drawn = spec.series.filter((s) => s.points.length > 0);
  const xs = drawn.flatMap((s) => s.points.map((pt) => pt.p));
  const ys = drawn.flatMap((s) => s.points.map((pt) => pt.value));
  const xMin = Math.min(...xs, 0);
  const xMax = Math.max(...xs, xMin + 1e-9);
  const yMin = 0;
  const yMax = Math.max(...ys, 1e-9);
  const yTicks = niceTicks(yMin, yMax);
  const yTop = yTicks[yTicks.length - 1]!;

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number) => MARGIN.left + ((x - xMin) / (xMax - xMin)) * plotW;
  const sy = (y: number) => MARGIN.top + plotH - (y / yTop) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-size="15">${escapeXml(spec.title)}</text>`,
  );

  const xTicks = [...new Set(xs)].sort((a, b) => a - b);
  const shownX = xTicks.length > 12 ? xTicks.filter((_, i) => i % 2 === 0) : xTicks;
  for (const t of shownX) {
    const x = sx(t);
    parts.push(`<line x1="${fmt(x)}" y1="${MARGIN.top + plotH}" x2="${fmt(x)}" y2="${MARGIN.top + plotH + 5}" stroke="black"/>`);
    parts.push(
      `<text x="${fmt(x)}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" font-size="11">${tickLabel(t)}</text>`,
    );
  }
  for (const t of yTicks) {
    const y = sy(t);
    parts.push(`<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${MARGIN.left + plotW}" y2="${fmt(y)}" stroke="#dddddd"/>`);
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end" font-size="11">${tickLabel(t)}</text>`,
    );
  }
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top + plotH}" x2="${MARGIN.left + plotW}" y2="${MARGIN.top + plotH}" stroke="black"/>`,
  );
  parts.push(`<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${MARGIN.top + plotH}" stroke="black"/>`);
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 10}" text-anchor="middle" font-size="12">${escapeXml(spec.xLabel)}</text>`,
  );
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${escapeXml(spec.yLabel)}</text>`,
  );

  drawn.forEach((series, idx) => {
    const colour = PALETTE[idx % PALETTE.length]!;
    const pts = series.points.map((pt) => `${fmt(sx(pt.p))},${fmt(sy(pt.value))}`).join(" ");
    parts.push(`<polyline fill="none" stroke="${colour}" stroke-width="1.8" points="${pts}"/>`);
    for (const pt of series.points) {
      parts.push(`<circle cx="${fmt(sx(pt.p))}" cy="${fmt(sy(pt.value))}" r="2.4" fill="${colour}"/>`);
    }
    const ly = MARGIN.top + 14 * idx;
    const lx = WIDTH - MARGIN.right + 12;
    parts.push(`<line x1="${lx}" y1="${ly}" x2="${lx + 18}" y2="${ly}" stroke="${colour}" stroke-width="2"/>`);
    parts.push(`<text x="${lx + 24}" y="${ly + 4}" font-size="11">${escapeXml(series.protocol)}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
