/** Dependency-free SVG chart: per-bin estimates with a shaded CI band. */

import type { BinSummary } from "./api";

export interface ChartOptions {
  width: number;
  height: number;
  margin: number;
}

const DEFAULTS: ChartOptions = { width: 640, height: 320, margin: 42 };

interface Point {
  bin: number;
  estimate: number;
  lo: number | null;
  hi: number | null;
}

function toPoints(bins: Record<string, BinSummary>): Point[] {
  return Object.entries(bins)
    .map(([b, s]) => ({
      bin: Number(b),
      estimate: s.estimate,
      lo: s.ci_low,
      hi: s.ci_high,
    }))
    .sort((a, c) => a.bin - c.bin);
}

/** Log scale when every plotted value is positive, linear otherwise. */
export function pickScale(points: Point[]): "log" | "linear" {
  const values = points.flatMap((p) => [
    p.estimate,
    ...(p.lo !== null ? [p.lo] : []),
    ...(p.hi !== null ? [p.hi] : []),
  ]);
  return values.length > 0 && values.every((v) => v > 0) ? "log" : "linear";
}

function fmt(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toPrecision(3);
}

/** Render the latest per-bin estimates as a standalone SVG string. */
export function renderChart(
  bins: Record<string, BinSummary>,
  options: Partial<ChartOptions> = {},
): string {
  const { width, height, margin } = { ...DEFAULTS, ...options };
  const points = toPoints(bins);
  if (points.length === 0) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}"><text x="${width / 2}" y="${height / 2}" text-anchor="middle">no estimates yet</text></svg>`;
  }
  const scale = pickScale(points);
  const tx = (v: number) => (scale === "log" ? Math.log10(v) : v);

  const ys = points.flatMap((p) => [
    tx(p.estimate),
    ...(p.lo !== null && (scale === "linear" || p.lo > 0) ? [tx(p.lo)] : []),
    ...(p.hi !== null ? [tx(p.hi)] : []),
  ]);
  let yMin = Math.min(...ys);
  let yMax = Math.max(...ys);
  if (yMax === yMin) {
    yMin -= 1;
    yMax += 1;
  }
  const xMin = points[0].bin;
  const xMax = points[points.length - 1].bin;
  const px = (b: number) =>
    xMax === xMin
      ? width / 2
      : margin + ((b - xMin) / (xMax - xMin)) * (width - 2 * margin);
  const py = (v: number) =>
    height - margin - ((tx(v) - yMin) / (yMax - yMin)) * (height - 2 * margin);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
  );
  // CI band over the contiguous run of bins that have intervals
  const banded = points.filter((p) => p.lo !== null && p.hi !== null);
  if (banded.length > 1) {
    const floor = scale === "log" ? Math.pow(10, yMin) : -Infinity;
    const upper = banded.map((p) => `${px(p.bin)},${py(p.hi as number)}`);
    const lower = banded
      .slice()
      .reverse()
      .map((p) => `${px(p.bin)},${py(Math.max(p.lo as number, floor))}`);
    parts.push(
      `<polygon class="ci-band" points="${[...upper, ...lower].join(" ")}" fill="#9ecae9" opacity="0.5"/>`,
    );
  }
  const line = points.map((p) => `${px(p.bin)},${py(p.estimate)}`).join(" ");
  parts.push(
    `<polyline class="estimate-line" points="${line}" fill="none" stroke="#1f77b4" stroke-width="2"/>`,
  );
  for (const p of points) {
    parts.push(
      `<circle cx="${px(p.bin)}" cy="${py(p.estimate)}" r="3" fill="#1f77b4"><title>bin ${p.bin}: ${fmt(p.estimate)}</title></circle>`,
    );
  }
  // axes
  parts.push(
    `<line x1="${margin}" y1="${height - margin}" x2="${width - margin}" y2="${height - margin}" stroke="#444"/>`,
    `<line x1="${margin}" y1="${margin}" x2="${margin}" y2="${height - margin}" stroke="#444"/>`,
    `<text x="${width / 2}" y="${height - 8}" text-anchor="middle" font-size="12">separation bin</text>`,
    `<text x="12" y="${height / 2}" font-size="12" transform="rotate(-90 12 ${height / 2})" text-anchor="middle">estimated true-edge count${scale === "log" ? " (log)" : ""}</text>`,
  );
  for (const p of points) {
    parts.push(
      `<text x="${px(p.bin)}" y="${height - margin + 16}" text-anchor="middle" font-size="10">${p.bin}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
