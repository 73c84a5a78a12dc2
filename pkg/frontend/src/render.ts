/**
 * BER/FER waterfall rendering: one SVG figure, log-scale error rate vs
 * channel SNR, one curve per group of (decoder, i_max, mismatch_db) keys.
 *
 * Zero-error points cannot sit on a log axis; they are drawn as open
 * downward triangles pinned to the plot floor so they are visibly
 * "at or below" the last decade rather than silently dropped.
 */

import { SweepRow } from "./csv";

export type Metric = "ber" | "fer";
export type GroupKey = "decoder" | "i_max" | "mismatch_db";

export interface CurveSpec {
  metric: Metric;
  groupBy: GroupKey[];
  title?: string;
  xLabel?: string;
  yLabel?: string;
}

export interface Curve {
  label: string;
  points: { snr: number; value: number }[]; // value 0 = floor marker
}

export interface RenderResult {
  svg: string;
  curves: Curve[];
  warnings: string[];
}

const WIDTH = 760;
const HEIGHT = 520;
const MARGIN = { top: 48, right: 32, bottom: 56, left: 76 };
const PLOT_W = WIDTH - MARGIN.left - MARGIN.right;
const PLOT_H = HEIGHT - MARGIN.top - MARGIN.bottom;

const PALETTE = [
  "#1f6fb4",
  "#d1495b",
  "#3a7d44",
  "#8e5ba6",
  "#c77f1e",
  "#2a9d8f",
  "#6b4226",
  "#444444",
];

const MARKERS = ["circle", "square", "diamond", "cross"] as const;

function fmt(v: number): string {
  return Number.isInteger(v) ? v.toString() : v.toPrecision(6).replace(/\.?0+$/, "");
}

/** Group rows into curves ordered deterministically by their group label. */
export function groupRows(
  rows: SweepRow[],
  spec: CurveSpec
): { curves: Curve[]; warnings: string[] } {
  const warnings: string[] = [];
  const groups = new Map<string, SweepRow[]>();
  for (const row of rows) {
    const label = spec.groupBy
      .map((k) => `${k}=${k === "decoder" ? row.decoder : k === "i_max" ? row.i_max : fmt(row.mismatch_db)}`)
      .join(" ");
    if (!groups.has(label)) groups.set(label, []);
    groups.get(label)!.push(row);
  }

  const curves: Curve[] = [];
  for (const label of [...groups.keys()].sort()) {
    const members = groups.get(label)!;
    const points = members
      .filter((r) => {
        const ok = r.frames > 0 && Number.isFinite(r[spec.metric]);
        if (!ok) warnings.push(`skipping unusable row in group "${label}" (frames=${r.frames})`);
        return ok;
      })
      .map((r) => ({ snr: r.snr_db, value: r[spec.metric] }))
      .sort((a, b) => a.snr - b.snr);
    if (points.length === 0) {
      warnings.push(`group "${label}" has no plottable points; skipped`);
      continue;
    }
    curves.push({ label, points });
  }
  return { curves, warnings };
}

function marker(kind: (typeof MARKERS)[number], x: number, y: number, color: string): string {
  switch (kind) {
    case "circle":
      return `<circle cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="4" fill="${color}"/>`;
    case "square":
      return `<rect x="${(x - 3.5).toFixed(1)}" y="${(y - 3.5).toFixed(1)}" width="7" height="7" fill="${color}"/>`;
    case "diamond":
      return `<path d="M ${x.toFixed(1)} ${(y - 5).toFixed(1)} L ${(x + 5).toFixed(1)} ${y.toFixed(1)} L ${x.toFixed(1)} ${(y + 5).toFixed(1)} L ${(x - 5).toFixed(1)} ${y.toFixed(1)} Z" fill="${color}"/>`;
    case "cross":
      return (
        `<path d="M ${(x - 4).toFixed(1)} ${(y - 4).toFixed(1)} L ${(x + 4).toFixed(1)} ${(y + 4).toFixed(1)} ` +
        `M ${(x - 4).toFixed(1)} ${(y + 4).toFixed(1)} L ${(x + 4).toFixed(1)} ${(y - 4).toFixed(1)}" ` +
        `stroke="${color}" stroke-width="2" fill="none"/>`
      );
  }
}

function floorMarker(x: number, y: number, color: string): string {
  // open downward triangle: "at or below the floor"
  return (
    `<path d="M ${(x - 5).toFixed(1)} ${(y - 5).toFixed(1)} L ${(x + 5).toFixed(1)} ${(y - 5).toFixed(1)} ` +
    `L ${x.toFixed(1)} ${(y + 3).toFixed(1)} Z" fill="none" stroke="${color}" stroke-width="1.5"/>`
  );
}

/** Render curves to a standalone SVG document. */
export function renderSvg(rows: SweepRow[], spec: CurveSpec): RenderResult {
  const { curves, warnings } = groupRows(rows, spec);
  if (curves.length === 0) {
    throw new Error("no plottable curves after grouping");
  }

  const snrs = curves.flatMap((c) => c.points.map((p) => p.snr));
  let xMin = Math.min(...snrs);
  let xMax = Math.max(...snrs);
  if (xMin === xMax) {
    xMin -= 0.5;
    xMax += 0.5;
  }

  const positives = curves.flatMap((c) =>
    c.points.map((p) => p.value).filter((v) => v > 0)
  );
  const yMaxVal = positives.length ? Math.max(...positives) : 1e-1;
  const yMinVal = positives.length ? Math.min(...positives) : 1e-3;
  const topDecade = Math.ceil(Math.log10(yMaxVal));
  // keep one spare decade at the bottom as the zero-point floor
  const bottomDecade = Math.floor(Math.log10(Math.max(yMinVal, 1e-300))) - 1;

  const x = (snr: number) =>
    MARGIN.left + ((snr - xMin) / (xMax - xMin)) * PLOT_W;
  const y = (value: number) => {
    const d = Math.log10(value);
    return MARGIN.top + ((topDecade - d) / (topDecade - bottomDecade)) * PLOT_H;
  };
  const floorY = MARGIN.top + PLOT_H;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">` +
      `${spec.title ?? `${spec.metric.toUpperCase()} vs SNR`}</text>`
  );

  // y grid: one line per decade
  for (let d = topDecade; d >= bottomDecade; d--) {
    const yy = y(Math.pow(10, d));
    parts.push(
      `<line x1="${MARGIN.left}" y1="${yy.toFixed(1)}" x2="${MARGIN.left + PLOT_W}" ` +
        `y2="${yy.toFixed(1)}" stroke="#dddddd" stroke-width="1"/>`
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${(yy + 4).toFixed(1)}" text-anchor="end" ` +
        `font-size="11">1e${d}</text>`
    );
  }
  // x ticks on the data grid
  const ticks = [...new Set(snrs)].sort((a, b) => a - b);
  const shown = ticks.length <= 12 ? ticks : ticks.filter((_, i) => i % Math.ceil(ticks.length / 12) === 0);
  for (const t of shown) {
    const xx = x(t);
    parts.push(
      `<line x1="${xx.toFixed(1)}" y1="${floorY}" x2="${xx.toFixed(1)}" ` +
        `y2="${floorY + 5}" stroke="#333333"/>`
    );
    parts.push(
      `<text x="${xx.toFixed(1)}" y="${floorY + 20}" text-anchor="middle" font-size="11">${fmt(t)}</text>`
    );
  }
  // axes
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${PLOT_W}" height="${PLOT_H}" ` +
      `fill="none" stroke="#333333"/>`
  );
  parts.push(
    `<text x="${MARGIN.left + PLOT_W / 2}" y="${HEIGHT - 12}" text-anchor="middle" ` +
      `font-size="13">${spec.xLabel ?? "SNR (dB)"}</text>`
  );
  parts.push(
    `<text x="20" y="${MARGIN.top + PLOT_H / 2}" text-anchor="middle" font-size="13" ` +
      `transform="rotate(-90 20 ${MARGIN.top + PLOT_H / 2})">` +
      `${spec.yLabel ?? spec.metric.toUpperCase()} (log scale)</text>`
  );

  curves.forEach((curve, ci) => {
    const color = PALETTE[ci % PALETTE.length];
    const mk = MARKERS[ci % MARKERS.length];
    const segments: string[] = [];
    let path = "";
    for (const p of curve.points) {
      if (p.value > 0) {
        const px = x(p.snr);
        const py = y(p.value);
        path += (path === "" ? "M" : " L") + ` ${px.toFixed(1)} ${py.toFixed(1)}`;
      } else {
        // zero breaks the line; the point itself becomes a floor marker
        if (path !== "") segments.push(path);
        path = "";
      }
    }
    if (path !== "") segments.push(path);
    for (const seg of segments) {
      parts.push(
        `<path d="${seg}" fill="none" stroke="${color}" stroke-width="1.8"/>`
      );
    }
    for (const p of curve.points) {
      parts.push(
        p.value > 0
          ? marker(mk, x(p.snr), y(p.value), color)
          : floorMarker(x(p.snr), floorY, color)
      );
    }
    // legend entry
    const ly = MARGIN.top + 14 + ci * 18;
    const lx = MARGIN.left + PLOT_W - 8;
    parts.push(
      `<line x1="${lx - 150}" y1="${ly}" x2="${lx - 120}" y2="${ly}" ` +
        `stroke="${color}" stroke-width="1.8"/>`
    );
    parts.push(marker(mk, lx - 135, ly, color));
    parts.push(
      `<text x="${lx - 112}" y="${ly + 4}" font-size="11">${curve.label}</text>`
    );
  });

  parts.push("</svg>");
  return { svg: parts.join("\n") + "\n", curves, warnings };
}
