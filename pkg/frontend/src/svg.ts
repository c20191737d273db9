import { FigureData, Series } from "./figure.js";

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { left: 64, right: 180, top: 44, bottom: 52 };

const PALETTE = [
  "#2563ae", "#d0541d", "#2c8a46", "#8a2ca0", "#b48a1f", "#3a3a3a", "#1fa0a8",
];

function fmt(v: number): string {
  // fixed-precision coordinates keep the output byte-stable
  return v.toFixed(2);
}

function tickLabel(v: number): string {
  const s = v.toPrecision(6);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

/** Round tick steps at 1-2-5 times a power of ten, spanning [lo, hi]. */
export function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const span = hi - lo;
  const raw = span / Math.max(1, count);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const ratio = raw / mag;
  const step = (ratio < 1.5 ? 1 : ratio < 3 ? 2 : ratio < 7 ? 5 : 10) * mag;
  const out: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step / 1e6; v += step) {
    out.push(Math.abs(v) < step / 1e6 ? 0 : v);
  }
  return out;
}

function extent(series: Series[], pick: (p: { x: number; y: number }) => number): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of series) {
    for (const p of s.points) {
      const v = pick(p);
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  return [lo, hi];
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

/** Deterministic standalone SVG; every plotted point carries its CSV cell
 * text in data-x / data-y so plotted values can be audited against rows. */
export function renderFigure(data: FigureData): string {
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const [xLo, xHi] = extent(data.series, (p) => p.x);
  const [, yMax] = extent(data.series, (p) => p.y);
  const yLo = 0; // delivery times are non-negative; anchor the axis
  const yHi = yMax <= yLo ? yLo + 1 : yMax * 1.05;
  const xSpan = xHi > xLo ? xHi - xLo : 1;

  const X = (v: number) => MARGIN.left + ((v - xLo) / xSpan) * plotW;
  const Y = (v: number) => MARGIN.top + plotH - ((v - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${fmt(MARGIN.left + plotW / 2)}" y="24" text-anchor="middle" font-size="15">${esc(data.title)}</text>`,
  );

  for (const v of niceTicks(xLo, xHi)) {
    const x = fmt(X(v));
    parts.push(
      `<line x1="${x}" y1="${fmt(MARGIN.top)}" x2="${x}" y2="${fmt(MARGIN.top + plotH)}" stroke="#ddd"/>`,
      `<text x="${x}" y="${fmt(MARGIN.top + plotH + 18)}" text-anchor="middle" font-size="11">${tickLabel(v)}</text>`,
    );
  }
  for (const v of niceTicks(yLo, yHi)) {
    const y = fmt(Y(v));
    parts.push(
      `<line x1="${fmt(MARGIN.left)}" y1="${y}" x2="${fmt(MARGIN.left + plotW)}" y2="${y}" stroke="#ddd"/>`,
      `<text x="${fmt(MARGIN.left - 8)}" y="${y}" text-anchor="end" dominant-baseline="middle" font-size="11">${tickLabel(v)}</text>`,
    );
  }
  parts.push(
    `<rect x="${fmt(MARGIN.left)}" y="${fmt(MARGIN.top)}" width="${fmt(plotW)}" height="${fmt(plotH)}" fill="none" stroke="#444"/>`,
    `<text x="${fmt(MARGIN.left + plotW / 2)}" y="${HEIGHT - 12}" text-anchor="middle" font-size="13">${esc(data.xLabel)}</text>`,
    `<text x="18" y="${fmt(MARGIN.top + plotH / 2)}" text-anchor="middle" font-size="13" transform="rotate(-90 18 ${fmt(MARGIN.top + plotH / 2)})">${esc(data.yLabel)}</text>`,
  );

  data.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length] as string;
    const dash = s.dashed ? ` stroke-dasharray="6 4"` : "";
    const pts = s.points.map((p) => `${fmt(X(p.x))},${fmt(Y(p.y))}`).join(" ");
    parts.push(`<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.8"${dash}/>`);
    for (const p of s.points) {
      parts.push(
        `<circle cx="${fmt(X(p.x))}" cy="${fmt(Y(p.y))}" r="3" fill="${color}" data-x="${esc(p.xRaw)}" data-y="${esc(p.yRaw)}"/>`,
      );
    }
  });

  const legendX = MARGIN.left + plotW + 12;
  data.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length] as string;
    const y = MARGIN.top + 10 + i * 20;
    const dash = s.dashed ? ` stroke-dasharray="6 4"` : "";
    parts.push(
      `<line x1="${legendX}" y1="${y}" x2="${legendX + 26}" y2="${y}" stroke="${color}" stroke-width="1.8"${dash}/>`,
      `<text x="${legendX + 32}" y="${y}" dominant-baseline="middle" font-size="11">${esc(s.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
