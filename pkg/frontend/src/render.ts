/**
 * SVG renderer: pure function of (figure spec, CSV tables) -> SVG text.
 * No timestamps, random ids, or environment-dependent content are ever
 * embedded, so byte-identical inputs give byte-identical images.
 */
import { CsvRow, requireColumns } from './csv.js';
import { FigureSpec, PanelSpec, SeriesSpec, SpecError } from './spec.js';

const PALETTE = [
  '#1f4e8c', '#c44536', '#3a7d44', '#8451a1', '#c78a17', '#3c3c3c',
  '#6aa4d8', '#e08f7f', '#8fc49a', '#b99bd0', '#e3c377', '#9a9a9a',
];

const MARGIN = { top: 42, right: 64, bottom: 52, left: 72 };

interface Point {
  x: number;
  y: number;
}

function fmt(v: number): string {
  // fixed two-decimal path coordinates keep the output compact and stable
  const s = v.toFixed(2);
  return s === '-0.00' ? '0.00' : s;
}

function fmtTick(v: number): string {
  if (v === 0) return '0';
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1).replace('e+', 'e');
  const s = v.toPrecision(4);
  return s.includes('.') ? s.replace(/0+$/, '').replace(/\.$/, '') : s;
}

function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) {
    const pad = Math.abs(lo) > 0 ? Math.abs(lo) * 0.5 : 0.5;
    lo -= pad;
    hi += pad;
  }
  const span = hi - lo;
  const rawStep = span / Math.max(count - 1, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const norm = rawStep / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

class Scale {
  constructor(
    private lo: number,
    private hi: number,
    private rLo: number,
    private rHi: number,
  ) {
    if (!(hi > lo)) {
      const pad = Math.abs(lo) > 0 ? Math.abs(lo) * 0.5 : 0.5;
      this.lo = lo - pad;
      this.hi = hi + pad;
    }
  }

  map(v: number): number {
    return this.rLo + ((v - this.lo) / (this.hi - this.lo)) * (this.rHi - this.rLo);
  }

  get domain(): [number, number] {
    return [this.lo, this.hi];
  }
}

function seriesPoints(rows: CsvRow[], series: SeriesSpec, panel: PanelSpec,
  source: string): Point[] {
  requireColumns(rows, [panel.x, panel.y, 'model'], source);
  const points: Point[] = [];
  for (const row of rows) {
    if (row.model !== series.model) continue;
    if (row.error && row.error.length > 0) continue; // failed sweep rows
    const x = Number(row[panel.x]);
    const yRaw = row[panel.y];
    if (yRaw === '') continue; // column legitimately empty for this model
    const y = Number(yRaw);
    if (!Number.isFinite(x) || !Number.isFinite(y)) {
      throw new SpecError(
        `${source}: non-numeric data for model "${series.model}" in ` +
        `columns ${panel.x}/${panel.y}`);
    }
    points.push({ x, y });
  }
  if (points.length === 0) {
    throw new SpecError(
      `${source}: empty sweep for model "${series.model}" in panel "${panel.y}"`);
  }
  points.sort((a, b) => a.x - b.x);
  return points;
}

function markerShape(shape: string, cx: number, cy: number, r: number,
  color: string): string {
  switch (shape) {
    case 'square':
      return `<rect x="${fmt(cx - r)}" y="${fmt(cy - r)}" width="${fmt(2 * r)}" ` +
        `height="${fmt(2 * r)}" fill="${color}"/>`;
    case 'triangle': {
      const pts = [
        [cx, cy - r],
        [cx - r, cy + r],
        [cx + r, cy + r],
      ].map(([a, b]) => `${fmt(a)},${fmt(b)}`).join(' ');
      return `<polygon points="${pts}" fill="${color}"/>`;
    }
    default:
      return `<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(r)}" fill="${color}"/>`;
  }
}

function esc(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

interface PanelData {
  panel: PanelSpec;
  pointsBySeries: Point[][];
}

function collectPanel(panel: PanelSpec, tables: CsvRow[][],
  sources: string[]): PanelData {
  const pointsBySeries = panel.series.map((series) => {
    if (series.csv < 0 || series.csv >= tables.length) {
      throw new SpecError(
        `series for model "${series.model}" references csv ${series.csv}, ` +
        `but only ${tables.length} file(s) were given`);
    }
    return seriesPoints(tables[series.csv], series, panel, sources[series.csv]);
  });
  return { panel, pointsBySeries };
}

function renderPanel(data: PanelData, ox: number, oy: number, w: number,
  h: number, colorFor: (s: SeriesSpec, i: number) => string): string {
  const { panel, pointsBySeries } = data;
  const plotW = w - MARGIN.left - MARGIN.right;
  const plotH = h - MARGIN.top - MARGIN.bottom;
  const px = ox + MARGIN.left;
  const py = oy + MARGIN.top;

  const xs = pointsBySeries.flat().map((p) => p.x);
  const xScale = new Scale(Math.min(...xs), Math.max(...xs), px, px + plotW);

  const sideExtent = (side: 'left' | 'right'): [number, number] | null => {
    const ys = pointsBySeries
      .flatMap((pts, i) => (panel.series[i].axis === side ? pts : []))
      .map((p) => p.y);
    if (ys.length === 0) return null;
    return [Math.min(...ys), Math.max(...ys)];
  };
  const padded = (ext: [number, number]): [number, number] => {
    const span = ext[1] - ext[0];
    const pad = span > 0 ? 0.06 * span : Math.max(Math.abs(ext[0]) * 0.1, 0.5);
    return [ext[0] - pad, ext[1] + pad];
  };
  const leftExt = sideExtent('left');
  const rightExt = sideExtent('right');
  const scales: Partial<Record<'left' | 'right', Scale>> = {};
  if (leftExt) {
    const [lo, hi] = padded(leftExt);
    scales.left = new Scale(lo, hi, py + plotH, py);
  }
  if (rightExt) {
    const [lo, hi] = padded(rightExt);
    scales.right = new Scale(lo, hi, py + plotH, py);
  }

  const parts: string[] = [];
  parts.push(`<rect x="${fmt(px)}" y="${fmt(py)}" width="${fmt(plotW)}" ` +
    `height="${fmt(plotH)}" fill="none" stroke="#222" stroke-width="1"/>`);

  // x ticks
  const [xLo, xHi] = xScale.domain;
  for (const t of niceTicks(xLo, xHi, 6)) {
    const tx = xScale.map(t);
    parts.push(`<line x1="${fmt(tx)}" y1="${fmt(py + plotH)}" x2="${fmt(tx)}" ` +
      `y2="${fmt(py + plotH + 5)}" stroke="#222" stroke-width="1"/>`);
    parts.push(`<text x="${fmt(tx)}" y="${fmt(py + plotH + 18)}" ` +
      `text-anchor="middle" class="tick">${fmtTick(t)}</text>`);
  }
  // y ticks, left and right
  if (scales.left) {
    const [lo, hi] = scales.left.domain;
    for (const t of niceTicks(lo, hi, 6)) {
      const ty = scales.left.map(t);
      parts.push(`<line x1="${fmt(px - 5)}" y1="${fmt(ty)}" x2="${fmt(px)}" ` +
        `y2="${fmt(ty)}" stroke="#222" stroke-width="1"/>`);
      parts.push(`<text x="${fmt(px - 8)}" y="${fmt(ty + 3.5)}" ` +
        `text-anchor="end" class="tick">${fmtTick(t)}</text>`);
    }
  }
  if (scales.right) {
    const [lo, hi] = scales.right.domain;
    for (const t of niceTicks(lo, hi, 6)) {
      const ty = scales.right.map(t);
      parts.push(`<line x1="${fmt(px + plotW)}" y1="${fmt(ty)}" ` +
        `x2="${fmt(px + plotW + 5)}" y2="${fmt(ty)}" stroke="#222" stroke-width="1"/>`);
      parts.push(`<text x="${fmt(px + plotW + 8)}" y="${fmt(ty + 3.5)}" ` +
        `text-anchor="start" class="tick">${fmtTick(t)}</text>`);
    }
  }

  // series
  pointsBySeries.forEach((pts, i) => {
    const series = panel.series[i];
    const color = colorFor(series, i);
    const scale = scales[series.axis];
    if (!scale) return;
    if (series.style === 'markers') {
      for (const p of pts) {
        parts.push(markerShape(series.marker, xScale.map(p.x), scale.map(p.y), 3.2, color));
      }
    } else {
      const path = pts
        .map((p) => `${fmt(xScale.map(p.x))},${fmt(scale.map(p.y))}`)
        .join(' ');
      const dash = series.style === 'dashed' ? ' stroke-dasharray="6 4"' : '';
      parts.push(`<polyline points="${path}" fill="none" stroke="${color}" ` +
        `stroke-width="1.6"${dash}/>`);
    }
  });

  // labels, title, legend
  parts.push(`<text x="${fmt(px + plotW / 2)}" y="${fmt(py + plotH + 40)}" ` +
    `text-anchor="middle" class="label">${esc(panel.xLabel)}</text>`);
  parts.push(`<text x="${fmt(ox + 18)}" y="${fmt(py + plotH / 2)}" ` +
    `text-anchor="middle" class="label" transform="rotate(-90 ${fmt(ox + 18)} ` +
    `${fmt(py + plotH / 2)})">${esc(panel.yLabel)}</text>`);
  if (panel.yRightLabel && scales.right) {
    const lx = px + plotW + MARGIN.right - 14;
    parts.push(`<text x="${fmt(lx)}" y="${fmt(py + plotH / 2)}" ` +
      `text-anchor="middle" class="label" transform="rotate(90 ${fmt(lx)} ` +
      `${fmt(py + plotH / 2)})">${esc(panel.yRightLabel)}</text>`);
  }
  if (panel.title) {
    parts.push(`<text x="${fmt(px + 6)}" y="${fmt(py - 8)}" class="title">` +
      `${esc(panel.title)}</text>`);
  }
  panel.series.forEach((series, i) => {
    const ly = py + 14 + 16 * i;
    const lx = px + plotW - 150;
    const color = colorFor(series, i);
    if (series.style === 'markers') {
      parts.push(markerShape(series.marker, lx + 9, ly - 3.5, 3.2, color));
    } else {
      const dash = series.style === 'dashed' ? ' stroke-dasharray="6 4"' : '';
      parts.push(`<line x1="${fmt(lx)}" y1="${fmt(ly - 3.5)}" x2="${fmt(lx + 18)}" ` +
        `y2="${fmt(ly - 3.5)}" stroke="${color}" stroke-width="1.6"${dash}/>`);
    }
    parts.push(`<text x="${fmt(lx + 24)}" y="${fmt(ly)}" class="legend">` +
      `${esc(series.label)}</text>`);
  });
  return parts.join('\n');
}

export function renderFigure(spec: FigureSpec, tables: CsvRow[][],
  sources: string[]): string {
  const panelData = spec.panels.map((panel) => collectPanel(panel, tables, sources));
  const cols = Math.max(1, Math.min(spec.columns, spec.panels.length));
  const rows = Math.ceil(spec.panels.length / cols);
  const titlePad = spec.title ? 30 : 0;
  const width = cols * spec.panelWidth;
  const height = rows * spec.panelHeight + titlePad;

  const colorFor = (series: SeriesSpec, i: number): string =>
    series.color ?? PALETTE[i % PALETTE.length];

  const body: string[] = [];
  body.push(`<?xml version="1.0" encoding="UTF-8"?>`);
  body.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
    `height="${height}" viewBox="0 0 ${width} ${height}">`);
  body.push('<style>text{font-family:Helvetica,Arial,sans-serif;fill:#111}' +
    '.tick{font-size:11px}.label{font-size:13px}.title{font-size:14px;' +
    'font-weight:bold}.legend{font-size:11px}</style>');
  body.push(`<rect x="0" y="0" width="${width}" height="${height}" fill="#ffffff"/>`);
  if (spec.title) {
    body.push(`<text x="${fmt(width / 2)}" y="20" text-anchor="middle" ` +
      `class="title">${esc(spec.title)}</text>`);
  }
  panelData.forEach((data, i) => {
    const cx = (i % cols) * spec.panelWidth;
    const cy = titlePad + Math.floor(i / cols) * spec.panelHeight;
    body.push(renderPanel(data, cx, cy, spec.panelWidth, spec.panelHeight, colorFor));
  });
  body.push('</svg>');
  return body.join('\n') + '\n';
}
