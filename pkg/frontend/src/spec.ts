/**
 * Figure specification: which observables to plot against the sweep
 * variable, which model series to overlay in each panel, and how to style
 * them. Parsed from the same structured-text dialect as the simulator's
 * experiment configs.
 */
import { parseToml, TomlTable, TomlValue } from './toml.js';

export class SpecError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'SpecError';
  }
}

export type SeriesStyle = 'line' | 'dashed' | 'markers';
export type MarkerShape = 'circle' | 'square' | 'triangle';
export type AxisSide = 'left' | 'right';

export interface SeriesSpec {
  csv: number;
  model: string;
  label: string;
  style: SeriesStyle;
  marker: MarkerShape;
  color: string | null;
  axis: AxisSide;
}

export interface PanelSpec {
  y: string;
  x: string;
  xLabel: string;
  yLabel: string;
  yRightLabel: string | null;
  title: string | null;
  series: SeriesSpec[];
}

export interface FigureSpec {
  columns: number;
  panelWidth: number;
  panelHeight: number;
  title: string | null;
  panels: PanelSpec[];
}

function asString(v: TomlValue | undefined, path: string, fallback?: string): string {
  if (v === undefined) {
    if (fallback !== undefined) return fallback;
    throw new SpecError(`${path}: missing required string`);
  }
  if (typeof v !== 'string') throw new SpecError(`${path}: expected a string`);
  return v;
}

function asNumber(v: TomlValue | undefined, path: string, fallback?: number): number {
  if (v === undefined) {
    if (fallback !== undefined) return fallback;
    throw new SpecError(`${path}: missing required number`);
  }
  if (typeof v !== 'number') throw new SpecError(`${path}: expected a number`);
  return v;
}

function oneOf<T extends string>(value: string, allowed: readonly T[], path: string): T {
  if ((allowed as readonly string[]).includes(value)) return value as T;
  throw new SpecError(`${path}: must be one of ${allowed.join(', ')}, got "${value}"`);
}

function parseSeries(table: TomlTable, path: string): SeriesSpec {
  const model = asString(table.model, `${path}.model`);
  return {
    csv: asNumber(table.csv, `${path}.csv`, 0),
    model,
    label: asString(table.label, `${path}.label`, model),
    style: oneOf(asString(table.style, `${path}.style`, 'line'),
      ['line', 'dashed', 'markers'] as const, `${path}.style`),
    marker: oneOf(asString(table.marker, `${path}.marker`, 'circle'),
      ['circle', 'square', 'triangle'] as const, `${path}.marker`),
    color: typeof table.color === 'string' ? table.color : null,
    axis: oneOf(asString(table.axis, `${path}.axis`, 'left'),
      ['left', 'right'] as const, `${path}.axis`),
  };
}

function parsePanel(table: TomlTable, path: string): PanelSpec {
  const seriesRaw = table.series;
  if (!Array.isArray(seriesRaw) || seriesRaw.length === 0) {
    throw new SpecError(`${path}.series: at least one series is required`);
  }
  const series = seriesRaw.map((entry, i) => {
    if (typeof entry !== 'object' || entry === null || Array.isArray(entry)) {
      throw new SpecError(`${path}.series[${i}]: expected a table`);
    }
    return parseSeries(entry as TomlTable, `${path}.series[${i}]`);
  });
  return {
    y: asString(table.y, `${path}.y`),
    x: asString(table.x, `${path}.x`, 'value'),
    xLabel: asString(table.x_label, `${path}.x_label`, asString(table.x, '', 'value')),
    yLabel: asString(table.y_label, `${path}.y_label`, asString(table.y, `${path}.y`)),
    yRightLabel: typeof table.y_right_label === 'string' ? table.y_right_label : null,
    title: typeof table.title === 'string' ? table.title : null,
    series,
  };
}

export function parseFigureSpec(text: string): FigureSpec {
  let root: TomlTable;
  try {
    root = parseToml(text);
  } catch (err) {
    throw new SpecError(`spec parse error: ${(err as Error).message}`);
  }
  const version = root.schema_version;
  if (version !== 1) throw new SpecError('schema_version: must be 1');
  const figure = (root.figure ?? {}) as TomlTable;
  if (typeof figure !== 'object' || Array.isArray(figure)) {
    throw new SpecError('figure: expected a table');
  }
  const panelsRaw = root.panel;
  if (!Array.isArray(panelsRaw) || panelsRaw.length === 0) {
    throw new SpecError('panel: at least one [[panel]] is required');
  }
  const panels = panelsRaw.map((entry, i) => {
    if (typeof entry !== 'object' || entry === null || Array.isArray(entry)) {
      throw new SpecError(`panel[${i}]: expected a table`);
    }
    return parsePanel(entry as TomlTable, `panel[${i}]`);
  });
  return {
    columns: asNumber(figure.columns, 'figure.columns', 2),
    panelWidth: asNumber(figure.panel_width, 'figure.panel_width', 460),
    panelHeight: asNumber(figure.panel_height, 'figure.panel_height', 330),
    title: typeof figure.title === 'string' ? figure.title : null,
    panels,
  };
}
