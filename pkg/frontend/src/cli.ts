#!/usr/bin/env node
/**
 * Figure renderer CLI.
 *
 *   qcollide-plots render --spec figure.spec --csv sweep.csv [--csv more.csv] --out fig.svg
 *
 * Exit codes: 0 success, 2 spec/data validation error.
 */
import { readFileSync, writeFileSync, mkdirSync } from 'node:fs';
import { dirname } from 'node:path';
import { CsvError, parseCsv } from './csv.js';
import { renderFigure } from './render.js';
import { parseFigureSpec, SpecError } from './spec.js';

interface RenderArgs {
  spec: string;
  csv: string[];
  out: string;
}

function usage(): string {
  return 'usage: qcollide-plots render --spec FILE --csv FILE [--csv FILE ...] --out FILE';
}

export function parseArgs(argv: string[]): RenderArgs {
  if (argv[0] !== 'render') {
    throw new SpecError(`unknown command "${argv[0] ?? ''}"\n${usage()}`);
  }
  let spec: string | null = null;
  let out: string | null = null;
  const csv: string[] = [];
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) throw new SpecError(`missing value for ${flag}\n${usage()}`);
    if (flag === '--spec') spec = value;
    else if (flag === '--csv') csv.push(value);
    else if (flag === '--out') out = value;
    else throw new SpecError(`unknown flag ${flag}\n${usage()}`);
  }
  if (!spec || !out || csv.length === 0) {
    throw new SpecError(`--spec, --csv and --out are required\n${usage()}`);
  }
  return { spec, csv, out };
}

export function runRender(args: RenderArgs): void {
  const specText = readFileSync(args.spec, 'utf-8');
  const spec = parseFigureSpec(specText);
  const tables = args.csv.map((path) => parseCsv(readFileSync(path, 'utf-8')));
  const svg = renderFigure(spec, tables, args.csv);
  mkdirSync(dirname(args.out), { recursive: true });
  writeFileSync(args.out, svg);
}

export function main(argv: string[]): number {
  try {
    runRender(parseArgs(argv));
    return 0;
  } catch (err) {
    if (err instanceof SpecError || err instanceof CsvError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    if ((err as NodeJS.ErrnoException).code === 'ENOENT') {
      console.error(`error: ${(err as Error).message}`);
      return 2;
    }
    throw err;
  }
}

const invokedDirectly = process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
