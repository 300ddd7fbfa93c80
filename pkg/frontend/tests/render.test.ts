import assert from 'node:assert/strict';
import { test } from 'node:test';
import { parseCsv } from '../src/csv.js';
import { renderFigure } from '../src/render.js';
import { parseFigureSpec, SpecError } from '../src/spec.js';

const SPEC = `
schema_version = 1

[figure]
columns = 2

[[panel]]
y = "pop_upup"
x_label = "coupling"
y_label = "population"

[[panel.series]]
model = "semiclassical"
style = "line"

[[panel.series]]
model = "exact_sm"
style = "markers"
marker = "square"
axis = "right"
`;

const CSV = [
  'sweep_var,value,model,pop_upup,re_coh,deltaS,error',
  'lambda,0.0,semiclassical,0.05,0.0,0.0,',
  'lambda,1.0,semiclassical,0.2,0.1,0.0,',
  'lambda,2.0,semiclassical,0.4,0.2,0.0,',
  'lambda,0.0,exact_sm,0.05,0.0,0.0,',
  'lambda,1.0,exact_sm,0.21,0.11,0.01,',
  'lambda,2.0,exact_sm,0.39,0.21,0.02,',
  '',
].join('\n');

test('renders a panel with dual axes and both styles', () => {
  const spec = parseFigureSpec(SPEC);
  const svg = renderFigure(spec, [parseCsv(CSV)], ['data.csv']);
  assert.match(svg, /^<\?xml/);
  assert.match(svg, /<svg xmlns/);
  assert.match(svg, /<polyline/);
  assert.match(svg, /<rect[^>]*fill="#c44536"/); // square markers, second palette color
  assert.match(svg, /coupling/);
  assert.doesNotMatch(svg, /date|time|Date/i); // no timestamps embedded
});

test('single-point series renders without error', () => {
  const spec = parseFigureSpec(SPEC.replace('model = "exact_sm"', 'model = "exact_sm"'));
  const oneRow = parseCsv([
    'sweep_var,value,model,pop_upup,error',
    'lambda,1.0,semiclassical,0.2,',
    'lambda,1.0,exact_sm,0.21,',
    '',
  ].join('\n'));
  const svg = renderFigure(spec, [oneRow], ['one.csv']);
  assert.match(svg, /<svg/);
});

test('deterministic bytes across repeated renders', () => {
  const spec = parseFigureSpec(SPEC);
  const table = parseCsv(CSV);
  const first = renderFigure(spec, [table], ['data.csv']);
  const second = renderFigure(spec, [table], ['data.csv']);
  assert.equal(first, second);
});

test('missing column is a spec error', () => {
  const spec = parseFigureSpec(SPEC.replace('y = "pop_upup"', 'y = "nope"'));
  assert.throws(
    () => renderFigure(spec, [parseCsv(CSV)], ['data.csv']),
    /missing column "nope"/,
  );
});

test('empty sweep after filtering is a spec error', () => {
  const spec = parseFigureSpec(SPEC.replace('model = "exact_sm"', 'model = "absent"'));
  assert.throws(
    () => renderFigure(spec, [parseCsv(CSV)], ['data.csv']),
    (err: Error) => err instanceof SpecError && /empty sweep/.test(err.message),
  );
});

test('rows flagged with errors are skipped, not plotted', () => {
  const withError = parseCsv([
    'sweep_var,value,model,pop_upup,error',
    'lambda,0.0,semiclassical,0.05,',
    'lambda,1.0,semiclassical,0.2,',
    'lambda,2.0,semiclassical,,"QuadratureError: diverged"',
    'lambda,0.0,exact_sm,0.05,',
    'lambda,1.0,exact_sm,0.2,',
    '',
  ].join('\n'));
  const spec = parseFigureSpec(SPEC);
  const svg = renderFigure(spec, [withError], ['data.csv']);
  assert.match(svg, /<svg/);
});

test('series referencing a missing csv index is rejected', () => {
  const spec = parseFigureSpec(SPEC.replace('axis = "right"', 'axis = "right"\ncsv = 3'));
  assert.throws(
    () => renderFigure(spec, [parseCsv(CSV)], ['data.csv']),
    /references csv 3/,
  );
});
