/**
 * Minimal TOML subset parser — the same structured-text dialect the
 * simulator's experiment configs use. Supports: comments, bare/dotted
 * table headers `[a.b]`, arrays of tables `[[a.b]]`, and `key = value`
 * with strings, numbers, booleans and (possibly multiline) arrays.
 *
 * Deliberately not a full TOML implementation; figure specs only need
 * this subset, and keeping the parser local makes the renderer
 * dependency-free.
 */

export type TomlValue = string | number | boolean | TomlValue[] | TomlTable;
export type TomlTable = { [key: string]: TomlValue };

export class TomlError extends Error {
  constructor(line: number, message: string) {
    super(`line ${line}: ${message}`);
    this.name = 'TomlError';
  }
}

function parseScalar(raw: string, line: number): TomlValue {
  const text = raw.trim();
  if (text.startsWith('"')) {
    if (!text.endsWith('"') || text.length < 2) {
      throw new TomlError(line, `unterminated string: ${text}`);
    }
    return text
      .slice(1, -1)
      .replace(/\\"/g, '"')
      .replace(/\\\\/g, '\\')
      .replace(/\\n/g, '\n')
      .replace(/\\t/g, '\t');
  }
  if (text === 'true') return true;
  if (text === 'false') return false;
  const num = Number(text.replace(/_/g, ''));
  if (text.length > 0 && Number.isFinite(num)) return num;
  throw new TomlError(line, `cannot parse value: ${text}`);
}

function splitTopLevel(body: string, line: number): string[] {
  // split an array body on commas not nested in brackets or strings
  const parts: string[] = [];
  let depth = 0;
  let inString = false;
  let current = '';
  for (let i = 0; i < body.length; i++) {
    const ch = body[i];
    if (inString) {
      current += ch;
      if (ch === '"' && body[i - 1] !== '\\') inString = false;
      continue;
    }
    if (ch === '"') {
      inString = true;
      current += ch;
    } else if (ch === '[') {
      depth += 1;
      current += ch;
    } else if (ch === ']') {
      depth -= 1;
      if (depth < 0) throw new TomlError(line, 'unbalanced brackets in array');
      current += ch;
    } else if (ch === ',' && depth === 0) {
      parts.push(current);
      current = '';
    } else {
      current += ch;
    }
  }
  if (current.trim().length > 0) parts.push(current);
  return parts;
}

function parseValue(raw: string, line: number): TomlValue {
  const text = raw.trim();
  if (text.startsWith('[')) {
    if (!text.endsWith(']')) throw new TomlError(line, 'unterminated array');
    const body = text.slice(1, -1).trim();
    if (body.length === 0) return [];
    return splitTopLevel(body, line).map((part) => parseValue(part, line));
  }
  return parseScalar(text, line);
}

function stripComment(line: string): string {
  let inString = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (ch === '"' && line[i - 1] !== '\\') inString = !inString;
    if (ch === '#' && !inString) return line.slice(0, i);
  }
  return line;
}

function descend(root: TomlTable, path: string[], line: number): TomlTable {
  let node: TomlTable = root;
  for (const key of path) {
    const existing = node[key];
    if (existing === undefined) {
      const child: TomlTable = {};
      node[key] = child;
      node = child;
    } else if (Array.isArray(existing)) {
      const last = existing[existing.length - 1];
      if (typeof last !== 'object' || last === null || Array.isArray(last)) {
        throw new TomlError(line, `key ${key} is not a table array`);
      }
      node = last as TomlTable;
    } else if (typeof existing === 'object') {
      node = existing as TomlTable;
    } else {
      throw new TomlError(line, `key ${key} already holds a value`);
    }
  }
  return node;
}

export function parseToml(text: string): TomlTable {
  const root: TomlTable = {};
  let current: TomlTable = root;
  const lines = text.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    let line = stripComment(lines[i]).trim();
    if (line.length === 0) continue;
    const lineNo = i + 1;
    if (line.startsWith('[[')) {
      if (!line.endsWith(']]')) throw new TomlError(lineNo, 'malformed table-array header');
      const path = line.slice(2, -2).trim().split('.').map((s) => s.trim());
      const parent = descend(root, path.slice(0, -1), lineNo);
      const key = path[path.length - 1];
      const entry: TomlTable = {};
      const existing = parent[key];
      if (existing === undefined) {
        parent[key] = [entry];
      } else if (Array.isArray(existing)) {
        existing.push(entry);
      } else {
        throw new TomlError(lineNo, `key ${key} already holds a non-array value`);
      }
      current = entry;
      continue;
    }
    if (line.startsWith('[')) {
      if (!line.endsWith(']')) throw new TomlError(lineNo, 'malformed table header');
      const path = line.slice(1, -1).trim().split('.').map((s) => s.trim());
      current = descend(root, path, lineNo);
      continue;
    }
    const eq = line.indexOf('=');
    if (eq < 0) throw new TomlError(lineNo, `expected key = value, got: ${line}`);
    const key = line.slice(0, eq).trim();
    if (key.length === 0) throw new TomlError(lineNo, 'empty key');
    let value = line.slice(eq + 1).trim();
    // multiline arrays: keep consuming lines until brackets balance
    if (value.startsWith('[')) {
      let open = 0;
      const count = (s: string) => {
        for (const ch of s) {
          if (ch === '[') open += 1;
          if (ch === ']') open -= 1;
        }
      };
      count(value);
      while (open > 0 && i + 1 < lines.length) {
        i += 1;
        const next = stripComment(lines[i]);
        value += ' ' + next.trim();
        count(next);
      }
      if (open > 0) throw new TomlError(lineNo, 'unterminated multiline array');
    }
    current[key] = parseValue(value, lineNo);
  }
  return root;
}
