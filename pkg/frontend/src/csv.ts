/**
 * RFC-4180-style CSV reader for the simulator's sweep output.
 * Quoted fields may contain commas and doubled quotes (the error column
 * carries free-form messages), so a character-level state machine is used
 * rather than a naive split.
 */

export class CsvError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'CsvError';
  }
}

export type CsvRow = Record<string, string>;

export function parseCsv(text: string): CsvRow[] {
  const records: string[][] = [];
  let field = '';
  let record: string[] = [];
  let inQuotes = false;
  let i = 0;
  const pushField = () => {
    record.push(field);
    field = '';
  };
  const pushRecord = () => {
    pushField();
    records.push(record);
    record = [];
  };
  while (i < text.length) {
    const ch = text[i];
    if (inQuotes) {
      if (ch === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i += 2;
          continue;
        }
        inQuotes = false;
        i += 1;
        continue;
      }
      field += ch;
      i += 1;
      continue;
    }
    if (ch === '"') {
      inQuotes = true;
      i += 1;
    } else if (ch === ',') {
      pushField();
      i += 1;
    } else if (ch === '\n') {
      pushRecord();
      i += 1;
    } else if (ch === '\r') {
      i += 1; // swallow; \n handles the record break
    } else {
      field += ch;
      i += 1;
    }
  }
  if (field.length > 0 || record.length > 0) pushRecord();
  if (inQuotes) throw new CsvError('unterminated quoted field');
  if (records.length === 0) throw new CsvError('empty CSV');
  const header = records[0];
  const rows: CsvRow[] = [];
  for (let r = 1; r < records.length; r++) {
    const cells = records[r];
    if (cells.length === 1 && cells[0] === '') continue; // trailing newline
    if (cells.length !== header.length) {
      throw new CsvError(
        `row ${r + 1} has ${cells.length} cells, header has ${header.length}`,
      );
    }
    const row: CsvRow = {};
    header.forEach((name, c) => {
      row[name] = cells[c];
    });
    rows.push(row);
  }
  return rows;
}

export function requireColumns(rows: CsvRow[], columns: string[], source: string): void {
  if (rows.length === 0) throw new CsvError(`${source}: no data rows`);
  for (const col of columns) {
    if (!(col in rows[0])) {
      throw new CsvError(
        `${source}: missing column "${col}" (have: ${Object.keys(rows[0]).join(', ')})`,
      );
    }
  }
}
