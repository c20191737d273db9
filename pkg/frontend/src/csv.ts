/** Raised when the CSV does not carry the columns a figure needs. */
export class SchemaError extends Error {}

export interface Table {
  header: string[];
  rows: string[][];
}

// The sweep CSV never quotes fields (numbers, fractions, short words), so a
// plain comma split is exact.
export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    return { header: [], rows: [] };
  }
  const header = (lines[0] as string).split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(
        `row ${i + 2} has ${cells.length} cells, header has ${header.length}`,
      );
    }
    return cells;
  });
  return { header, rows };
}

export function columnIndex(table: Table, name: string): number {
  const i = table.header.indexOf(name);
  if (i < 0) {
    throw new SchemaError(`missing column: ${name}`);
  }
  return i;
}

/** Numeric value of a CSV cell; fractions like "5/4" are exact divisions. */
export function cellNumber(raw: string): number {
  if (raw.trim() === "") {
    throw new SchemaError('cell is not numeric: ""');
  }
  const slash = raw.indexOf("/");
  if (slash > 0) {
    const num = Number(raw.slice(0, slash));
    const den = Number(raw.slice(slash + 1));
    if (Number.isFinite(num) && Number.isFinite(den) && den !== 0) {
      return num / den;
    }
  }
  const v = Number(raw);
  if (!Number.isFinite(v)) {
    throw new SchemaError(`cell is not numeric: ${JSON.stringify(raw)}`);
  }
  return v;
}
