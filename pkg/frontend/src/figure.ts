import { SchemaError, Table, cellNumber, columnIndex } from "./csv.js";

export type FigureId = 3 | 4 | 5;

export interface Point {
  x: number;
  y: number;
  /** Cell text exactly as the CSV carries it; rendered into data attributes. */
  xRaw: string;
  yRaw: string;
}

export interface Series {
  label: string;
  points: Point[];
  dashed?: boolean;
}

export interface FigureData {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
}

const REQUIRED = [
  "P", "K", "N", "rho", "M_U", "M_S", "mode", "method",
  "T_best", "T_worst", "T_avg", "infeasible",
];

interface Row {
  cells: string[];
  x: number;
  xRaw: string;
  group: string; // raw value of the curve-defining column
}

function usableRows(table: Table, mode: string, xCol: string, groupCol: string): Row[] {
  const col: Record<string, number> = {};
  for (const name of REQUIRED) {
    col[name] = columnIndex(table, name);
  }
  const cell = (r: string[], name: string) => r[col[name] as number] as string;
  let rows = table.rows.filter(
    (r) => cell(r, "mode") === mode && cell(r, "infeasible") === "0" && cell(r, "T_avg") !== "",
  );
  // a method=both sweep writes formula rows next to simulate rows for the
  // same cells; keep the sampled rows when both are present
  if (rows.some((r) => cell(r, "method") !== "formula")) {
    rows = rows.filter((r) => cell(r, "method") !== "formula");
  }
  return rows.map((r) => ({
    cells: r,
    x: cellNumber(cell(r, xCol)),
    xRaw: cell(r, xCol),
    group: cell(r, groupCol),
  }));
}

function series(
  rows: Row[], table: Table, label: string, yCol: string, dashed?: boolean,
): Series {
  const yi = columnIndex(table, yCol);
  const points = rows
    .map((r) => ({
      x: r.x,
      y: cellNumber(r.cells[yi] as string),
      xRaw: r.xRaw,
      yRaw: r.cells[yi] as string,
    }))
    .sort((a, b) => a.x - b.x);
  return dashed ? { label, points, dashed } : { label, points };
}

function groups(rows: Row[]): string[] {
  const seen = new Map<string, number>();
  for (const r of rows) {
    if (!seen.has(r.group)) {
      seen.set(r.group, cellNumber(r.group));
    }
  }
  return [...seen.entries()].sort((a, b) => a[1] - b[1]).map(([raw]) => raw);
}

/** Pick and label the curves one figure draws from a sweep table. */
export function selectFigure(table: Table, figure: FigureId): FigureData {
  if (figure === 3) {
    const succ = usableRows(table, "successive", "M_U", "M_S");
    const par = usableRows(table, "parallel", "M_U", "M_S");
    if (succ.length === 0 && par.length === 0) {
      throw new SchemaError("no feasible rows to plot");
    }
    const out: Series[] = [];
    for (const ms of groups(succ)) {
      const rows = succ.filter((r) => r.group === ms);
      out.push(series(rows, table, `one-by-one, M_S=${ms}`, "T_avg"));
    }
    // envelopes and the simultaneous curve belong to the leanest storage level
    const base = groups(succ)[0];
    if (base !== undefined) {
      const rows = succ.filter((r) => r.group === base);
      out.push(series(rows, table, "best topology", "T_best", true));
      out.push(series(rows, table, "worst topology", "T_worst", true));
    }
    const parBase = groups(par)[0];
    if (parBase !== undefined) {
      const rows = par.filter((r) => r.group === parBase);
      out.push(series(rows, table, "simultaneous avg", "T_avg"));
    }
    return {
      title: "Delivery time vs user cache size",
      xLabel: "user cache capacity M_U (files)",
      yLabel: "normalized delivery time",
      series: out,
    };
  }
  const mode = figure === 4 ? "successive" : "parallel";
  const word = figure === 4 ? "one-by-one" : "simultaneous";
  const rows = usableRows(table, mode, "M_S", "rho");
  if (rows.length === 0) {
    throw new SchemaError("no feasible rows to plot");
  }
  const out = groups(rows).map((rho) =>
    series(rows.filter((r) => r.group === rho), table, `rho=${rho}`, "T_avg"),
  );
  return {
    title: `Delivery time vs server storage (${word} transmission)`,
    xLabel: "server storage capacity M_S (files)",
    yLabel: "normalized delivery time",
    series: out,
  };
}
