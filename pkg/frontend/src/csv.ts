import * as fs from "fs";

export interface Table {
  header: string[];
  rows: number[][];
}

export class SchemaError extends Error {
  constructor(public readonly offendingHeader: string, expected: string[]) {
    super(`schema mismatch: got "${offendingHeader}", expected "${expected.join(",")}"`);
  }
}

export const SCHEMAS: Record<string, string[]> = {
  heatmap: ["kx", "ky", "abs_psi_hat_sq"],
  scaling: ["trial", "t", "norm_T1", "norm_V_inf"],
  tail: ["trial", "norm_X", "sigma", "bound_ratio"],
};

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV");
  }
  const header = lines[0].split(",").map((s) => s.trim());
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",").map(Number);
    if (cells.some((c) => Number.isNaN(c))) {
      throw new Error(`non-numeric cell on line ${i + 1}`);
    }
    rows.push(cells);
  }
  return { header, rows };
}

export function loadChecked(path: string, kind: string): Table {
  const expected = SCHEMAS[kind];
  if (!expected) {
    throw new Error(`unknown figure kind "${kind}"`);
  }
  const table = parseCsv(fs.readFileSync(path, "utf8"));
  if (
    table.header.length !== expected.length ||
    table.header.some((h, i) => h !== expected[i])
  ) {
    throw new SchemaError(table.header.join(","), expected);
  }
  return table;
}
