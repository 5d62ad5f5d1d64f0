/**
 * CSV ingestion for the solver outputs.
 *
 * Every file starts with a `# config <hash>` comment, then a header row.
 * Schemas are matched by their header signature; gamma columns are variadic.
 */

export interface Table {
  configHash: string | null;
  columns: string[];
  rows: number[][];
  schema: string;
}

interface Schema {
  name: string;
  /** fixed leading column names */
  head: string[];
  /** prefix for a variadic block of columns (e.g. gamma_1, gamma_2, ...) */
  variadic?: string;
  /** fixed trailing column names after the variadic block */
  tail?: string[];
}

const SCHEMAS: Schema[] = [
  { name: "gain", head: ["R", "E0", "E1", "gain"] },
  { name: "growth", head: ["R", "shell_l2", "shell_energy"] },
  { name: "excess", head: ["r", "excess"], variadic: "gamma_" },
  { name: "flux", head: ["r", "flux"] },
  { name: "field", head: ["node_id", "x", "y", "value"] },
  { name: "sublinearity", head: ["r", "rms"] },
  { name: "cell-field", head: ["i", "j", "value"] },
  { name: "residual-history", head: ["iteration", "relative_residual"] },
  {
    name: "abar",
    head: ["a11", "a12", "a21", "a22", "grid_n", "deviation_from_identity", "max_residual"],
  },
  {
    name: "expansion-summary",
    head: ["epsilon"],
    variadic: "gamma_",
    tail: ["l2_err_classical", "l2_err_hybrid", "energy_err_classical", "energy_err_hybrid"],
  },
  {
    name: "gamma-recovery",
    head: ["n", "c_true", "c_recovered", "error", "c_recovered_fine", "error_fine"],
  },
];

function matchSchema(columns: string[]): string | null {
  outer: for (const s of SCHEMAS) {
    let i = 0;
    for (const name of s.head) {
      if (columns[i++] !== name) continue outer;
    }
    if (s.variadic !== undefined) {
      let k = 1;
      while (i < columns.length && columns[i] === `${s.variadic}${k}`) {
        i++;
        k++;
      }
    }
    for (const name of s.tail ?? []) {
      if (columns[i++] !== name) continue outer;
    }
    if (i === columns.length) return s.name;
  }
  return null;
}

export function parseCsv(text: string, path = "<memory>"): Table {
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  let configHash: string | null = null;
  let start = 0;
  if (lines[0]?.startsWith("#")) {
    const m = lines[0].match(/^#\s*config\s+(\S+)/);
    configHash = m ? m[1] : null;
    start = 1;
  }
  if (start >= lines.length) throw new Error(`${path}: no header row`);
  const columns = lines[start].split(",").map((c) => c.trim());
  const schema = matchSchema(columns);
  if (schema === null) {
    throw new Error(`${path}: unrecognized column layout [${columns.join(", ")}]`);
  }
  const rows: number[][] = [];
  for (let i = start + 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== columns.length) {
      throw new Error(`${path}: row ${i + 1} has ${parts.length} fields, expected ${columns.length}`);
    }
    const row = parts.map((p) => {
      const v = Number(p);
      if (p.trim() === "" || Number.isNaN(v)) {
        if (p.trim() === "inf" || p.trim() === "Infinity") return Infinity;
        throw new Error(`${path}: row ${i + 1}: not a number: ${p}`);
      }
      return v;
    });
    rows.push(row);
  }
  if (rows.length === 0) throw new Error(`${path}: no data rows`);
  return { configHash, columns, rows, schema };
}

export function column(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) throw new Error(`missing column ${name}`);
  return table.rows.map((r) => r[idx]);
}

export function requireSchema(table: Table, ...allowed: string[]): void {
  if (!allowed.includes(table.schema)) {
    throw new Error(`expected ${allowed.join(" or ")} data, got ${table.schema}`);
  }
}
