import { readFileSync, readdirSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { column, parseCsv } from "../src/csv.js";

const FIXTURES = join(__dirname, "..", "fixtures");

const EXPECTED_SCHEMAS: Record<string, string> = {
  "gain.csv": "gain",
  "gain_degenerate.csv": "gain",
  "growth.csv": "growth",
  "excess.csv": "excess",
  "flux.csv": "flux",
  "field.csv": "field",
  "abar.csv": "abar",
  "sublinearity.csv": "sublinearity",
  "cell_field.csv": "cell-field",
  "expansion_summary.csv": "expansion-summary",
  "gamma_recovery.csv": "gamma-recovery",
};

describe("schema validation against real solver outputs", () => {
  it("covers every fixture file", () => {
    const files = readdirSync(FIXTURES).filter((f) => f.endsWith(".csv"));
    expect(files.sort()).toEqual(Object.keys(EXPECTED_SCHEMAS).sort());
  });

  for (const [file, schema] of Object.entries(EXPECTED_SCHEMAS)) {
    it(`accepts ${file} as ${schema}`, () => {
      const table = parseCsv(readFileSync(join(FIXTURES, file), "utf8"), file);
      expect(table.schema).toBe(schema);
      expect(table.configHash).toMatch(/^[0-9a-f]{12}$/);
      expect(table.rows.length).toBeGreaterThan(0);
    });
  }
});

describe("rejection paths", () => {
  it("rejects unknown column layouts", () => {
    expect(() => parseCsv("a,b,c\n1,2,3\n")).toThrow(/unrecognized column layout/);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("r,flux\n0.5,1.0\n0.25\n")).toThrow(/row 3/);
  });

  it("rejects non-numeric fields", () => {
    expect(() => parseCsv("r,flux\n0.5,huh\n")).toThrow(/not a number/);
  });

  it("rejects empty tables", () => {
    expect(() => parseCsv("r,flux\n")).toThrow(/no data rows/);
  });
});

describe("values", () => {
  it("parses inf gains in the degenerate run", () => {
    const t = parseCsv(readFileSync(join(FIXTURES, "gain_degenerate.csv"), "utf8"));
    expect(column(t, "gain").every((v) => v === Infinity)).toBe(true);
    expect(column(t, "E0").every((v) => v === 0)).toBe(true);
  });

  it("keeps gamma columns of the excess table", () => {
    const t = parseCsv(readFileSync(join(FIXTURES, "excess.csv"), "utf8"));
    expect(t.columns).toContain("gamma_1");
    expect(column(t, "excess").every((v) => v >= 0)).toBe(true);
  });
});
