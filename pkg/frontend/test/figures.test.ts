import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { parseCsv } from "../src/csv.js";
import { render } from "../src/figures.js";

const FIXTURES = join(__dirname, "..", "fixtures");
const OMEGA = 1.95 * Math.PI;

function load(name: string) {
  return parseCsv(readFileSync(join(FIXTURES, name), "utf8"), name);
}

describe("gain figure", () => {
  const svg = render("gain-curves", [load("gain.csv")], OMEGA);

  it("is a complete SVG document", () => {
    expect(svg.startsWith("<svg ")).toBe(true);
    expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
  });

  it("draws both dashed reference slopes", () => {
    const dashedPolylines = svg.match(/<polyline[^>]*stroke-dasharray/g) ?? [];
    expect(dashedPolylines.length).toBe(2);
    expect(svg).toContain("slope -0.6");
    expect(svg).toContain(`slope -pi/omega = ${(-Math.PI / OMEGA).toFixed(3)}`);
  });

  it("re-renders byte-identically", () => {
    const again = render("gain-curves", [load("gain.csv")], OMEGA);
    expect(Buffer.from(again).equals(Buffer.from(svg))).toBe(true);
  });
});

describe("degenerate gain figure", () => {
  it("annotates instead of plotting a curve", () => {
    const svg = render("gain-curves", [load("gain_degenerate.csv")], OMEGA);
    expect(svg).toContain("gain undefined");
    expect(svg.match(/<circle/g) ?? []).toHaveLength(0);
  });
});

describe("other figure kinds", () => {
  it("renders error curves from the gain CSV", () => {
    const svg = render("error-curves", [load("gain.csv")], OMEGA);
    expect(svg).toContain("E0 #1");
    expect(svg).toContain("E1 #1");
  });

  it("renders the growth profile", () => {
    const svg = render("growth-profile", [load("growth.csv")], OMEGA);
    expect(svg).toContain("shell energy #1");
  });

  it("renders the excess decay curve", () => {
    const svg = render("excess-decay", [load("excess.csv")], OMEGA);
    expect(svg).toContain("excess #1");
  });

  it("renders the field heatmap with the corner zoom", () => {
    const svg = render("field-heatmap", [load("field.csv")], OMEGA);
    expect(svg).toContain("corner zoom");
    expect((svg.match(/<circle/g) ?? []).length).toBeGreaterThan(100);
  });

  it("rejects schema mismatches", () => {
    expect(() => render("gain-curves", [load("flux.csv")], OMEGA))
      .toThrow(/expected gain/);
    expect(() => render("field-heatmap", [load("gain.csv")], OMEGA))
      .toThrow(/expected field/);
  });
});
