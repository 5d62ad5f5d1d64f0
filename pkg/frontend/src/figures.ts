/**
 * Figure builders: each consumes validated tables and returns SVG text.
 *
 * Gain and error curves are log-log; gain figures carry the two dashed
 * reference slopes (the empirically reported -0.6 and the predicted
 * -pi/omega).  Degenerate inputs (zero or non-finite errors, as in the
 * identity-coefficient run) render an annotation instead of a curve.
 */

import { Table, column, requireSchema } from "./csv.js";
import { Figure, PALETTE, heatColor, logScale } from "./svg.js";

export const FIGURE_KINDS = [
  "field-heatmap", "error-curves", "gain-curves", "growth-profile", "excess-decay",
] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

function finitePositive(values: number[]): boolean {
  return values.every((v) => Number.isFinite(v) && v > 0);
}

function bounds(all: number[]): [number, number] {
  const lo = Math.min(...all);
  const hi = Math.max(...all);
  return [lo, hi === lo ? lo * 2 : hi];
}

function seriesName(table: Table, index: number, fallback: string): string {
  return table.configHash ? `${fallback} [${table.configHash.slice(0, 6)}]` : fallback;
}

export function gainCurves(tables: Table[], omega: number): string {
  tables.forEach((t) => requireSchema(t, "gain"));
  const fig = new Figure("Shell gain of the corner-adapted expansion");
  const usable = tables.filter((t) => finitePositive(column(t, "gain")));
  if (usable.length === 0) {
    fig.axes(logScale(0.01, 1, fig.plotLeft, fig.plotRight),
             logScale(0.1, 10, fig.plotBottom, fig.plotTop), "R", "E0/E1");
    fig.annotation("gain undefined: both expansions are exact (zero error)");
    return fig.render();
  }
  const allR = usable.flatMap((t) => column(t, "R"));
  const allG = usable.flatMap((t) => column(t, "gain"));
  const [rLo, rHi] = bounds(allR);
  const [gLo, gHi] = bounds(allG);
  const x = logScale(rLo, rHi, fig.plotLeft, fig.plotRight);
  const y = logScale(Math.min(gLo, 0.8), Math.max(gHi, 2), fig.plotBottom, fig.plotTop);
  usable.forEach((t, i) => {
    fig.series(column(t, "R"), column(t, "gain"), x, y, PALETTE[i % PALETTE.length],
               seriesName(t, i, `gain #${i + 1}`));
  });
  // reference slopes anchored at the innermost measured point
  const rAnchor = rLo;
  const gAnchor = Math.max(...usable.map((t) => {
    const rs = column(t, "R");
    const gs = column(t, "gain");
    return gs[rs.indexOf(Math.min(...rs))];
  }));
  for (const [slope, name, color] of [[-0.6, "slope -0.6", "#555"],
                                      [-Math.PI / omega, `slope -pi/omega = ${(-Math.PI / omega).toFixed(3)}`, "#999"]] as const) {
    const rs = [rLo, rHi];
    const gs = rs.map((r) => gAnchor * (r / rAnchor) ** slope);
    fig.series(rs, gs, x, y, color, name, true);
  }
  return fig.render();
}

export function errorCurves(tables: Table[]): string {
  tables.forEach((t) => requireSchema(t, "gain"));
  const fig = new Figure("Shell energy errors of both expansions");
  const usable = tables.filter((t) => finitePositive(column(t, "E0"))
    && finitePositive(column(t, "E1")));
  if (usable.length === 0) {
    fig.axes(logScale(0.01, 1, fig.plotLeft, fig.plotRight),
             logScale(0.01, 1, fig.plotBottom, fig.plotTop), "R", "E");
    fig.annotation("errors are identically zero");
    return fig.render();
  }
  const allR = usable.flatMap((t) => column(t, "R"));
  const allE = usable.flatMap((t) => [...column(t, "E0"), ...column(t, "E1")]);
  const [rLo, rHi] = bounds(allR);
  const [eLo, eHi] = bounds(allE);
  const x = logScale(rLo, rHi, fig.plotLeft, fig.plotRight);
  const y = logScale(eLo, eHi, fig.plotBottom, fig.plotTop);
  usable.forEach((t, i) => {
    const base = PALETTE[(2 * i) % PALETTE.length];
    const alt = PALETTE[(2 * i + 1) % PALETTE.length];
    fig.series(column(t, "R"), column(t, "E0"), x, y, base, seriesName(t, i, `E0 #${i + 1}`));
    fig.series(column(t, "R"), column(t, "E1"), x, y, alt, seriesName(t, i, `E1 #${i + 1}`));
  });
  return fig.render();
}

export function growthProfile(tables: Table[]): string {
  tables.forEach((t) => requireSchema(t, "growth"));
  const fig = new Figure("Corrector shell profiles");
  const allR = tables.flatMap((t) => column(t, "R"));
  const vals = tables.flatMap((t) => [...column(t, "shell_l2"), ...column(t, "shell_energy")])
    .filter((v) => v > 0);
  const [rLo, rHi] = bounds(allR);
  const [vLo, vHi] = bounds(vals);
  const x = logScale(rLo, rHi, fig.plotLeft, fig.plotRight);
  const y = logScale(vLo, vHi, fig.plotBottom, fig.plotTop);
  tables.forEach((t, i) => {
    fig.series(column(t, "R"), column(t, "shell_l2"), x, y,
               PALETTE[(2 * i) % PALETTE.length], seriesName(t, i, `shell rms #${i + 1}`));
    fig.series(column(t, "R"), column(t, "shell_energy"), x, y,
               PALETTE[(2 * i + 1) % PALETTE.length], seriesName(t, i, `shell energy #${i + 1}`));
  });
  return fig.render();
}

export function excessDecay(tables: Table[]): string {
  tables.forEach((t) => requireSchema(t, "excess"));
  const fig = new Figure("Excess decay toward the corner");
  const allR = tables.flatMap((t) => column(t, "r"));
  const vals = tables.flatMap((t) => column(t, "excess")).filter((v) => v > 0);
  const [rLo, rHi] = bounds(allR);
  const [vLo, vHi] = bounds(vals);
  const x = logScale(rLo, rHi, fig.plotLeft, fig.plotRight);
  const y = logScale(vLo, vHi, fig.plotBottom, fig.plotTop);
  tables.forEach((t, i) => {
    fig.series(column(t, "r"), column(t, "excess"), x, y, PALETTE[i % PALETTE.length],
               seriesName(t, i, `excess #${i + 1}`));
  });
  return fig.render();
}

export function fieldHeatmap(tables: Table[]): string {
  if (tables.length !== 1) throw new Error("field-heatmap takes exactly one CSV");
  const t = tables[0];
  requireSchema(t, "field");
  const xs = column(t, "x");
  const ys = column(t, "y");
  const vs = column(t, "value");
  const vLo = Math.min(...vs);
  const vHi = Math.max(...vs);
  const span = vHi - vLo || 1;

  const fig = new Figure("Nodal field with corner zoom");
  const size = 380;
  const panels: Array<[number, number, number]> = [
    [fig.plotLeft, 1.0, 0],                 // full view, |x| <= 1
    [fig.plotLeft + size + 40, 0.1, 1],     // corner zoom, |x| <= 0.1
  ];
  for (const [x0, radius, label] of panels) {
    const y0 = fig.plotTop + 10;
    fig.add(`<rect x="${x0 - 4}" y="${y0 - 4}" width="${size / 1.55 + 8}" height="${size / 1.55 + 8}" ` +
      `fill="none" stroke="#444" stroke-width="0.8"/>`);
    const w = size / 1.55;
    const toPx = (vx: number, vy: number): [number, number] =>
      [x0 + ((vx + radius) / (2 * radius)) * w, y0 + ((radius - vy) / (2 * radius)) * w];
    const dot = Math.max(0.9, (w / (2 * radius)) * 0.004);
    for (let i = 0; i < xs.length; i++) {
      if (Math.abs(xs[i]) > radius || Math.abs(ys[i]) > radius) continue;
      const [px, py] = toPx(xs[i], ys[i]);
      fig.add(`<circle cx="${px.toFixed(2)}" cy="${py.toFixed(2)}" r="${dot.toFixed(2)}" ` +
        `fill="${heatColor((vs[i] - vLo) / span)}"/>`);
    }
    fig.add(`<text x="${x0 + w / 2}" y="${y0 + w + 22}" font-size="12" text-anchor="middle" ` +
      `fill="#111">${label === 0 ? "full domain" : "corner zoom (radius 0.1)"}</text>`);
  }
  fig.add(`<text x="${fig.plotLeft}" y="${fig.height - 16}" font-size="11" fill="#333">` +
    `value range [${vLo.toPrecision(4)}, ${vHi.toPrecision(4)}]</text>`);
  return fig.render();
}

export function render(kind: FigureKind, tables: Table[], omega: number): string {
  switch (kind) {
    case "gain-curves":
      return gainCurves(tables, omega);
    case "error-curves":
      return errorCurves(tables);
    case "growth-profile":
      return growthProfile(tables);
    case "excess-decay":
      return excessDecay(tables);
    case "field-heatmap":
      return fieldHeatmap(tables);
  }
}
