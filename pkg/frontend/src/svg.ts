/**
 * Minimal deterministic SVG builder: fixed canvas, log/linear axes, series,
 * dashed reference lines.  No timestamps, no randomness: identical inputs
 * produce identical bytes.
 */

export interface Scale {
  toPx(v: number): number;
  ticks(): number[];
  label(v: number): string;
}

const fmt = (v: number) => {
  const s = v.toPrecision(6);
  return String(Number(s));
};

export function linearScale(lo: number, hi: number, pxLo: number, pxHi: number): Scale {
  const span = hi - lo || 1;
  const n = 5;
  return {
    toPx: (v) => pxLo + ((v - lo) / span) * (pxHi - pxLo),
    ticks: () => Array.from({ length: n + 1 }, (_, i) => lo + (span * i) / n),
    label: fmt,
  };
}

export function logScale(lo: number, hi: number, pxLo: number, pxHi: number): Scale {
  if (lo <= 0 || hi <= 0) throw new Error("log scale needs positive bounds");
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const span = lhi - llo || 1;
  const ticks: number[] = [];
  for (let e = Math.ceil(llo - 1e-9); e <= Math.floor(lhi + 1e-9); e++) ticks.push(10 ** e);
  if (ticks.length < 2) ticks.push(lo, hi);
  return {
    toPx: (v) => pxLo + ((Math.log10(v) - llo) / span) * (pxHi - pxLo),
    ticks: () => ticks,
    label: (v) => {
      const e = Math.log10(v);
      return Number.isInteger(e) ? `1e${e}` : fmt(v);
    },
  };
}

export const PALETTE = ["#1f6fb2", "#d1495b", "#3e8e5a", "#8a5fb0", "#c77f2e", "#4a4a4a"];

export class Figure {
  readonly width = 760;
  readonly height = 520;
  readonly margin = { left: 78, right: 24, top: 46, bottom: 58 };
  private parts: string[] = [];
  legendRow = 0;

  constructor(public title: string) {}

  get plotLeft() {
    return this.margin.left;
  }
  get plotRight() {
    return this.width - this.margin.right;
  }
  get plotTop() {
    return this.margin.top;
  }
  get plotBottom() {
    return this.height - this.margin.bottom;
  }

  add(fragment: string) {
    this.parts.push(fragment);
  }

  axes(x: Scale, y: Scale, xLabel: string, yLabel: string) {
    const a: string[] = [];
    a.push(
      `<rect x="${this.plotLeft}" y="${this.plotTop}" width="${this.plotRight - this.plotLeft}" ` +
      `height="${this.plotBottom - this.plotTop}" fill="none" stroke="#222" stroke-width="1"/>`,
    );
    for (const t of x.ticks()) {
      const px = x.toPx(t);
      if (px < this.plotLeft - 0.5 || px > this.plotRight + 0.5) continue;
      a.push(`<line x1="${px.toFixed(2)}" y1="${this.plotTop}" x2="${px.toFixed(2)}" ` +
        `y2="${this.plotBottom}" stroke="#ddd" stroke-width="0.7"/>`);
      a.push(`<text x="${px.toFixed(2)}" y="${this.plotBottom + 18}" font-size="11" ` +
        `text-anchor="middle" fill="#333">${x.label(t)}</text>`);
    }
    for (const t of y.ticks()) {
      const py = y.toPx(t);
      if (py < this.plotTop - 0.5 || py > this.plotBottom + 0.5) continue;
      a.push(`<line x1="${this.plotLeft}" y1="${py.toFixed(2)}" x2="${this.plotRight}" ` +
        `y2="${py.toFixed(2)}" stroke="#ddd" stroke-width="0.7"/>`);
      a.push(`<text x="${this.plotLeft - 8}" y="${(py + 4).toFixed(2)}" font-size="11" ` +
        `text-anchor="end" fill="#333">${y.label(t)}</text>`);
    }
    a.push(`<text x="${(this.plotLeft + this.plotRight) / 2}" y="${this.height - 14}" ` +
      `font-size="13" text-anchor="middle" fill="#111">${xLabel}</text>`);
    a.push(`<text x="20" y="${(this.plotTop + this.plotBottom) / 2}" font-size="13" ` +
      `text-anchor="middle" fill="#111" transform="rotate(-90 20 ${(this.plotTop + this.plotBottom) / 2})">${yLabel}</text>`);
    this.parts.unshift(a.join("\n"));
  }

  series(xs: number[], ys: number[], x: Scale, y: Scale, color: string, name: string,
         dashed = false) {
    const pts = xs.map((v, i) => `${x.toPx(v).toFixed(2)},${y.toPx(ys[i]).toFixed(2)}`).join(" ");
    const dash = dashed ? ` stroke-dasharray="7 5"` : "";
    this.add(`<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="1.8"${dash}/>`);
    if (!dashed) {
      for (let i = 0; i < xs.length; i++) {
        this.add(`<circle cx="${x.toPx(xs[i]).toFixed(2)}" cy="${y.toPx(ys[i]).toFixed(2)}" ` +
          `r="2.6" fill="${color}"/>`);
      }
    }
    this.legend(name, color, dashed);
  }

  legend(name: string, color: string, dashed: boolean) {
    const yPx = this.plotTop + 16 + 16 * this.legendRow++;
    const x0 = this.plotLeft + 12;
    const dash = dashed ? ` stroke-dasharray="7 5"` : "";
    this.add(`<line x1="${x0}" y1="${yPx - 4}" x2="${x0 + 26}" y2="${yPx - 4}" ` +
      `stroke="${color}" stroke-width="2"${dash}/>`);
    this.add(`<text x="${x0 + 32}" y="${yPx}" font-size="11" fill="#333">${name}</text>`);
  }

  annotation(text: string) {
    this.add(`<text x="${(this.plotLeft + this.plotRight) / 2}" ` +
      `y="${(this.plotTop + this.plotBottom) / 2}" font-size="14" text-anchor="middle" ` +
      `fill="#8a1f1f">${text}</text>`);
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" ` +
      `viewBox="0 0 ${this.width} ${this.height}">`,
      `<rect width="${this.width}" height="${this.height}" fill="#ffffff"/>`,
      `<text x="${this.width / 2}" y="26" font-size="15" text-anchor="middle" ` +
      `fill="#111">${this.title}</text>`,
      ...this.parts,
      `</svg>`,
      ``,
    ].join("\n");
  }
}

/** Blue-to-red diverging-ish colormap on [0, 1], deterministic. */
export function heatColor(t: number): string {
  const c = Math.max(0, Math.min(1, t));
  const r = Math.round(30 + 215 * c);
  const g = Math.round(60 + 110 * (1 - Math.abs(2 * c - 1)));
  const b = Math.round(245 - 215 * c);
  return `rgb(${r},${g},${b})`;
}
