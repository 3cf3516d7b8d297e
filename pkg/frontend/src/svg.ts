/**
 * Minimal deterministic SVG assembly: element tree, linear scales, tick
 * placement and shared axis/legend building blocks for the figure renderers.
 * Coordinates are rounded to fixed precision so a re-render of the same
 * artifact is byte-identical.
 */

export function num(x: number, digits = 2): string {
  if (!Number.isFinite(x)) throw new Error(`non-finite coordinate ${x} in SVG output`);
  const s = x.toFixed(digits);
  // Normalize negative zero and trim trailing zeros for stable compact output.
  const trimmed = s.replace(/\.?0+$/, '');
  return trimmed === '-0' || trimmed === '' ? '0' : trimmed;
}

function escapeText(s: string): string {
  return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

export class SvgElement {
  private children: (SvgElement | string)[] = [];
  constructor(private tag: string, private attrs: Record<string, string> = {}) {}

  child(tag: string, attrs: Record<string, string> = {}): SvgElement {
    const el = new SvgElement(tag, attrs);
    this.children.push(el);
    return el;
  }

  text(content: string): this {
    this.children.push(escapeText(content));
    return this;
  }

  render(indent = ''): string {
    const attrs = Object.entries(this.attrs)
      .map(([k, v]) => ` ${k}="${v}"`)
      .join('');
    if (this.children.length === 0) {
      return `${indent}<${this.tag}${attrs}/>`;
    }
    const inline = this.children.every((c) => typeof c === 'string');
    if (inline) {
      return `${indent}<${this.tag}${attrs}>${this.children.join('')}</${this.tag}>`;
    }
    const inner = this.children
      .map((c) => (typeof c === 'string' ? indent + '  ' + escapeText(c) : c.render(indent + '  ')))
      .join('\n');
    return `${indent}<${this.tag}${attrs}>\n${inner}\n${indent}</${this.tag}>`;
  }
}

export function svgDocument(width: number, height: number): SvgElement {
  return new SvgElement('svg', {
    xmlns: 'http://www.w3.org/2000/svg',
    width: String(width),
    height: String(height),
    viewBox: `0 0 ${width} ${height}`,
    'font-family': 'Helvetica, Arial, sans-serif',
  });
}

export interface Scale {
  (x: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0;
  const f = ((x: number) => (span === 0 ? (r0 + r1) / 2 : r0 + ((x - d0) / span) * (r1 - r0))) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

/** Round tick steps of the 1/2/5 family covering the domain, like plotting libraries pick. */
export function ticks(domain: [number, number], count = 5): number[] {
  const [lo, hi] = domain;
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / Math.max(1, count);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const norm = rawStep / mag;
  const step = (norm >= Math.sqrt(50) ? 10 : norm >= Math.sqrt(10) ? 5 : norm >= Math.SQRT2 ? 2 : 1) * mag;
  const out: number[] = [];
  for (let k = Math.ceil(lo / step - 1e-9); k * step <= hi + step * 1e-9; k++) {
    // Re-round each multiple so 3 * 0.1 comes out as 0.3, not 0.30000000000000004.
    out.push(parseFloat((k * step).toPrecision(12)));
  }
  return out;
}

export function tickLabel(v: number): string {
  if (v === 0) return '0';
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1).replace('e+', 'e');
  const s = v.toPrecision(6);
  return s.includes('.') ? s.replace(/\.?0+$/, '') : s;
}

export function polyline(points: [number, number][]): string {
  return points.map(([x, y]) => `${num(x)},${num(y)}`).join(' ');
}

export interface Frame {
  x: Scale;
  y: Scale;
  plot: SvgElement;
}

/**
 * One cartesian panel: background, frame box, tick marks and labels on both
 * axes, optional axis titles. Returns the scales plus a group clipped to
 * nothing (callers draw data in plot coordinates directly).
 */
export function cartesianPanel(
  parent: SvgElement,
  box: { left: number; top: number; width: number; height: number },
  xDomain: [number, number],
  yDomain: [number, number],
  labels: { title?: string; xLabel?: string; yLabel?: string } = {},
): Frame {
  const x = linearScale(xDomain, [box.left, box.left + box.width]);
  const y = linearScale(yDomain, [box.top + box.height, box.top]);
  const g = parent.child('g');
  g.child('rect', {
    x: num(box.left), y: num(box.top), width: num(box.width), height: num(box.height),
    fill: '#fcfcfc', stroke: '#444', 'stroke-width': '1',
  });
  const axes = g.child('g', { 'font-size': '10', fill: '#222' });
  for (const v of ticks(xDomain)) {
    const px = x(v);
    axes.child('line', {
      x1: num(px), y1: num(box.top + box.height), x2: num(px), y2: num(box.top + box.height + 4),
      stroke: '#444', 'stroke-width': '1',
    });
    axes.child('text', { x: num(px), y: num(box.top + box.height + 14), 'text-anchor': 'middle' })
      .text(tickLabel(v));
  }
  for (const v of ticks(yDomain)) {
    const py = y(v);
    axes.child('line', {
      x1: num(box.left - 4), y1: num(py), x2: num(box.left), y2: num(py),
      stroke: '#444', 'stroke-width': '1',
    });
    axes.child('text', { x: num(box.left - 6), y: num(py + 3), 'text-anchor': 'end' })
      .text(tickLabel(v));
  }
  if (labels.title) {
    g.child('text', {
      x: num(box.left + box.width / 2), y: num(box.top - 6),
      'text-anchor': 'middle', 'font-size': '12', fill: '#000',
    }).text(labels.title);
  }
  if (labels.xLabel) {
    g.child('text', {
      x: num(box.left + box.width / 2), y: num(box.top + box.height + 28),
      'text-anchor': 'middle', 'font-size': '11', fill: '#000',
    }).text(labels.xLabel);
  }
  if (labels.yLabel) {
    const cx = box.left - 38;
    const cy = box.top + box.height / 2;
    g.child('text', {
      x: num(cx), y: num(cy), 'text-anchor': 'middle', 'font-size': '11', fill: '#000',
      transform: `rotate(-90 ${num(cx)} ${num(cy)})`,
    }).text(labels.yLabel);
  }
  return { x, y, plot: g.child('g') };
}

/** Padded [min, max] of the finite entries; zero-span domains get a unit pad. */
export function extent(values: number[], padFraction = 0.05): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo > hi) throw new Error('no finite values to scale');
  if (lo === hi) return [lo - 1, hi + 1];
  const pad = (hi - lo) * padFraction;
  return [lo - pad, hi + pad];
}

export const LINE_COLORS = ['#c0392b', '#2166ac', '#27813c', '#8e44ad', '#b8860b', '#16818c'];

/** Arrow from tail to head as a line plus a solid triangular tip. */
export function arrow(
  parent: SvgElement,
  tail: [number, number],
  head: [number, number],
  color: string,
  width = 1.2,
): void {
  const dx = head[0] - tail[0];
  const dy = head[1] - tail[1];
  const len = Math.hypot(dx, dy);
  if (len < 1e-9) return;
  const ux = dx / len;
  const uy = dy / len;
  const tip = 4 + width;
  const bx = head[0] - ux * tip;
  const by = head[1] - uy * tip;
  parent.child('line', {
    x1: num(tail[0]), y1: num(tail[1]), x2: num(bx), y2: num(by),
    stroke: color, 'stroke-width': num(width, 1),
  });
  const wx = -uy * tip * 0.45;
  const wy = ux * tip * 0.45;
  parent.child('polygon', {
    points: polyline([[head[0], head[1]], [bx + wx, by + wy], [bx - wx, by - wy]]),
    fill: color,
  });
}
