/**
 * Terminal configuration of the whole ensemble at a glance: spins sit on a
 * ring (matching the ring exchange coupling of the switching scenarios),
 * the arrow at each node is the in-plane part (m_x, m_y) of the final state
 * and the node color encodes the out-of-plane component m_z.
 */
import { Artifact, resolveSpins, spinPath } from '../artifact';
import { SvgElement, arrow, num, svgDocument } from '../svg';

const SIZE = 420;
const NODE_R = 17;
const ARROW_MAX = 34;

function channel(a: number, b: number, f: number): number {
  return Math.round(a + (b - a) * f);
}

/** Diverging blue-white-red map on [-1, 1], used for the m_z channel. */
export function divergingColor(v: number): string {
  const clamped = Math.max(-1, Math.min(1, v));
  const blue = [33, 102, 172];
  const white = [247, 247, 247];
  const red = [178, 24, 43];
  const [from, to, f] = clamped < 0 ? [blue, white, clamped + 1] : [white, red, clamped];
  const rgb = [0, 1, 2].map((i) => channel(from[i], to[i], f));
  return `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`;
}

function colorbar(doc: SvgElement, left: number, top: number): void {
  const steps = 12;
  const barH = 120;
  const g = doc.child('g', { 'font-size': '10', fill: '#222' });
  for (let k = 0; k < steps; k++) {
    // Top of the bar is m_z = +1.
    const v = 1 - (2 * (k + 0.5)) / steps;
    g.child('rect', {
      x: num(left), y: num(top + (k * barH) / steps),
      width: '12', height: num(barH / steps + 0.5),
      fill: divergingColor(v),
    });
  }
  g.child('rect', { x: num(left), y: num(top), width: '12', height: num(barH), fill: 'none', stroke: '#444' });
  g.child('text', { x: num(left + 17), y: num(top + 8) }).text('+1');
  g.child('text', { x: num(left + 17), y: num(top + barH / 2 + 3) }).text('0');
  g.child('text', { x: num(left + 17), y: num(top + barH) }).text('-1');
  g.child('text', { x: num(left - 2), y: num(top - 8) }).text('m_z(T)');
}

export function renderFinalStateRing(artifact: Artifact, spinSelection?: string): string {
  const spins = resolveSpins(artifact, spinSelection);
  const t = artifact.series.col('t');
  const tFinal = t[t.length - 1];

  const doc = svgDocument(SIZE + 90, SIZE);
  doc.child('title').text(`final state ring, ${artifact.manifest.scenario.name}`);
  doc.child('text', {
    x: num(SIZE / 2), y: '22', 'text-anchor': 'middle', 'font-size': '13',
  }).text(`final state at t = ${tFinal}, ${artifact.manifest.scenario.name}`);

  const cx = SIZE / 2;
  const cy = SIZE / 2 + 10;
  const ringR = spins.length === 1 ? 0 : SIZE / 2 - 70;
  if (ringR > 0) {
    doc.child('circle', {
      cx: num(cx), cy: num(cy), r: num(ringR),
      fill: 'none', stroke: '#ddd', 'stroke-width': '1', 'stroke-dasharray': '4 4',
    });
  }

  spins.forEach((spin, idx) => {
    const finalState = spinPath(artifact, spin)[t.length - 1];
    const [mx, my, mz] = finalState;
    const theta = -Math.PI / 2 + (2 * Math.PI * idx) / spins.length;
    const nx = cx + ringR * Math.cos(theta);
    const ny = cy + ringR * Math.sin(theta);
    const g = doc.child('g');
    g.child('circle', {
      cx: num(nx), cy: num(ny), r: num(NODE_R),
      fill: divergingColor(mz), stroke: '#444', 'stroke-width': '1',
    });
    const planar = Math.hypot(mx, my);
    if (planar > 1e-12) {
      // Screen y grows downward, so +m_y points up on the page.
      arrow(g, [nx, ny], [nx + (mx / planar) * Math.min(planar, 1) * ARROW_MAX,
                          ny - (my / planar) * Math.min(planar, 1) * ARROW_MAX], '#111', 1.4);
    } else {
      g.child('circle', { cx: num(nx), cy: num(ny), r: '2.2', fill: '#111' });
    }
    const labelR = NODE_R + 13;
    g.child('text', {
      x: num(nx + labelR * Math.cos(theta)), y: num(ny + labelR * Math.sin(theta) + 4),
      'text-anchor': 'middle', 'font-size': '12', fill: '#000',
    }).text(String(spin));
  });

  colorbar(doc, SIZE + 30, 90);
  const legend = doc.child('g', { 'font-size': '10', fill: '#222' });
  legend.child('text', { x: num(SIZE + 28), y: '240' }).text('arrow:');
  legend.child('text', { x: num(SIZE + 28), y: '253' }).text('(m_x, m_y)');
  return doc.render() + '\n';
}
