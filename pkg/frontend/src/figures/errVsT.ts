/**
 * Overlay of validation error curves err(t), one line per artifact. This is
 * the only figure that accepts several artifact directories at once, which
 * is how sample-size or estimator comparisons are read off.
 */
import { Artifact, requireColumns } from '../artifact';
import { LINE_COLORS, cartesianPanel, num, polyline, svgDocument } from '../svg';

const WIDTH = 560;
const HEIGHT = 360;
const BOX = { left: 70, top: 30, width: WIDTH - 90, height: HEIGHT - 90 };

function curveLabel(artifact: Artifact): string {
  const { scenario, run } = artifact.manifest;
  return `${scenario.name}, M=${run.samples}, method ${run.method}`;
}

export function renderErrVsT(artifacts: Artifact[]): string {
  const curves = artifacts.map((artifact) => {
    if (!artifact.err) {
      throw new Error(`${artifact.dir}: no error table in this artifact; err-vs-t needs validation runs`);
    }
    requireColumns(artifact.err, ['t', 'err'], `${artifact.dir}/err.csv`);
    return { t: artifact.err.col('t'), err: artifact.err.col('err'), label: curveLabel(artifact) };
  });

  const allT = curves.flatMap((c) => c.t);
  const allErr = curves.flatMap((c) => c.err);
  const tMax = Math.max(...allT);
  const errMax = Math.max(...allErr, 0);
  const doc = svgDocument(WIDTH, HEIGHT);
  doc.child('title').text('validation error over time');
  const frame = cartesianPanel(doc, BOX, [0, tMax], [0, errMax === 0 ? 1 : errMax * 1.08], {
    title: 'err(t) = |W estimate - W exact| along the grid',
    xLabel: 't',
    yLabel: 'err',
  });

  curves.forEach((curve, idx) => {
    const color = LINE_COLORS[idx % LINE_COLORS.length];
    const pts: [number, number][] = curve.t.map((t, j) => [frame.x(t), frame.y(curve.err[j])]);
    frame.plot.child('polyline', {
      points: polyline(pts), fill: 'none', stroke: color, 'stroke-width': '1.6',
    });
    for (const [px, py] of pts) {
      frame.plot.child('circle', { cx: num(px), cy: num(py), r: '2.6', fill: color });
    }
  });

  const legend = doc.child('g', { 'font-size': '11' });
  curves.forEach((curve, idx) => {
    const y = BOX.top + 16 + idx * 16;
    const x = BOX.left + 14;
    legend.child('line', {
      x1: num(x), y1: num(y - 4), x2: num(x + 24), y2: num(y - 4),
      stroke: LINE_COLORS[idx % LINE_COLORS.length], 'stroke-width': '1.6',
    });
    legend.child('text', { x: num(x + 30), y: num(y) }).text(curve.label);
  });
  return doc.render() + '\n';
}
