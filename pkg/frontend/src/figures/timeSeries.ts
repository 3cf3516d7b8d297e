/**
 * Shared small-multiple layout for per-spin scalar time series (control
 * magnitude, orthogonality angle). Each spin gets its own panel and its own
 * vertical scale because magnitudes differ by orders between spins.
 */
import { Artifact, requireColumns, resolveSpins } from '../artifact';
import { cartesianPanel, extent, polyline, svgDocument } from '../svg';

const PANEL_W = 280;
const PANEL_H = 190;
const GAP = 34;
const MARGIN = { left: 64, top: 36, bottom: 48 };

export interface SeriesStyle {
  documentTitle: string;
  columnFor: (spin: number) => string;
  panelTitle: (spin: number) => string;
  yLabel: string;
  color: string;
  /** Pin the bottom of the scale at zero (natural for norms and angles). */
  zeroFloor: boolean;
}

export function renderPerSpinSeries(artifact: Artifact, style: SeriesStyle, spinSelection?: string): string {
  const spins = resolveSpins(artifact, spinSelection);
  const series = artifact.series;
  requireColumns(series, ['t', ...spins.map(style.columnFor)], style.documentTitle);
  const t = series.col('t');

  const width = MARGIN.left + spins.length * PANEL_W + (spins.length - 1) * GAP + 20;
  const height = MARGIN.top + PANEL_H + MARGIN.bottom;
  const doc = svgDocument(width, height);
  doc.child('title').text(`${style.documentTitle}, ${artifact.manifest.scenario.name}`);

  spins.forEach((spin, idx) => {
    const values = series.col(style.columnFor(spin));
    // The writer leaves the final grid row without a control; plot what exists.
    const points: [number, number][] = [];
    for (let j = 0; j < t.length; j++) {
      if (Number.isFinite(values[j])) points.push([t[j], values[j]]);
    }
    if (points.length === 0) {
      throw new Error(`${style.documentTitle}: column ${style.columnFor(spin)} has no finite entries`);
    }
    let [lo, hi] = extent(points.map((p) => p[1]));
    if (style.zeroFloor) {
      lo = 0;
      hi = hi <= 0 ? 1e-16 : hi;
    }
    const left = MARGIN.left + idx * (PANEL_W + GAP);
    const frame = cartesianPanel(
      doc,
      { left, top: MARGIN.top, width: PANEL_W, height: PANEL_H },
      [0, Math.max(...t)],
      [lo, hi],
      { title: style.panelTitle(spin), xLabel: 't', yLabel: idx === 0 ? style.yLabel : undefined },
    );
    frame.plot.child('polyline', {
      points: polyline(points.map(([tv, v]) => [frame.x(tv), frame.y(v)])),
      fill: 'none', stroke: style.color, 'stroke-width': '1.6',
    });
  });
  return doc.render() + '\n';
}
