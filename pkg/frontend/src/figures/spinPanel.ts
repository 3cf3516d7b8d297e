/**
 * Per-spin trajectory spheres: wireframe unit sphere, the state path m_i(t)
 * in red, and blue unit-length arrows showing the control direction
 * u_i(t)/|u_i(t)| anchored on the path. One square panel per selected spin.
 */
import { Artifact, controlPath, resolveSpins, spinPath } from '../artifact';
import { circle3d, project } from '../projection';
import { SvgElement, Scale, linearScale, num, polyline, svgDocument, arrow } from '../svg';

const PANEL = 300;
const MARGIN = { left: 16, right: 16, top: 34, bottom: 40 };
const ARROW_LENGTH = 0.45;
const MAX_ARROWS = 32;
/** Controls below this norm are treated as switched off; no direction exists. */
const CONTROL_EPS = 1e-14;

function drawSphere(g: SvgElement, sx: Scale, sy: Scale): void {
  const wire = g.child('g', { fill: 'none', stroke: '#d4d4d4', 'stroke-width': '0.7' });
  const toPixels = (pts: number[][]): [number, number][] =>
    pts.map((p) => {
      const [h, v] = project(p);
      return [sx(h), sy(v)];
    });
  for (const latDeg of [-60, -30, 0, 30, 60]) {
    const lat = (latDeg * Math.PI) / 180;
    const r = Math.cos(lat);
    const z = Math.sin(lat);
    wire.child('polyline', { points: polyline(toPixels(circle3d([0, 0, z], [r, 0, 0], [0, r, 0]))) });
  }
  for (let lonDeg = 0; lonDeg < 180; lonDeg += 45) {
    const lon = (lonDeg * Math.PI) / 180;
    const a = [Math.cos(lon), Math.sin(lon), 0];
    wire.child('polyline', { points: polyline(toPixels(circle3d([0, 0, 0], a, [0, 0, 1]))) });
  }
  // Silhouette: orthographic projection of the unit sphere is the unit disk.
  g.child('circle', {
    cx: num(sx(0)), cy: num(sy(0)), r: num(Math.abs(sx(1) - sx(0))),
    fill: 'none', stroke: '#8a8a8a', 'stroke-width': '1',
  });
  const axes = g.child('g', { 'font-size': '9', fill: '#666' });
  const names = ['x', 'y', 'z'];
  for (let axis = 0; axis < 3; axis++) {
    const tip = [0, 0, 0];
    tip[axis] = 1.25;
    const [h, v] = project(tip);
    axes.child('line', {
      x1: num(sx(0)), y1: num(sy(0)), x2: num(sx(h)), y2: num(sy(v)),
      stroke: '#aaa', 'stroke-width': '0.7',
    });
    axes.child('text', { x: num(sx(h * 1.1)), y: num(sy(v * 1.1) + 3), 'text-anchor': 'middle' })
      .text(names[axis]);
  }
}

function drawSpin(g: SvgElement, artifact: Artifact, spin: number, sx: Scale, sy: Scale): void {
  const states = spinPath(artifact, spin);
  const controls = controlPath(artifact, spin);
  drawSphere(g, sx, sy);

  const pathPts: [number, number][] = states.map((p) => {
    const [h, v] = project(p);
    return [sx(h), sy(v)];
  });
  g.child('polyline', {
    points: polyline(pathPts),
    fill: 'none', stroke: '#c0392b', 'stroke-width': '1.6',
  });
  g.child('circle', { cx: num(pathPts[0][0]), cy: num(pathPts[0][1]), r: '3.5', fill: '#c0392b' });
  const last = pathPts[pathPts.length - 1];
  g.child('rect', {
    x: num(last[0] - 3), y: num(last[1] - 3), width: '6', height: '6',
    fill: '#fff', stroke: '#c0392b', 'stroke-width': '1.5',
  });

  // Directions only where a control actually acts; rows with |u| ~ 0 (and the
  // trailing NaN row the writer emits) carry no direction and draw nothing.
  const arrows = g.child('g');
  const usable: number[] = [];
  for (let j = 0; j < controls.length; j++) {
    const u = controls[j];
    if (u.some((c) => !Number.isFinite(c))) continue;
    if (Math.hypot(u[0], u[1], u[2]) <= CONTROL_EPS) continue;
    usable.push(j);
  }
  const stride = Math.max(1, Math.ceil(usable.length / MAX_ARROWS));
  for (let k = 0; k < usable.length; k += stride) {
    const j = usable[k];
    const u = controls[j];
    const norm = Math.hypot(u[0], u[1], u[2]);
    const head = states[j].map((c, l) => c + (ARROW_LENGTH * u[l]) / norm);
    const [th, tv] = project(states[j]);
    const [hh, hv] = project(head);
    arrow(arrows, [sx(th), sy(tv)], [sx(hh), sy(hv)], '#2166ac', 1.1);
  }
}

export function renderSpinPanel(artifact: Artifact, spinSelection?: string): string {
  const spins = resolveSpins(artifact, spinSelection);
  const width = MARGIN.left + spins.length * PANEL + (spins.length - 1) * 12 + MARGIN.right;
  const height = MARGIN.top + PANEL + MARGIN.bottom;
  const doc = svgDocument(width, height);
  doc.child('title').text(`state and control direction, ${artifact.manifest.scenario.name}`);

  spins.forEach((spin, idx) => {
    const left = MARGIN.left + idx * (PANEL + 12);
    const sx = linearScale([-1.45, 1.45], [left, left + PANEL]);
    const sy = linearScale([-1.45, 1.45], [MARGIN.top + PANEL, MARGIN.top]);
    const g = doc.child('g');
    g.child('text', {
      x: num(left + PANEL / 2), y: num(MARGIN.top - 10),
      'text-anchor': 'middle', 'font-size': '13',
    }).text(`spin ${spin}`);
    drawSpin(g, artifact, spin, sx, sy);
  });

  const legendY = MARGIN.top + PANEL + 24;
  const legend = doc.child('g', { 'font-size': '11' });
  legend.child('line', { x1: num(MARGIN.left), y1: num(legendY - 4), x2: num(MARGIN.left + 26), y2: num(legendY - 4), stroke: '#c0392b', 'stroke-width': '1.6' });
  legend.child('text', { x: num(MARGIN.left + 32), y: num(legendY) }).text('state m(t)');
  legend.child('line', { x1: num(MARGIN.left + 110), y1: num(legendY - 4), x2: num(MARGIN.left + 136), y2: num(legendY - 4), stroke: '#2166ac', 'stroke-width': '1.2' });
  legend.child('text', { x: num(MARGIN.left + 142), y: num(legendY) }).text('control direction u/|u|');
  return doc.render() + '\n';
}
