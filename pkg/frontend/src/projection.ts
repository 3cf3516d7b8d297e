/**
 * Fixed orthographic camera for the unit-sphere panels. The view is a
 * constant of the package (matlab-like azimuth/elevation) so renders are
 * reproducible; there is deliberately no way to animate or orbit it.
 */

const AZIMUTH = (-37.5 * Math.PI) / 180;
const ELEVATION = (30 * Math.PI) / 180;

const EAST = [-Math.sin(AZIMUTH), Math.cos(AZIMUTH), 0];
const UP = [
  -Math.cos(AZIMUTH) * Math.sin(ELEVATION),
  -Math.sin(AZIMUTH) * Math.sin(ELEVATION),
  Math.cos(ELEVATION),
];

/** [h, v] screen coordinates with v pointing up; callers flip for SVG. */
export function project(p: number[]): [number, number] {
  return [
    p[0] * EAST[0] + p[1] * EAST[1] + p[2] * EAST[2],
    p[0] * UP[0] + p[1] * UP[1] + p[2] * UP[2],
  ];
}

/** Points of the circle {c + cos(t) a + sin(t) b}, used for wireframe rings. */
export function circle3d(center: number[], a: number[], b: number[], segments = 72): number[][] {
  const pts: number[][] = [];
  for (let k = 0; k <= segments; k++) {
    const t = (2 * Math.PI * k) / segments;
    const ct = Math.cos(t);
    const st = Math.sin(t);
    pts.push([
      center[0] + ct * a[0] + st * b[0],
      center[1] + ct * a[1] + st * b[1],
      center[2] + ct * a[2] + st * b[2],
    ]);
  }
  return pts;
}
