import { join } from 'path';
import { describe, expect, it } from 'vitest';
import { Artifact, Table, loadArtifact } from '../src/artifact';
import { render } from '../src/render';
import { renderSpinPanel } from '../src/figures/spinPanel';
import { renderAnglePanel } from '../src/figures/anglePanel';
import { divergingColor } from '../src/figures/finalStateRing';

const FIXTURES = join(__dirname, 'fixtures');
const SPIN3 = join(FIXTURES, 'spin3-smoke');
const VALIDATE = [join(FIXTURES, 'validate-m400'), join(FIXTURES, 'validate-m1600')];

function makeTable(columns: string[], rows: number[][]): Table {
  return {
    columns,
    rows: rows.length,
    col: (name) => {
      const idx = columns.indexOf(name);
      if (idx < 0) throw new Error(`no column named ${name}`);
      return rows.map((r) => r[idx]);
    },
  };
}

/** One-spin artifact whose control is identically zero (free dynamics). */
function zeroControlArtifact(): Artifact {
  const columns = ['t', 'm_1_1', 'm_1_2', 'm_1_3', 'u_1_1', 'u_1_2', 'u_1_3',
    'unorm2_1', 'angle_1', 'w', 'w_stderr', 'flagged_fraction'];
  const rows = [0, 1, 2, 3].map((j) => {
    const phi = 0.3 * j;
    return [0.1 * j, Math.cos(phi), Math.sin(phi), 0, 0, 0, 0, 0, 0, 1, 0, 0];
  });
  return {
    dir: '<synthetic>',
    manifest: {
      schema: 'spinctrl-run-v1',
      scenario: { name: 'synthetic', n_spins: 1 },
      run: { samples: 0, tau: 0.1, method: 'B', master_seed: 0 },
      versions: {},
      files: { series: 'series.csv', midpoint_controls: 'midpoint_controls.csv' },
    },
    series: makeTable(columns, rows),
    midpointControls: makeTable(['t', 'u_1_1', 'u_1_2', 'u_1_3'], [[0.05, 0, 0, 0]]),
    err: null,
  };
}

describe('render dispatch', () => {
  it('draws every kind from the three-spin fixture without error', () => {
    for (const kind of ['spin-panel', 'control-magnitude', 'angle-panel', 'final-state-ring'] as const) {
      const svg = render({ kind, artifactDirs: [SPIN3] });
      expect(svg.startsWith('<svg')).toBe(true);
      expect(svg.length).toBeGreaterThan(500);
    }
    const overlay = render({ kind: 'err-vs-t', artifactDirs: VALIDATE });
    expect(overlay).toContain('M=400');
    expect(overlay).toContain('M=1600');
  });

  it('is deterministic for a fixed artifact', () => {
    const once = render({ kind: 'spin-panel', artifactDirs: [SPIN3], spins: '2' });
    const twice = render({ kind: 'spin-panel', artifactDirs: [SPIN3], spins: '2' });
    expect(twice).toBe(once);
  });

  it('rejects unknown kinds and multi-artifact misuse', () => {
    expect(() => render({ kind: 'pie' as never, artifactDirs: [SPIN3] }))
      .toThrow(/unknown figure kind "pie"/);
    expect(() => render({ kind: 'spin-panel', artifactDirs: VALIDATE }))
      .toThrow(/only err-vs-t overlays several/);
    expect(() => render({ kind: 'err-vs-t', artifactDirs: [] })).toThrow(/no artifact directory/);
  });

  it('err-vs-t refuses artifacts without an error table', () => {
    expect(() => render({ kind: 'err-vs-t', artifactDirs: [SPIN3] }))
      .toThrow(/no error table/);
  });
});

describe('spin panel', () => {
  it('draws control arrows for an actively controlled run', () => {
    const svg = renderSpinPanel(loadArtifact(SPIN3), '2');
    // Arrowheads are the only polygons in this figure.
    expect((svg.match(/<polygon/g) ?? []).length).toBeGreaterThan(5);
  });

  it('omits arrows when the control column is identically zero', () => {
    const svg = renderSpinPanel(zeroControlArtifact());
    expect(svg).toContain('polyline');
    expect(svg).not.toContain('<polygon');
  });

  it('honors the spin selection', () => {
    const one = renderSpinPanel(loadArtifact(SPIN3), '2');
    const all = renderSpinPanel(loadArtifact(SPIN3));
    expect((one.match(/spin \d/g) ?? []).length).toBe(1);
    expect((all.match(/spin \d/g) ?? []).length).toBe(3);
  });
});

describe('scalar panels', () => {
  it('angle panel reports a missing column by name', () => {
    const artifact = zeroControlArtifact();
    const pruned = { ...artifact, series: makeTable(['t', 'm_1_1'], [[0, 1], [0.1, 1]]) };
    expect(() => renderAnglePanel(pruned)).toThrow(/missing column\(s\) angle_1/);
  });

  it('zero-control angle and magnitude columns render flat lines, no crash', () => {
    const artifact = zeroControlArtifact();
    expect(render({ kind: 'control-magnitude', artifactDirs: [SPIN3] })).toContain('|u_1(t)|^2');
    expect(renderAnglePanel(artifact)).toContain('angle(m_1, u_1)');
  });
});

describe('diverging colormap', () => {
  it('hits blue, white, red at the anchor values', () => {
    expect(divergingColor(-1)).toBe('rgb(33,102,172)');
    expect(divergingColor(0)).toBe('rgb(247,247,247)');
    expect(divergingColor(1)).toBe('rgb(178,24,43)');
    expect(divergingColor(5)).toBe('rgb(178,24,43)');
  });
});
