import { mkdtempSync, writeFileSync, cpSync, rmSync } from 'fs';
import { tmpdir } from 'os';
import { join } from 'path';
import { describe, expect, it } from 'vitest';
import { loadArtifact, requireColumns, resolveSpins, spinCount, spinPath, controlPath } from '../src/artifact';

const FIXTURES = join(__dirname, 'fixtures');
const SPIN3 = join(FIXTURES, 'spin3-smoke');

describe('loadArtifact', () => {
  it('reads manifest, series, controls and optional err table', () => {
    const artifact = loadArtifact(SPIN3);
    expect(artifact.manifest.scenario.name).toBe('spin3');
    expect(spinCount(artifact)).toBe(3);
    expect(artifact.err).toBeNull();
    expect(artifact.series.col('t')[0]).toBe(0);
    // tau 0.05 on horizon 0.5 gives 11 grid rows.
    expect(artifact.series.rows).toBe(11);
    expect(artifact.midpointControls.rows).toBe(10);
  });

  it('validation artifacts carry the error table', () => {
    const artifact = loadArtifact(join(FIXTURES, 'validate-m400'));
    expect(artifact.err).not.toBeNull();
    expect(artifact.err!.col('err')[0]).toBe(0);
    expect(artifact.err!.rows).toBe(6);
  });

  it('final series row has state but no control', () => {
    const artifact = loadArtifact(SPIN3);
    const states = spinPath(artifact, 2);
    const controls = controlPath(artifact, 2);
    const last = states.length - 1;
    expect(Math.hypot(...(states[last] as [number, number, number]))).toBeCloseTo(1, 10);
    expect(controls[last].every(Number.isNaN)).toBe(true);
    expect(controls[last - 1].every(Number.isFinite)).toBe(true);
  });

  it('rejects a directory without a manifest', () => {
    expect(() => loadArtifact(tmpdir())).toThrow(/cannot read manifest.json/);
  });

  it('rejects a manifest with a foreign schema', () => {
    const dir = mkdtempSync(join(tmpdir(), 'figtest-'));
    try {
      cpSync(SPIN3, dir, { recursive: true });
      writeFileSync(join(dir, 'manifest.json'), JSON.stringify({ schema: 'other-v9' }));
      expect(() => loadArtifact(dir)).toThrow(/schema "other-v9"/);
    } finally {
      rmSync(dir, { recursive: true, force: true });
    }
  });
});

describe('column and spin validation', () => {
  it('requireColumns names every missing column', () => {
    const artifact = loadArtifact(SPIN3);
    expect(() => requireColumns(artifact.series, ['t', 'nope_1', 'nope_2'], 'test figure'))
      .toThrow(/test figure: missing column\(s\) nope_1, nope_2/);
  });

  it('resolveSpins defaults to all and rejects out-of-range picks', () => {
    const artifact = loadArtifact(SPIN3);
    expect(resolveSpins(artifact)).toEqual([1, 2, 3]);
    expect(resolveSpins(artifact, '2')).toEqual([2]);
    expect(resolveSpins(artifact, '1,3')).toEqual([1, 3]);
    expect(() => resolveSpins(artifact, '4')).toThrow(/not a spin index in 1..3/);
    expect(() => resolveSpins(artifact, 'a')).toThrow(/not a spin index/);
  });
});
