/**
 * Loading and validation of run artifact directories.
 *
 * An artifact directory is what `spinctrl run` / `spinctrl validate` writes:
 * manifest.json plus series.csv, midpoint_controls.csv and (for validation
 * runs) err.csv. Only the documented file schemas are consumed here; nothing
 * in this package imports from the simulation code itself.
 */
import { readFileSync } from 'fs';
import { join } from 'path';
import Papa from 'papaparse';

export const MANIFEST_SCHEMA = 'spinctrl-run-v1';

export interface Manifest {
  schema: string;
  scenario: { name: string; n_spins: number; [key: string]: unknown };
  run: { samples: number; tau: number; method: string; master_seed: number; [key: string]: unknown };
  versions: Record<string, string>;
  files: Record<string, string>;
}

/** One parsed CSV: column names in file order plus one number array per column. */
export interface Table {
  columns: string[];
  rows: number;
  col: (name: string) => number[];
}

export interface Artifact {
  dir: string;
  manifest: Manifest;
  series: Table;
  midpointControls: Table;
  err: Table | null;
}

function parseNumericCsv(path: string): Table {
  const text = readFileSync(path, 'utf8');
  const parsed = Papa.parse<Record<string, number>>(text.trim(), {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`${path}: CSV parse error at row ${first.row}: ${first.message}`);
  }
  const columns = parsed.meta.fields ?? [];
  const data = parsed.data;
  const byName = new Map<string, number[]>();
  for (const name of columns) {
    byName.set(name, data.map((row) => {
      const v = row[name];
      // Empty cells are how the writer spells NaN (final-row controls).
      return v === null || v === undefined || (typeof v === 'string' && v === '') ? NaN : Number(v);
    }));
  }
  return {
    columns,
    rows: data.length,
    col: (name: string) => {
      const values = byName.get(name);
      if (!values) throw new Error(`${path}: no column named ${name}`);
      return values;
    },
  };
}

/** Fails with the figure kind and every absent column spelled out. */
export function requireColumns(table: Table, names: string[], context: string): void {
  const missing = names.filter((n) => !table.columns.includes(n));
  if (missing.length > 0) {
    throw new Error(`${context}: missing column(s) ${missing.join(', ')} (have: ${table.columns.join(', ')})`);
  }
}

export function loadArtifact(dir: string): Artifact {
  let raw: string;
  try {
    raw = readFileSync(join(dir, 'manifest.json'), 'utf8');
  } catch (e) {
    throw new Error(`${dir}: not a run artifact directory (cannot read manifest.json)`);
  }
  let manifest: Manifest;
  try {
    manifest = JSON.parse(raw);
  } catch (e) {
    throw new Error(`${dir}/manifest.json is not valid JSON`);
  }
  if (manifest.schema !== MANIFEST_SCHEMA) {
    throw new Error(`${dir}/manifest.json has schema ${JSON.stringify(manifest.schema)}, expected ${MANIFEST_SCHEMA}`);
  }
  const series = parseNumericCsv(join(dir, manifest.files.series ?? 'series.csv'));
  const midpointControls = parseNumericCsv(join(dir, manifest.files.midpoint_controls ?? 'midpoint_controls.csv'));
  const err = manifest.files.err ? parseNumericCsv(join(dir, manifest.files.err)) : null;
  return { dir, manifest, series, midpointControls, err };
}

/** Spin count as recorded by the writer; the m_/u_ column blocks follow it. */
export function spinCount(artifact: Artifact): number {
  return artifact.manifest.scenario.n_spins;
}

/** m_i(t_j) for one spin as [x, y, z] rows, 1-based spin index. */
export function spinPath(artifact: Artifact, spin: number): number[][] {
  const s = artifact.series;
  requireColumns(s, [1, 2, 3].map((l) => `m_${spin}_${l}`), `spin ${spin} state`);
  const xs = s.col(`m_${spin}_1`);
  const ys = s.col(`m_${spin}_2`);
  const zs = s.col(`m_${spin}_3`);
  return xs.map((x, j) => [x, ys[j], zs[j]]);
}

/** u_i(t_j) rows for one spin; the final grid row is NaN by design. */
export function controlPath(artifact: Artifact, spin: number): number[][] {
  const s = artifact.series;
  requireColumns(s, [1, 2, 3].map((l) => `u_${spin}_${l}`), `spin ${spin} control`);
  const xs = s.col(`u_${spin}_1`);
  const ys = s.col(`u_${spin}_2`);
  const zs = s.col(`u_${spin}_3`);
  return xs.map((x, j) => [x, ys[j], zs[j]]);
}

/** Parses "1,3" style selections; defaults to every spin in the artifact. */
export function resolveSpins(artifact: Artifact, selection?: string): number[] {
  const n = spinCount(artifact);
  if (!selection || selection.trim() === '') {
    return Array.from({ length: n }, (_, i) => i + 1);
  }
  const spins = selection.split(',').map((part) => {
    const v = Number(part.trim());
    if (!Number.isInteger(v) || v < 1 || v > n) {
      throw new Error(`spin selection ${JSON.stringify(selection)}: ${part.trim()} is not a spin index in 1..${n}`);
    }
    return v;
  });
  return spins;
}
