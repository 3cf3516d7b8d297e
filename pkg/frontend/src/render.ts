/**
 * Figure dispatch. A FigureSpec names the kind, the artifact directories and
 * where the SVG goes; render() validates the combination and returns the
 * document text so callers can write or inspect it.
 */
import { Artifact, loadArtifact } from './artifact';
import { renderAnglePanel } from './figures/anglePanel';
import { renderControlMagnitude } from './figures/controlMagnitude';
import { renderErrVsT } from './figures/errVsT';
import { renderFinalStateRing } from './figures/finalStateRing';
import { renderSpinPanel } from './figures/spinPanel';

export const FIGURE_KINDS = [
  'err-vs-t',
  'spin-panel',
  'control-magnitude',
  'angle-panel',
  'final-state-ring',
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureSpec {
  kind: FigureKind;
  artifactDirs: string[];
  /** Comma-separated 1-based spin indices; empty means every spin. */
  spins?: string;
}

export function render(spec: FigureSpec): string {
  if (!FIGURE_KINDS.includes(spec.kind)) {
    throw new Error(`unknown figure kind ${JSON.stringify(spec.kind)}; valid kinds: ${FIGURE_KINDS.join(', ')}`);
  }
  if (spec.artifactDirs.length === 0) {
    throw new Error('no artifact directory given');
  }
  if (spec.kind !== 'err-vs-t' && spec.artifactDirs.length > 1) {
    throw new Error(`${spec.kind} takes exactly one artifact; only err-vs-t overlays several`);
  }
  const artifacts: Artifact[] = spec.artifactDirs.map(loadArtifact);
  switch (spec.kind) {
    case 'err-vs-t':
      return renderErrVsT(artifacts);
    case 'spin-panel':
      return renderSpinPanel(artifacts[0], spec.spins);
    case 'control-magnitude':
      return renderControlMagnitude(artifacts[0], spec.spins);
    case 'angle-panel':
      return renderAnglePanel(artifacts[0], spec.spins);
    case 'final-state-ring':
      return renderFinalStateRing(artifacts[0], spec.spins);
  }
}
