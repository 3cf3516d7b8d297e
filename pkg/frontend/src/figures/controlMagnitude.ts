/** Panels of the squared control magnitude |u_i(t)|^2 per selected spin. */
import { Artifact } from '../artifact';
import { renderPerSpinSeries } from './timeSeries';

export function renderControlMagnitude(artifact: Artifact, spinSelection?: string): string {
  return renderPerSpinSeries(artifact, {
    documentTitle: 'control magnitude',
    columnFor: (spin) => `unorm2_${spin}`,
    panelTitle: (spin) => `|u_${spin}(t)|^2`,
    yLabel: '|u|^2',
    color: '#2166ac',
    zeroFloor: true,
  }, spinSelection);
}
