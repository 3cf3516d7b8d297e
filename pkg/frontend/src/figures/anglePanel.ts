/**
 * Panels of the normalized alignment |<m_i, u_i>| / (|m_i| |u_i|) over time,
 * the diagnostic that the feedback control stays tangential (values sit at
 * rounding level when it does).
 */
import { Artifact } from '../artifact';
import { renderPerSpinSeries } from './timeSeries';

export function renderAnglePanel(artifact: Artifact, spinSelection?: string): string {
  return renderPerSpinSeries(artifact, {
    documentTitle: 'state-control alignment',
    columnFor: (spin) => `angle_${spin}`,
    panelTitle: (spin) => `angle(m_${spin}, u_${spin})`,
    yLabel: '|<m,u>| / (|m||u|)',
    color: '#27813c',
    zeroFloor: true,
  }, spinSelection);
}
