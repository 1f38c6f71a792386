// Wire protocol and trace schema shared with the simulation server.
// Snapshots are JSON text frames mirroring the server's trace rows; the CSV
// export must use exactly the server's column order.

export const TRACE_COLUMNS = [
  'time',
  'station',
  'lateral_position',
  'lateral_velocity',
  'heading',
  'wheel_angle',
  'wheel_rate',
  'contact_torque',
  'das_torque',
  'muscle_torque',
  'sat_torque',
  'power_contact',
  'power_das',
  'power_muscle',
  'work_contact',
  'work_das',
  'work_muscle',
  'status',
  'gain',
  'target_lane_center',
  'driver_target_lane',
  'tlc',
  'ov_gaps',
] as const;

export type TraceColumn = (typeof TRACE_COLUMNS)[number];

export interface Snapshot {
  time: number;
  station: number;
  lateral_position: number;
  lateral_velocity: number;
  heading: number;
  wheel_angle: number;
  wheel_rate: number;
  contact_torque: number;
  das_torque: number;
  muscle_torque: number;
  sat_torque: number;
  power_contact: number;
  power_das: number;
  power_muscle: number;
  work_contact: number;
  work_das: number;
  work_muscle: number;
  status: string;
  gain: number;
  target_lane_center: number;
  driver_target_lane: number;
  tlc: number; // +Infinity arrives as null on the wire
  ov_gaps: string;
}

const NUMERIC_COLUMNS = TRACE_COLUMNS.filter(
  (c) => c !== 'status' && c !== 'ov_gaps',
);

/** Parse one incoming message; returns null for anything malformed. */
export function parseSnapshot(text: string): Snapshot | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof raw !== 'object' || raw === null) return null;
  const obj = raw as Record<string, unknown>;
  if (obj.type !== 'snapshot') return null;
  const out: Record<string, number | string> = {};
  for (const col of NUMERIC_COLUMNS) {
    const v = obj[col];
    if (v === null) {
      out[col] = Infinity; // the server nulls non-finite floats
    } else if (typeof v === 'number') {
      out[col] = v;
    } else {
      return null;
    }
  }
  if (typeof obj.status !== 'string') return null;
  out.status = obj.status;
  out.ov_gaps = typeof obj.ov_gaps === 'string' ? obj.ov_gaps : '';
  return out as unknown as Snapshot;
}

export function commandMessage(torque: number): string {
  return JSON.stringify({ type: 'command', torque });
}

function cell(value: number | string): string {
  if (typeof value === 'string') return value;
  if (value === Infinity) return 'inf';
  if (value === -Infinity) return '-inf';
  if (Object.is(value, -0)) return '-0'; // String(-0) would drop the sign
  return String(value);
}

/** CSV in the exact server trace column order, header included. */
export function exportCsv(snapshots: readonly Snapshot[]): string {
  const lines = [TRACE_COLUMNS.join(',')];
  for (const snap of snapshots) {
    lines.push(TRACE_COLUMNS.map((col) => cell(snap[col])).join(','));
  }
  return lines.join('\n') + '\n';
}
