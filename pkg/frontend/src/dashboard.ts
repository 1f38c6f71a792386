// Canvas dashboard: top-down road strip, live gauges and 10 s scrolling
// history for torques and gain. Renders received snapshots only; never
// mutates them and holds no simulation logic.

import { Snapshot } from './protocol.js';
import { SessionState } from './session.js';

const LANE_WIDTH = 3.0;
const ROAD_MIN = -1.5; // left road edge
const ROAD_MAX = 4.5; // right road edge
const VIEW_AHEAD = 90; // metres of road drawn ahead of the host
const VIEW_BEHIND = 40;

export const STATUS_COLORS: Record<string, string> = {
  I: '#2e9e5b',
  II: '#d64545',
  'III-a': '#d69a2e',
  'III-b': '#b9742a',
  IV: '#8a8a9a',
};

export interface Diagnostics {
  malformed: number;
  stale: number;
}

export class Dashboard {
  private readonly ctx: CanvasRenderingContext2D;

  constructor(private readonly canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext('2d');
    if (!ctx) throw new Error('canvas 2d context unavailable');
    this.ctx = ctx;
  }

  draw(
    latest: Snapshot | null,
    history: readonly Snapshot[],
    state: SessionState,
    diagnostics: Diagnostics,
    commandedTorque: number,
  ): void {
    const { ctx, canvas } = this;
    const w = canvas.width;
    const h = canvas.height;
    ctx.clearRect(0, 0, w, h);
    ctx.fillStyle = '#14151c';
    ctx.fillRect(0, 0, w, h);

    const roadH = Math.floor(h * 0.3);
    this.drawRoad(latest, 0, 0, w, roadH);
    this.drawGauges(latest, commandedTorque, 0, roadH + 8, w, Math.floor(h * 0.24));
    const plotsTop = roadH + Math.floor(h * 0.24) + 16;
    this.drawHistory(history, 0, plotsTop, w, h - plotsTop - 18, diagnostics);

    if (state !== 'connected') {
      ctx.fillStyle = 'rgba(20, 21, 28, 0.72)';
      ctx.fillRect(0, 0, w, h);
      ctx.fillStyle = '#e8e8ee';
      ctx.font = 'bold 26px system-ui, sans-serif';
      ctx.textAlign = 'center';
      ctx.fillText(state === 'connecting' ? 'connecting…' : 'disconnected', w / 2, h / 2);
      ctx.font = '14px system-ui, sans-serif';
      ctx.fillText('retrying automatically; display frozen', w / 2, h / 2 + 26);
      ctx.textAlign = 'left';
    }
  }

  private roadY(y: number, top: number, height: number): number {
    // lateral position (+right) maps downward across the strip
    return top + ((y - ROAD_MIN) / (ROAD_MAX - ROAD_MIN)) * height;
  }

  private drawRoad(snap: Snapshot | null, x: number, top: number, w: number, h: number): void {
    const { ctx } = this;
    ctx.fillStyle = '#2b2d39';
    ctx.fillRect(x, top, w, h);

    const laneMarkY = this.roadY(LANE_WIDTH / 2, top, h);
    ctx.strokeStyle = '#d8d8dc';
    ctx.setLineDash([14, 12]);
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(x, laneMarkY);
    ctx.lineTo(x + w, laneMarkY);
    ctx.stroke();
    ctx.setLineDash([]);
    for (const edge of [ROAD_MIN + 0.02, ROAD_MAX - 0.02]) {
      const yPix = this.roadY(edge, top, h);
      ctx.beginPath();
      ctx.moveTo(x, yPix);
      ctx.lineTo(x + w, yPix);
      ctx.stroke();
    }
    if (!snap) return;

    // target-lane highlight
    const targetTop = this.roadY(snap.target_lane_center - LANE_WIDTH / 2, top, h);
    const targetBot = this.roadY(snap.target_lane_center + LANE_WIDTH / 2, top, h);
    ctx.fillStyle = 'rgba(80, 150, 240, 0.16)';
    ctx.fillRect(x, targetTop, w, targetBot - targetTop);

    const hostX = x + (VIEW_BEHIND / (VIEW_AHEAD + VIEW_BEHIND)) * w;
    const metre = w / (VIEW_AHEAD + VIEW_BEHIND);

    // other vehicles (left lane traffic), from the gap list
    ctx.fillStyle = '#c3c766';
    for (const token of snap.ov_gaps.split(';')) {
      if (!token) continue;
      const gap = Number(token);
      if (!Number.isFinite(gap)) continue;
      const ovX = hostX + gap * metre;
      if (ovX < x - 12 || ovX > x + w + 12) continue;
      const ovY = this.roadY(0.0, top, h);
      ctx.fillRect(ovX - 9, ovY - 5, 18, 10);
    }

    // host vehicle, heading-tinted wedge
    const hostY = this.roadY(snap.lateral_position, top, h);
    ctx.save();
    ctx.translate(hostX, hostY);
    ctx.rotate(snap.heading);
    ctx.fillStyle = '#5aa2e8';
    ctx.fillRect(-10, -6, 20, 12);
    ctx.fillStyle = '#dbe9f8';
    ctx.fillRect(4, -6, 6, 12);
    ctx.restore();
  }

  private drawGauges(
    snap: Snapshot | null,
    commandedTorque: number,
    x: number,
    top: number,
    w: number,
    h: number,
  ): void {
    const { ctx } = this;
    const cols = 8;
    const cellW = w / cols;
    const entries: Array<[string, string, string | null]> = snap
      ? [
          ['status', snap.status, STATUS_COLORS[snap.status] ?? '#8a8a9a'],
          ['gain K', snap.gain.toFixed(3), null],
          ['τ driver', `${snap.contact_torque.toFixed(2)} N·m`, null],
          ['τ assist', `${snap.das_torque.toFixed(2)} N·m`, null],
          ['w driver', snap.work_contact.toFixed(3), null],
          ['w assist', snap.work_das.toFixed(3), null],
          ['TLC', Number.isFinite(snap.tlc) ? `${snap.tlc.toFixed(2)} s` : '—', null],
          ['command', `${commandedTorque.toFixed(2)} N·m`, null],
        ]
      : [['status', '—', null]];
    ctx.font = '12px system-ui, sans-serif';
    entries.forEach(([label, value, color], i) => {
      const cx = x + i * cellW + 10;
      ctx.fillStyle = '#9aa0ad';
      ctx.fillText(label, cx, top + 16);
      ctx.fillStyle = color ?? '#e8e8ee';
      ctx.font = 'bold 17px system-ui, sans-serif';
      ctx.fillText(value, cx, top + 40);
      ctx.font = '12px system-ui, sans-serif';
    });
    if (!snap) return;

    // gain bar with the intent-detection tick
    const barTop = top + 54;
    const barW = w - 24;
    ctx.fillStyle = '#2b2d39';
    ctx.fillRect(x + 12, barTop, barW, 10);
    ctx.fillStyle = '#5aa2e8';
    ctx.fillRect(x + 12, barTop, barW * Math.min(1, snap.gain / 0.5), 10);
    const tick = x + 12 + barW * (0.15 / 0.5);
    ctx.fillStyle = '#d64545';
    ctx.fillRect(tick - 1, barTop - 3, 2, 16);
  }

  private drawHistory(
    history: readonly Snapshot[],
    x: number,
    top: number,
    w: number,
    h: number,
    diagnostics: Diagnostics,
  ): void {
    const { ctx } = this;
    const plotH = (h - 14) / 2;
    this.linePlot(history, x, top, w, plotH, 'torques (N·m)', [
      ['contact_torque', '#e0b341'],
      ['das_torque', '#5aa2e8'],
    ]);
    this.linePlot(history, x, top + plotH + 14, w, plotH, 'gain', [['gain', '#7cc77c']]);
    ctx.fillStyle = '#9aa0ad';
    ctx.font = '11px system-ui, sans-serif';
    ctx.fillText(
      `dropped: ${diagnostics.malformed} malformed, ${diagnostics.stale} stale`,
      x + 10,
      top + h + 12,
    );
  }

  private linePlot(
    history: readonly Snapshot[],
    x: number,
    top: number,
    w: number,
    h: number,
    label: string,
    channels: Array<[keyof Snapshot, string]>,
  ): void {
    const { ctx } = this;
    ctx.fillStyle = '#1b1d26';
    ctx.fillRect(x + 8, top, w - 16, h);
    ctx.fillStyle = '#9aa0ad';
    ctx.font = '11px system-ui, sans-serif';
    ctx.fillText(label, x + 14, top + 13);
    if (history.length < 2) return;

    const t0 = history[0].time;
    const t1 = history[history.length - 1].time;
    if (t1 <= t0) return;
    let lo = Infinity;
    let hi = -Infinity;
    for (const snap of history) {
      for (const [key] of channels) {
        const v = snap[key] as number;
        if (Number.isFinite(v)) {
          lo = Math.min(lo, v);
          hi = Math.max(hi, v);
        }
      }
    }
    if (!Number.isFinite(lo) || hi - lo < 1e-6) {
      lo -= 0.5;
      hi += 0.5;
    }
    const pad = 0.08 * (hi - lo);
    lo -= pad;
    hi += pad;

    for (const [key, color] of channels) {
      ctx.strokeStyle = color;
      ctx.lineWidth = 1.4;
      ctx.beginPath();
      let started = false;
      for (const snap of history) {
        const v = snap[key] as number;
        if (!Number.isFinite(v)) continue;
        const px = x + 8 + ((snap.time - t0) / (t1 - t0)) * (w - 16);
        const py = top + h - ((v - lo) / (hi - lo)) * (h - 18) - 2;
        if (started) ctx.lineTo(px, py);
        else {
          ctx.moveTo(px, py);
          started = true;
        }
      }
      ctx.stroke();
    }
  }
}
