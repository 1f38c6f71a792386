// Cockpit entry point: connect to the serve endpoint, stream torque
// commands from keyboard/gamepad, render the dashboard, export the session.

import { Dashboard } from './dashboard.js';
import { TorqueInput } from './input.js';
import { CockpitSession } from './session.js';

const COMMAND_INTERVAL_MS = 25; // >= 30 Hz while steering

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const params = new URLSearchParams(location.search);
const defaultUrl = `ws://${location.hostname || 'localhost'}:8710`;
const url = params.get('server') ?? defaultUrl;

const canvas = el<HTMLCanvasElement>('cockpit');
const exportButton = el<HTMLButtonElement>('export');
const stateBadge = el<HTMLSpanElement>('state');
const serverLabel = el<HTMLSpanElement>('server');

serverLabel.textContent = url;

const session = new CockpitSession(url);
const input = new TorqueInput();
const dashboard = new Dashboard(canvas);

session.onState((state) => {
  stateBadge.textContent = state;
  stateBadge.className = `badge ${state}`;
});

window.addEventListener('keydown', (ev) => {
  if (ev.repeat) return;
  input.keyDown(ev.key);
  if (ev.key.startsWith('Arrow')) ev.preventDefault();
});
window.addEventListener('keyup', (ev) => input.keyUp(ev.key));

function pollGamepad(): void {
  const pads = navigator.getGamepads ? navigator.getGamepads() : [];
  const pad = pads && pads[0];
  input.setGamepadAxis(pad ? pad.axes[0] ?? null : null);
}

let lastFrame = performance.now();
function frame(now: number): void {
  const dt = Math.min(0.1, (now - lastFrame) / 1000);
  lastFrame = now;
  pollGamepad();
  input.update(dt);
  dashboard.draw(
    session.latest,
    session.history(10),
    session.state,
    { malformed: session.malformedCount, stale: session.staleCount },
    input.torque,
  );
  exportButton.disabled = session.snapshotCount === 0;
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);

let wasActive = false;
setInterval(() => {
  if (input.active) {
    session.sendTorque(input.torque);
    wasActive = true;
  } else if (wasActive) {
    session.sendTorque(0); // release the wheel explicitly
    wasActive = false;
  }
}, COMMAND_INTERVAL_MS);

exportButton.addEventListener('click', () => {
  const blob = new Blob([session.exportCsv()], { type: 'text/csv' });
  const link = document.createElement('a');
  link.href = URL.createObjectURL(blob);
  link.download = 'cockpit-session.csv';
  link.click();
  URL.revokeObjectURL(link.href);
});
