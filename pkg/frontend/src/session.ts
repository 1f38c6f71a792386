// WebSocket session: subscribes to snapshots, sends torque commands, keeps a
// bounded history for the dashboard and the full stream for CSV export.
// Stale (out-of-order) snapshots are dropped, malformed ones counted.

import { Snapshot, commandMessage, exportCsv, parseSnapshot } from './protocol.js';

// Minimal structural view of a WebSocket so tests can inject the `ws`
// package or a fake; matches the browser API subset we use.
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface SessionOptions {
  socketFactory?: SocketFactory;
  maxBuffer?: number; // bounded snapshot buffer, drop-oldest
  retryDelayMs?: number; // auto-reconnect delay
}

export type SessionState = 'connecting' | 'connected' | 'disconnected' | 'closed';

export class CockpitSession {
  readonly url: string;
  state: SessionState = 'connecting';
  latest: Snapshot | null = null;
  malformedCount = 0;
  staleCount = 0;

  private readonly factory: SocketFactory;
  private readonly maxBuffer: number;
  private readonly retryDelayMs: number;
  private readonly buffer: Snapshot[] = [];
  private socket: SocketLike | null = null;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;
  private listeners: Array<(snap: Snapshot) => void> = [];
  private stateListeners: Array<(state: SessionState) => void> = [];

  constructor(url: string, options: SessionOptions = {}) {
    this.url = url;
    const globalWs = (globalThis as { WebSocket?: unknown }).WebSocket;
    this.factory =
      options.socketFactory ??
      ((u: string) => new (globalWs as new (url: string) => SocketLike)(u));
    this.maxBuffer = options.maxBuffer ?? 120000; // 20 min at 100 Hz
    this.retryDelayMs = options.retryDelayMs ?? 1000;
    this.open();
  }

  onSnapshot(listener: (snap: Snapshot) => void): void {
    this.listeners.push(listener);
  }

  onState(listener: (state: SessionState) => void): void {
    this.stateListeners.push(listener);
  }

  sendTorque(torque: number): void {
    if (this.state === 'connected' && this.socket) {
      try {
        this.socket.send(commandMessage(torque));
      } catch {
        // socket died between state checks; the close handler will retry
      }
    }
  }

  get snapshots(): readonly Snapshot[] {
    return this.buffer;
  }

  get snapshotCount(): number {
    return this.buffer.length;
  }

  /** Received snapshots as CSV in the server trace column order. */
  exportCsv(): string {
    return exportCsv(this.buffer);
  }

  /** Snapshots newer than (latest time - seconds), for scrolling plots. */
  history(seconds: number): readonly Snapshot[] {
    if (!this.latest) return [];
    const cutoff = this.latest.time - seconds;
    let start = this.buffer.length;
    while (start > 0 && this.buffer[start - 1].time >= cutoff) start -= 1;
    return this.buffer.slice(start);
  }

  close(): void {
    this.setState('closed');
    if (this.retryTimer !== null) clearTimeout(this.retryTimer);
    this.socket?.close();
    this.socket = null;
  }

  private open(): void {
    if (this.state === 'closed') return;
    this.setState('connecting');
    let socket: SocketLike;
    try {
      socket = this.factory(this.url);
    } catch {
      this.scheduleRetry();
      return;
    }
    this.socket = socket;
    socket.onopen = () => this.setState('connected');
    socket.onmessage = (ev) => this.receive(String(ev.data));
    socket.onerror = () => {};
    socket.onclose = () => {
      if (this.state !== 'closed') {
        this.setState('disconnected');
        this.scheduleRetry();
      }
    };
  }

  private scheduleRetry(): void {
    if (this.retryTimer !== null) clearTimeout(this.retryTimer);
    this.retryTimer = setTimeout(() => {
      this.retryTimer = null;
      this.open();
    }, this.retryDelayMs);
  }

  private receive(text: string): void {
    const snap = parseSnapshot(text);
    if (snap === null) {
      this.malformedCount += 1;
      return;
    }
    if (this.latest && snap.time <= this.latest.time) {
      this.staleCount += 1;
      return;
    }
    this.latest = snap;
    this.buffer.push(snap);
    if (this.buffer.length > this.maxBuffer) {
      this.buffer.splice(0, this.buffer.length - this.maxBuffer);
    }
    for (const listener of this.listeners) listener(snap);
  }

  private setState(state: SessionState): void {
    if (this.state === state) return;
    this.state = state;
    for (const listener of this.stateListeners) listener(state);
  }
}
