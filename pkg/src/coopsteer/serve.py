"""Real-time serve mode: the loop paced at wall clock, driven over WebSocket.

The simulation runs at 100 control steps per second of wall time. Instead of
the synthetic driver's torque it applies the most recent torque command
received from the client, held between control steps and reset to zero on
disconnect. After every control step a snapshot of the trace row is sent to
the connected client.

Wire protocol: standard WebSocket text frames, one JSON object per message.
  server -> client   {"type": "snapshot", ...trace row fields...}
  client -> server   {"type": "command", "torque": <N m>}
Malformed messages are ignored with a logged warning. One client at a time;
a new connection replaces the old one. The recorded trace, not the wire, is
authoritative.

The WebSocket layer below is a deliberately small RFC 6455 subset: text
frames, ping/pong, close, no extensions or TLS. It exists because the
environment provides no WebSocket package; browsers and Node speak to it
directly.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import math
import os
import queue
import socket
import struct
import threading
import time

from coopsteer.config import RunConfig, write_sidecar
from coopsteer.harness import Simulation

log = logging.getLogger(__name__)

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_CONT = 0x0
OP_TEXT = 0x1
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


class WebSocketError(ConnectionError):
    pass


def _read_exact(sock: socket.socket, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise WebSocketError("socket closed mid-frame")
        buf += chunk
    return buf


class WebSocketConnection:
    """One established WebSocket endpoint (either side)."""

    def __init__(self, sock: socket.socket, mask_outgoing: bool):
        self._sock = sock
        self._mask = mask_outgoing
        self._send_lock = threading.Lock()
        self._closed = False

    def send_text(self, payload: str) -> None:
        self._send_frame(OP_TEXT, payload.encode("utf-8"))

    def _send_frame(self, opcode: int, data: bytes) -> None:
        head = bytes([0x80 | opcode])
        n = len(data)
        mask_bit = 0x80 if self._mask else 0x00
        if n < 126:
            head += bytes([mask_bit | n])
        elif n < 1 << 16:
            head += bytes([mask_bit | 126]) + struct.pack(">H", n)
        else:
            head += bytes([mask_bit | 127]) + struct.pack(">Q", n)
        if self._mask:
            key = os.urandom(4)
            data = bytes(b ^ key[i % 4] for i, b in enumerate(data))
            head += key
        with self._send_lock:
            if self._closed:
                raise WebSocketError("connection closed")
            self._sock.sendall(head + data)

    def recv_text(self) -> str | None:
        """Next text message, or None once the peer closes."""
        fragments: list[bytes] = []
        while True:
            first = _read_exact(self._sock, 2)
            fin = bool(first[0] & 0x80)
            opcode = first[0] & 0x0F
            masked = bool(first[1] & 0x80)
            n = first[1] & 0x7F
            if n == 126:
                n = struct.unpack(">H", _read_exact(self._sock, 2))[0]
            elif n == 127:
                n = struct.unpack(">Q", _read_exact(self._sock, 8))[0]
            key = _read_exact(self._sock, 4) if masked else None
            data = _read_exact(self._sock, n) if n else b""
            if key:
                data = bytes(b ^ key[i % 4] for i, b in enumerate(data))
            if opcode == OP_CLOSE:
                try:
                    self._send_frame(OP_CLOSE, b"")
                except OSError:
                    pass
                self.close()
                return None
            if opcode == OP_PING:
                self._send_frame(OP_PONG, data)
                continue
            if opcode == OP_PONG:
                continue
            fragments.append(data)
            if fin:
                return b"".join(fragments).decode("utf-8")

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            self._sock.close()

    @property
    def closed(self) -> bool:
        return self._closed


def accept_websocket(sock: socket.socket) -> WebSocketConnection:
    """Server side: read the HTTP upgrade request and complete the handshake."""
    request = b""
    while b"\r\n\r\n" not in request:
        chunk = sock.recv(4096)
        if not chunk:
            raise WebSocketError("client closed during handshake")
        request += chunk
    headers = {}
    for line in request.split(b"\r\n")[1:]:
        if b":" in line:
            k, v = line.split(b":", 1)
            headers[k.strip().lower()] = v.strip()
    key = headers.get(b"sec-websocket-key")
    if key is None:
        raise WebSocketError("missing Sec-WebSocket-Key")
    accept = base64.b64encode(
        hashlib.sha1(key + _WS_GUID.encode("ascii")).digest()
    ).decode("ascii")
    sock.sendall(
        (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {accept}\r\n\r\n"
        ).encode("ascii")
    )
    return WebSocketConnection(sock, mask_outgoing=False)


def connect_websocket(host: str, port: int, resource: str = "/") -> WebSocketConnection:
    """Client side: open a socket and perform the upgrade handshake."""
    sock = socket.create_connection((host, port), timeout=10.0)
    key = base64.b64encode(os.urandom(16)).decode("ascii")
    sock.sendall(
        (
            f"GET {resource} HTTP/1.1\r\n"
            f"Host: {host}:{port}\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Key: {key}\r\n"
            "Sec-WebSocket-Version: 13\r\n\r\n"
        ).encode("ascii")
    )
    response = b""
    while b"\r\n\r\n" not in response:
        chunk = sock.recv(4096)
        if not chunk:
            raise WebSocketError("server closed during handshake")
        response += chunk
    if b" 101 " not in response.split(b"\r\n", 1)[0]:
        raise WebSocketError(f"handshake rejected: {response[:120]!r}")
    sock.settimeout(None)
    return WebSocketConnection(sock, mask_outgoing=True)


class SimulationServer:
    """Wall-clock-paced simulation publishing snapshots over WebSocket.

    The simulation loop owns all state and runs in one thread; incoming
    commands land on a queue and are applied only at control-step
    boundaries. Snapshots are plain dict copies of the trace rows.
    """

    def __init__(
        self,
        config: RunConfig,
        port: int = 0,
        host: str = "127.0.0.1",
        duration: float | None = None,
        output_path: str | None = None,
    ):
        self.config = config
        self.duration = duration
        self.output_path = output_path
        self.sim = Simulation(config)
        self._commands: queue.Queue[float] = queue.Queue()
        self._client: WebSocketConnection | None = None
        self._client_lock = threading.Lock()
        self._stop = threading.Event()
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self._listener.listen(1)
        self.host, self.port = self._listener.getsockname()
        self._threads: list[threading.Thread] = []
        self.snapshots_sent = 0

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> None:
        accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        sim_thread = threading.Thread(target=self._sim_loop, daemon=True)
        self._threads = [accept_thread, sim_thread]
        accept_thread.start()
        sim_thread.start()

    def run_forever(self) -> None:
        self.start()
        try:
            self._threads[1].join()
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()

    def stop(self) -> None:
        self._stop.set()
        with self._client_lock:
            if self._client is not None:
                self._client.close()
                self._client = None
        try:
            self._listener.close()
        except OSError:
            pass
        for thread in self._threads:
            thread.join(timeout=2.0)
        if self.output_path:
            self.sim.trace.write_csv(self.output_path)
            write_sidecar(self.config, self.output_path)

    # -- network -----------------------------------------------------------

    def _accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                sock, _addr = self._listener.accept()
            except OSError:
                return
            try:
                conn = accept_websocket(sock)
            except (WebSocketError, OSError) as exc:
                log.warning("handshake failed: %s", exc)
                sock.close()
                continue
            with self._client_lock:
                if self._client is not None:
                    self._client.close()
                self._client = conn
            threading.Thread(target=self._reader_loop, args=(conn,), daemon=True).start()

    def _reader_loop(self, conn: WebSocketConnection) -> None:
        while not self._stop.is_set():
            try:
                text = conn.recv_text()
            except (WebSocketError, OSError):
                text = None
            if text is None:
                break
            try:
                message = json.loads(text)
                if message.get("type") != "command":
                    raise ValueError(f"unexpected message type {message.get('type')!r}")
                torque = float(message["torque"])
            except (ValueError, KeyError, TypeError) as exc:
                log.warning("ignoring malformed command: %s", exc)
                continue
            self._commands.put(torque)
        with self._client_lock:
            if self._client is conn:
                self._client = None
                # Disconnected: hold zero torque, keep simulating.
                self._commands.put(0.0)

    # -- simulation --------------------------------------------------------

    def _sim_loop(self) -> None:
        period = self.config.control_period
        torque = 0.0
        start = time.monotonic()
        steps = 0
        while not self._stop.is_set():
            if self.duration is not None and steps * period >= self.duration:
                break
            while True:  # apply the most recent command only
                try:
                    torque = self._commands.get_nowait()
                except queue.Empty:
                    break
            row = self.sim.control_step(external_torque=torque)
            steps += 1
            self._publish(row)
            deadline = start + steps * period
            delay = deadline - time.monotonic()
            if delay > 0:
                time.sleep(delay)

    def _publish(self, row: dict) -> None:
        with self._client_lock:
            conn = self._client
        if conn is None:
            return
        # Strict JSON has no Infinity/NaN; browsers reject them. Null them out
        # on the wire (the recorded trace keeps the exact values).
        message = {
            k: (None if isinstance(v, float) and not math.isfinite(v) else v)
            for k, v in row.items()
        }
        message["type"] = "snapshot"
        try:
            conn.send_text(json.dumps(message))
            self.snapshots_sent += 1
        except (WebSocketError, OSError):
            with self._client_lock:
                if self._client is conn:
                    self._client = None
                    self._commands.put(0.0)
