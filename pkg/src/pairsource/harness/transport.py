"""In-process and TCP transports, plus the client-side server handle.

Both transports move encoded frames, so a scenario exercises the same bytes
whichever one carries them.
"""

from __future__ import annotations

import socket
import socketserver
import struct
import threading

from ..bpsm import PairQuery, PairResponse
from ..curve import ECPoint
from ..errors import ComputationFailed, ProtocolError, TransportError
from ..pairing import PairingParams
from ..sm import SMQueryU1, SMQueryU2
from . import wire
from .server import ServerLogic
from .wire import ErrorCode, Kind, WireMessage

_registry: dict[str, ServerLogic] = {}
_registry_lock = threading.Lock()


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise TransportError("connection closed")
        buf += chunk
    return bytes(buf)


def read_frame(sock: socket.socket) -> bytes:
    head = _recv_exact(sock, 4)
    (n,) = struct.unpack(">I", head)
    if n > wire.MAX_FRAME:
        raise ProtocolError(f"frame of {n} bytes exceeds limit")
    return head + _recv_exact(sock, n)


# -- connections


class InProcessConnection:
    def __init__(self, key: str):
        with _registry_lock:
            if key not in _registry:
                raise TransportError(f"no in-process server registered as {key!r}")
            self._server = _registry[key]

    def request_frame(self, frame: bytes) -> bytes:
        return self._server.handle_frame(frame)

    def close(self) -> None:
        pass


class TCPConnection:
    def __init__(self, host: str, port: int, timeout: float = 30.0):
        try:
            self._sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise TransportError(f"cannot reach {host}:{port}: {exc}") from None
        self._sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)

    def request_frame(self, frame: bytes) -> bytes:
        try:
            self._sock.sendall(frame)
            return read_frame(self._sock)
        except OSError as exc:
            raise TransportError(str(exc)) from None

    def close(self) -> None:
        self._sock.close()


class FlakyConnection:
    """Fault injection: the ``drop_at``-th request (0-based) is lost."""

    def __init__(self, inner, drop_at: int):
        self._inner = inner
        self._drop_at = drop_at
        self._count = 0

    def request_frame(self, frame: bytes) -> bytes:
        n = self._count
        self._count += 1
        if n == self._drop_at:
            raise TransportError("message dropped")
        return self._inner.request_frame(frame)

    def close(self) -> None:
        self._inner.close()


def connect(endpoint: str):
    """``inproc:<key>`` or ``host:port``."""
    if endpoint.startswith("inproc:"):
        return InProcessConnection(endpoint[len("inproc:"):])
    host, sep, port = endpoint.rpartition(":")
    if not sep or not port.isdigit():
        raise TransportError(f"bad endpoint {endpoint!r}")
    return TCPConnection(host or "127.0.0.1", int(port))


# -- servers


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        logic: ServerLogic = self.server.logic  # type: ignore[attr-defined]
        sock = self.request
        while True:
            try:
                frame = read_frame(sock)
            except TransportError:
                return
            except ProtocolError as exc:
                # cannot resynchronize after a bogus length; answer and hang up
                sock.sendall(wire.encode(wire.error(b"\x00" * 8, ErrorCode.MALFORMED, str(exc))))
                return
            try:
                sock.sendall(logic.handle_frame(frame))
            except OSError:
                return


class _ThreadingTCPServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True


class RunningServer:
    def __init__(self, endpoint: str, logic: ServerLogic, tcp: _ThreadingTCPServer | None = None):
        self.endpoint = endpoint
        self.logic = logic
        self._tcp = tcp
        self._thread = None
        if tcp is not None:
            self._thread = threading.Thread(target=tcp.serve_forever, daemon=True)
            self._thread.start()

    def shutdown(self) -> None:
        if self._tcp is not None:
            self._tcp.shutdown()
            self._tcp.server_close()
        else:
            with _registry_lock:
                _registry.pop(self.endpoint[len("inproc:"):], None)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.shutdown()


def serve(endpoint: str, logic: ServerLogic) -> RunningServer:
    """Start answering on ``inproc:<key>`` or ``host:port`` (port 0 picks one)."""
    if endpoint.startswith("inproc:"):
        key = endpoint[len("inproc:"):]
        with _registry_lock:
            if key in _registry:
                raise TransportError(f"in-process key {key!r} already bound")
            _registry[key] = logic
        return RunningServer(endpoint, logic)
    host, sep, port = endpoint.rpartition(":")
    if not sep or not port.isdigit():
        raise TransportError(f"bad endpoint {endpoint!r}")
    try:
        tcp = _ThreadingTCPServer((host or "127.0.0.1", int(port)), _Handler)
    except OSError as exc:
        raise TransportError(f"cannot bind {endpoint}: {exc}") from None
    tcp.logic = logic  # type: ignore[attr-defined]
    bound_host, bound_port = tcp.server_address[:2]
    return RunningServer(f"{bound_host}:{bound_port}", logic, tcp)


# -- client handle


class RemoteServer:
    """Client-side view of one server: typed calls over a connection."""

    def __init__(self, conn, params: PairingParams, tag_source=None):
        self.conn = conn
        self.params = params
        self._tags = tag_source
        self._n = 0

    def _tag(self) -> bytes:
        if self._tags is not None:
            return self._tags.getrandbits(64).to_bytes(8, "big")
        self._n += 1
        return self._n.to_bytes(8, "big")

    def _call(self, msg: WireMessage, expect: Kind) -> WireMessage:
        reply_frame = self.conn.request_frame(wire.encode(msg))
        reply = wire.decode(reply_frame)
        if reply.kind is Kind.ERROR:
            code, text = wire.parse_error(reply)
            if code == ErrorCode.COMPUTATION_FAILED:
                raise ComputationFailed(text)
            raise ProtocolError(f"server error {code}: {text}")
        if reply.kind is not expect:
            raise ProtocolError(f"expected {expect.name}, got {reply.kind.name}")
        if reply.tag != msg.tag:
            raise ProtocolError("correlation tag mismatch")
        return reply

    def sm_u1(self, q: SMQueryU1) -> tuple[ECPoint, ECPoint]:
        reply = self._call(wire.sm_q1(self._tag(), q), Kind.SM_RESP)
        q1, q3 = wire.parse_sm_resp(reply, 2)
        return q1, q3

    def sm_u2(self, q: SMQueryU2) -> ECPoint:
        reply = self._call(wire.sm_q2(self._tag(), q), Kind.SM_RESP)
        (q2,) = wire.parse_sm_resp(reply, 1)
        return q2

    def pair(self, q: PairQuery) -> PairResponse:
        reply = self._call(wire.pair_q(q, self.params.p, self.params.r), Kind.PAIR_RESP)
        return wire.parse_pair_resp(reply, self.params.p)

    def close(self) -> None:
        self.conn.close()
