"""Binary wire format.

Frame::

    u32 length | u8 version | u8 kind | 8-byte tag | field*

Every field is ``u32 length | bytes``; integers are big-endian unsigned
magnitudes (zero is the empty field). A point is a one-byte flag field
(0 = infinity, 1 = affine) followed, when affine, by x and y fields.
All lengths are big-endian.
"""

from __future__ import annotations

import dataclasses
import enum
import struct

from ..algebra import Fp2Element
from ..bpsm import PairQuery, PairResponse
from ..curve import INFINITY, ECPoint, Point
from ..errors import ProtocolError
from ..sm import SMQueryU1, SMQueryU2

VERSION = 1
HEADER = struct.Struct(">I")
MAX_FRAME = 1 << 20


class Kind(enum.IntEnum):
    SM_Q1 = 1
    SM_Q2 = 2
    SM_RESP = 3
    PAIR_Q = 4
    PAIR_RESP = 5
    ERROR = 6


class ErrorCode(enum.IntEnum):
    MALFORMED = 1
    COMPUTATION_FAILED = 2
    UNSUPPORTED = 3


@dataclasses.dataclass(frozen=True)
class WireMessage:
    kind: Kind
    tag: bytes
    fields: tuple[bytes, ...] = ()
    version: int = VERSION

    def __post_init__(self):
        if len(self.tag) != 8:
            raise ProtocolError("tag must be 8 bytes")


def int_bytes(v: int) -> bytes:
    if v < 0:
        raise ProtocolError("negative integers are not encodable")
    return v.to_bytes((v.bit_length() + 7) // 8, "big")


def encode(msg: WireMessage) -> bytes:
    body = bytearray()
    body += bytes((msg.version, int(msg.kind)))
    body += msg.tag
    for f in msg.fields:
        body += HEADER.pack(len(f))
        body += f
    return HEADER.pack(len(body)) + bytes(body)


def decode_body(body: bytes) -> WireMessage:
    if len(body) < 10:
        raise ProtocolError("frame too short")
    version, kind = body[0], body[1]
    if version != VERSION:
        raise ProtocolError(f"unsupported version {version}")
    try:
        kind = Kind(kind)
    except ValueError:
        raise ProtocolError(f"unknown message kind {kind}") from None
    tag = bytes(body[2:10])
    fields = []
    pos = 10
    while pos < len(body):
        if pos + 4 > len(body):
            raise ProtocolError("truncated field header")
        (n,) = HEADER.unpack_from(body, pos)
        pos += 4
        if pos + n > len(body):
            raise ProtocolError("truncated field")
        fields.append(bytes(body[pos : pos + n]))
        pos += n
    return WireMessage(kind, tag, tuple(fields), version)


def decode(frame: bytes) -> WireMessage:
    if len(frame) < 4:
        raise ProtocolError("missing length prefix")
    (n,) = HEADER.unpack_from(frame, 0)
    if n != len(frame) - 4:
        raise ProtocolError("length prefix does not match body")
    return decode_body(frame[4:])


# -- field-level helpers


def point_fields(P: ECPoint) -> list[bytes]:
    if P is INFINITY:
        return [b"\x00"]
    return [b"\x01", int_bytes(P.x), int_bytes(P.y)]


class FieldReader:
    def __init__(self, fields: tuple[bytes, ...]):
        self._fields = fields
        self._pos = 0

    def _next(self) -> bytes:
        if self._pos >= len(self._fields):
            raise ProtocolError("missing field")
        f = self._fields[self._pos]
        self._pos += 1
        return f

    def int(self) -> int:
        return int.from_bytes(self._next(), "big")

    def point(self) -> ECPoint:
        flag = self._next()
        if flag == b"\x00":
            return INFINITY
        if flag != b"\x01":
            raise ProtocolError("bad point flag")
        return Point(self.int(), self.int())

    def text(self) -> str:
        return self._next().decode("utf-8", "replace")

    def remaining(self) -> int:
        return len(self._fields) - self._pos

    def done(self) -> None:
        if self.remaining():
            raise ProtocolError("trailing fields")


# -- typed payloads


def sm_q1(tag: bytes, q: SMQueryU1) -> WireMessage:
    fields = [int_bytes(q.n), int_bytes(q.a), int_bytes(q.b), *point_fields(q.point),
              int_bytes(q.c1), int_bytes(q.r1), int_bytes(q.r2)]
    return WireMessage(Kind.SM_Q1, tag, tuple(fields))


def sm_q2(tag: bytes, q: SMQueryU2) -> WireMessage:
    fields = [int_bytes(q.n), int_bytes(q.a), int_bytes(q.b), *point_fields(q.point),
              int_bytes(q.c2)]
    return WireMessage(Kind.SM_Q2, tag, tuple(fields))


def parse_sm_q1(msg: WireMessage) -> SMQueryU1:
    rd = FieldReader(msg.fields)
    n, a, b = rd.int(), rd.int(), rd.int()
    P = rd.point()
    c1, r1, r2 = rd.int(), rd.int(), rd.int()
    rd.done()
    _check_sm(n, a, b, P)
    return SMQueryU1(P, c1, r1, r2, a, b, n)


def parse_sm_q2(msg: WireMessage) -> SMQueryU2:
    rd = FieldReader(msg.fields)
    n, a, b = rd.int(), rd.int(), rd.int()
    P = rd.point()
    c2 = rd.int()
    rd.done()
    _check_sm(n, a, b, P)
    return SMQueryU2(P, c2, a, b, n)


def _check_sm(n, a, b, P) -> None:
    if n < 2 or a >= n or b >= n:
        raise ProtocolError("residues out of range")
    if P is INFINITY or P.x >= n or P.y >= n:
        raise ProtocolError("blinded point must be affine and reduced")


def sm_resp(tag: bytes, points: list[ECPoint]) -> WireMessage:
    fields = []
    for P in points:
        fields.extend(point_fields(P))
    return WireMessage(Kind.SM_RESP, tag, tuple(fields))


def parse_sm_resp(msg: WireMessage, count: int) -> list[ECPoint]:
    rd = FieldReader(msg.fields)
    points = [rd.point() for _ in range(count)]
    rd.done()
    return points


def pair_q(q: PairQuery, p: int, r: int, a: int = 1, b: int = 0) -> WireMessage:
    fields = [int_bytes(p), int_bytes(a), int_bytes(b), int_bytes(r),
              *point_fields(q.left), *point_fields(q.right)]
    return WireMessage(Kind.PAIR_Q, q.tag, tuple(fields))


def parse_pair_q(msg: WireMessage) -> tuple[PairQuery, int, int, int, int]:
    rd = FieldReader(msg.fields)
    p, a, b, r = rd.int(), rd.int(), rd.int(), rd.int()
    left, right = rd.point(), rd.point()
    rd.done()
    for P in (left, right):
        if P is not INFINITY and (P.x >= p or P.y >= p):
            raise ProtocolError("pairing input not reduced")
    return PairQuery(left, right, msg.tag), p, a, b, r


def pair_resp(resp: PairResponse) -> WireMessage:
    v = resp.value
    return WireMessage(Kind.PAIR_RESP, resp.tag, (int_bytes(v.c0), int_bytes(v.c1)))


def parse_pair_resp(msg: WireMessage, p: int) -> PairResponse:
    rd = FieldReader(msg.fields)
    c0, c1 = rd.int(), rd.int()
    rd.done()
    if c0 >= p or c1 >= p:
        raise ProtocolError("G_T coordinates not reduced")
    return PairResponse(msg.tag, Fp2Element(c0, c1, p))


def error(tag: bytes, code: ErrorCode, text: str) -> WireMessage:
    return WireMessage(Kind.ERROR, tag, (int_bytes(int(code)), text.encode("utf-8")))


def parse_error(msg: WireMessage) -> tuple[int, str]:
    rd = FieldReader(msg.fields)
    return rd.int(), rd.text()
