"""Server logic: honest evaluation plus the scripted misbehaviors."""

from __future__ import annotations

import dataclasses
import random
import threading

from .. import opcount
from ..algebra import Fp2Element
from ..bpsm import PairResponse, bpsm_server_pair
from ..curve import INFINITY, CurveParams, ECPoint, Point, is_on_curve, scalar_multi
from ..errors import ComputationFailed, NotInvertible, ProtocolError
from ..pairing import PairingParams
from ..sm import sm_server_u1, sm_server_u2
from . import wire
from .wire import ErrorCode, Kind, WireMessage

BEHAVIORS = ("honest", "random", "bitflip", "identity", "scale", "lazy")
BITFLIP_POLICIES = ("random", "low", "high")
SCOPES = ("all", "sm", "pairing")


@dataclasses.dataclass(frozen=True)
class ServerBehavior:
    """How a server answers.

    ``scale`` multiplies returned points by ``unit`` (over Z_N) and returned
    G_T values by ``unit + i``. With ``guess_bits`` set it becomes the
    scale-consistent cheater: within each pair of pairing queries the first
    answer is scaled by u and the second by u**g for a guessed check exponent
    g in [2, 2**guess_bits).

    ``scope`` limits the misbehavior to the SM stage or the pairing stage; the
    server is honest elsewhere.
    """

    kind: str = "honest"
    policy: str = "random"
    unit: int = 2
    guess_bits: int | None = None
    scope: str = "all"

    def __post_init__(self):
        if self.kind not in BEHAVIORS:
            raise ValueError(f"unknown behavior {self.kind!r}")
        if self.policy not in BITFLIP_POLICIES:
            raise ValueError(f"unknown bit-flip policy {self.policy!r}")
        if self.scope not in SCOPES:
            raise ValueError(f"unknown scope {self.scope!r}")

    @property
    def honest(self) -> bool:
        return self.kind == "honest"

    def active_in(self, stage: str) -> bool:
        return not self.honest and self.scope in ("all", stage)

    @classmethod
    def parse(cls, text: str) -> "ServerBehavior":
        """``honest``, ``random``, ``bitflip[:random|low|high]``, ``identity``,
        ``scale[:unit]``, ``scale-consistent[:bits]``, ``lazy``; any of them
        optionally suffixed with ``@sm`` or ``@pairing``."""
        text, _, scope = text.strip().lower().partition("@")
        scope = scope or "all"
        name, _, arg = text.partition(":")
        if name == "bitflip":
            return cls("bitflip", policy=arg or "random", scope=scope)
        if name == "scale":
            return cls("scale", unit=int(arg) if arg else 2, scope=scope)
        if name == "scale-consistent":
            return cls("scale", guess_bits=int(arg) if arg else 16, scope=scope)
        if arg:
            raise ValueError(f"behavior {name!r} takes no argument")
        return cls(name, scope=scope)

    def label(self) -> str:
        if self.kind == "bitflip":
            base = f"bitflip:{self.policy}"
        elif self.kind == "scale":
            if self.guess_bits is not None:
                base = f"scale-consistent:{self.guess_bits}"
            else:
                base = f"scale:{self.unit}"
        else:
            base = self.kind
        return base if self.scope == "all" else f"{base}@{self.scope}"


class ServerLogic:
    """Answers wire messages for one server identity."""

    def __init__(self, params: PairingParams, behavior: ServerBehavior | None = None,
                 rng: random.Random | None = None, name: str = "server"):
        self.params = params
        self.behavior = behavior or ServerBehavior()
        self.rng = rng or random.Random()
        self.name = name
        self.counts = opcount.OpCounts()
        self._lock = threading.Lock()
        self._stale: dict[Kind, object] = {}
        self._pending_scale: Fp2Element | None = None

    # -- framing

    def handle_frame(self, frame: bytes) -> bytes:
        try:
            msg = wire.decode(frame)
        except ProtocolError as exc:
            return wire.encode(wire.error(b"\x00" * 8, ErrorCode.MALFORMED, str(exc)))
        return wire.encode(self.handle(msg))

    def handle(self, msg: WireMessage) -> WireMessage:
        # a single server serializes its own requests; the rng and lazy cache are shared
        with self._lock, opcount.counting(self.counts):
            try:
                if msg.kind is Kind.SM_Q1:
                    return self._sm_u1(msg)
                if msg.kind is Kind.SM_Q2:
                    return self._sm_u2(msg)
                if msg.kind is Kind.PAIR_Q:
                    return self._pair(msg)
                return wire.error(msg.tag, ErrorCode.UNSUPPORTED, f"cannot serve {msg.kind.name}")
            except ProtocolError as exc:
                return wire.error(msg.tag, ErrorCode.MALFORMED, str(exc))
            except ComputationFailed as exc:
                return wire.error(msg.tag, ErrorCode.COMPUTATION_FAILED, str(exc))

    # -- queries

    def _sm_u1(self, msg: WireMessage) -> WireMessage:
        q = wire.parse_sm_q1(msg)
        if self._lazy("sm") and Kind.SM_Q1 in self._stale:
            return wire.sm_resp(msg.tag, self._stale[Kind.SM_Q1])
        points = list(sm_server_u1(q))
        points = self._corrupt_points(points, q.n, q.a)
        self._stale[Kind.SM_Q1] = points
        return wire.sm_resp(msg.tag, points)

    def _sm_u2(self, msg: WireMessage) -> WireMessage:
        q = wire.parse_sm_q2(msg)
        if self._lazy("sm") and Kind.SM_Q2 in self._stale:
            return wire.sm_resp(msg.tag, self._stale[Kind.SM_Q2])
        points = [sm_server_u2(q)]
        points = self._corrupt_points(points, q.n, q.a)
        self._stale[Kind.SM_Q2] = points
        return wire.sm_resp(msg.tag, points)

    def _pair(self, msg: WireMessage) -> WireMessage:
        query, p, a, b, r = wire.parse_pair_q(msg)
        pp = self.params
        if (p, a, b, r) != (pp.p, 1, 0, pp.r):
            return wire.error(msg.tag, ErrorCode.UNSUPPORTED, "unknown pairing parameters")
        for P in (query.left, query.right):
            if not is_on_curve(P, pp.curve):
                raise ProtocolError("pairing input not on the curve")
        if self._lazy("pairing") and Kind.PAIR_Q in self._stale:
            value = self._stale[Kind.PAIR_Q]
        else:
            value = self._corrupt_gt(bpsm_server_pair(query, pp).value)
            self._stale[Kind.PAIR_Q] = value
        return wire.pair_resp(PairResponse(msg.tag, value))

    # -- misbehavior

    def _lazy(self, stage: str) -> bool:
        return self.behavior.kind == "lazy" and self.behavior.active_in(stage)

    def _corrupt_points(self, points: list[ECPoint], n: int, a: int) -> list[ECPoint]:
        kind = self.behavior.kind
        rng = self.rng
        if kind == "lazy" or not self.behavior.active_in("sm"):
            return points
        if kind == "random":
            return [Point(rng.randrange(n), rng.randrange(n)) for _ in points]
        if kind == "identity":
            return [INFINITY for _ in points]
        if kind == "scale":
            E = CurveParams.over(n, a, 0)
            try:
                return [scalar_multi(P, self.behavior.unit, E) for P in points]
            except NotInvertible as exc:
                raise ComputationFailed(str(exc)) from None
        # bitflip
        policy = self.behavior.policy
        idx = rng.randrange(len(points)) if policy == "random" else 0
        P = points[idx]
        coords = [0, 0] if P is INFINITY else [P.x, P.y]
        which = rng.randrange(2) if policy == "random" else 0
        top = n.bit_length() - 2
        bit = {"random": rng.randint(0, top), "low": 0, "high": top}[policy]
        coords[which] = (coords[which] ^ (1 << bit)) % n
        out = list(points)
        out[idx] = Point(*coords)
        return out

    def _corrupt_gt(self, v: Fp2Element) -> Fp2Element:
        kind = self.behavior.kind
        p = v.p
        rng = self.rng
        if kind == "lazy" or not self.behavior.active_in("pairing"):
            return v
        if kind == "random":
            return Fp2Element(rng.randrange(p), rng.randrange(p), p)
        if kind == "identity":
            return Fp2Element.one(p)
        if kind == "scale":
            u = Fp2Element.of(self.behavior.unit, 1, p)
            if self.behavior.guess_bits is None:
                return v * u
            if self._pending_scale is None:
                g = rng.randrange(2, 1 << self.behavior.guess_bits)
                self._pending_scale = u ** g
                return v * u
            scaled, self._pending_scale = v * self._pending_scale, None
            return scaled
        # bitflip
        coords = [v.c0, v.c1]
        which = rng.randrange(2) if self.behavior.policy == "random" else 0
        top = p.bit_length() - 2
        bit = {"random": rng.randint(0, top), "low": 0, "high": top}[self.behavior.policy]
        coords[which] = (coords[which] ^ (1 << bit)) % p
        return Fp2Element(coords[0], coords[1], p)
