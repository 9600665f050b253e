"""Two-server outsourcing of the Tate pairing e(A, B).

The client picks a1, a2, b1, b2 with a1*a2 + b1*b2 = 1 (mod r) and a check
exponent x, obtains the blinded points through six SM runs, and sends

    U1: H1 = e(a1A, a2B),    L1 = e(x*b1A, b2B)
    U2: H2 = e(b1A, b2B),    L2 = e(a1A, x*a2B)

each server's pair in random order. It accepts iff L1*L2 = (H1*H2)^x and
then e(A, B) = H1*H2. Client cost in G_T: one exponentiation and two
multiplications.
"""

from __future__ import annotations

import dataclasses
import random

from .algebra import default_rng, fp2_mul, fp2_pow
from .curve import INFINITY, ECPoint
from .errors import ComputationFailed, PairsourceError, ProtocolError, VerificationFailed
from .pairing import GtElement, PairingParams, tate_pairing
from .sm import SMClient

DEFAULT_CHECK_BITS = 64


@dataclasses.dataclass
class BPSMSecret:
    a1: int
    a2: int
    b1: int
    b2: int
    x: int
    m: int
    r: int
    # filled by bpsm_prepare: tag -> role ("H1", "L1", "H2", "L2")
    roles: dict[bytes, str] = dataclasses.field(default_factory=dict)
    swapped: tuple[bool, bool] = (False, False)


@dataclasses.dataclass(frozen=True)
class PairQuery:
    left: ECPoint
    right: ECPoint
    tag: bytes


@dataclasses.dataclass(frozen=True)
class PairResponse:
    tag: bytes
    value: GtElement


@dataclasses.dataclass(frozen=True)
class Verdict:
    ok: bool
    product: GtElement  # H1*H2, reused by recovery

    def __bool__(self) -> bool:
        return self.ok


def gen_coeffs(r: int, m: int = DEFAULT_CHECK_BITS, rng: random.Random | None = None) -> BPSMSecret:
    """a1, a2, b1 uniform in [1, r); b2 solves a1*a2 + b1*b2 = 1 (mod r)."""
    if m < 2:
        raise ValueError("m must be >= 2")
    rng = rng or default_rng()
    while True:
        a1, a2, b1 = (rng.randrange(1, r) for _ in range(3))
        b2 = (1 - a1 * a2) * pow(b1, -1, r) % r
        if b2:
            break
    while True:
        x = rng.randrange(2, 1 << m)
        if x % r:
            break
    return BPSMSecret(a1, a2, b1, b2, x, m, r)


def _tag(rng: random.Random) -> bytes:
    return rng.getrandbits(64).to_bytes(8, "big")


def bpsm_prepare(
    A: ECPoint, B: ECPoint, secret: BPSMSecret, sm: SMClient, rng: random.Random | None = None
) -> tuple[list[PairQuery], list[PairQuery]]:
    """Blind A and B through SM and assemble the shuffled pairing queries."""
    rng = rng or default_rng()
    s = secret
    a1A = sm.multiply(s.a1, A)
    b1A = sm.multiply(s.b1, A)
    a2B = sm.multiply(s.a2, B)
    b2B = sm.multiply(s.b2, B)
    xb1A = sm.multiply(s.x, b1A)
    xa2B = sm.multiply(s.x, a2B)

    return assemble_queries(a1A, b1A, a2B, b2B, xb1A, xa2B, s, rng)


def assemble_queries(
    a1A: ECPoint, b1A: ECPoint, a2B: ECPoint, b2B: ECPoint, xb1A: ECPoint, xa2B: ECPoint,
    secret: BPSMSecret, rng: random.Random,
) -> tuple[list[PairQuery], list[PairQuery]]:
    """Tag the four pairing queries, record their roles and shuffle each server's pair."""
    s = secret
    plan = {
        "H1": (a1A, a2B),
        "L1": (xb1A, b2B),
        "H2": (b1A, b2B),
        "L2": (a1A, xa2B),
    }
    queries = {}
    for role, (left, right) in plan.items():
        tag = _tag(rng)
        while tag in s.roles:
            tag = _tag(rng)
        s.roles[tag] = role
        queries[role] = PairQuery(left, right, tag)

    swap1, swap2 = rng.random() < 0.5, rng.random() < 0.5
    s.swapped = (swap1, swap2)
    to_u1 = [queries["H1"], queries["L1"]]
    to_u2 = [queries["H2"], queries["L2"]]
    if swap1:
        to_u1.reverse()
    if swap2:
        to_u2.reverse()
    return to_u1, to_u2


def bpsm_server_pair(query: PairQuery, pp: PairingParams) -> PairResponse:
    try:
        return PairResponse(query.tag, tate_pairing(query.left, query.right, pp))
    except PairsourceError as exc:
        raise ComputationFailed(str(exc)) from None


def bpsm_verify(H1: GtElement, H2: GtElement, L1: GtElement, L2: GtElement, x: int) -> Verdict:
    """L1*L2 == (H1*H2)^x."""
    h = fp2_mul(H1, H2)
    return Verdict(fp2_mul(L1, L2) == fp2_pow(h, x), h)


def bpsm_recover(verdict: Verdict) -> GtElement:
    if not verdict.ok:
        raise VerificationFailed("pairing")
    return verdict.product


@dataclasses.dataclass
class ClientSession:
    """Everything the client holds for one outsourced pairing.

    A new session is empty: the protocol needs no precomputed tables.
    """

    secret: BPSMSecret | None = None
    queries_u1: list[PairQuery] = dataclasses.field(default_factory=list)
    queries_u2: list[PairQuery] = dataclasses.field(default_factory=list)
    responses: dict[str, GtElement] = dataclasses.field(default_factory=dict)
    verdict: Verdict | None = None

    def is_empty(self) -> bool:
        return (
            self.secret is None
            and not self.queries_u1
            and not self.queries_u2
            and not self.responses
            and self.verdict is None
        )


class BPSMClient:
    """Client bound to two server handles (U1, U2).

    A handle exposes ``sm_u1``, ``sm_u2`` and ``pair(query) -> PairResponse``.
    """

    def __init__(self, pp: PairingParams, u1, u2, rng: random.Random | None = None,
                 m: int = DEFAULT_CHECK_BITS):
        self.pp = pp
        self.u1 = u1
        self.u2 = u2
        self.rng = rng or default_rng()
        self.m = m

    def new_session(self) -> ClientSession:
        return ClientSession()

    def outsource(self, A: ECPoint, B: ECPoint, session: ClientSession | None = None) -> GtElement:
        session = session if session is not None else self.new_session()
        if A is INFINITY or B is INFINITY:
            return self.pp.one()
        sm = SMClient(self.pp.curve, self.u1, self.u2, self.rng)
        session.secret = gen_coeffs(self.pp.r, self.m, self.rng)
        session.queries_u1, session.queries_u2 = bpsm_prepare(
            A, B, session.secret, sm, self.rng
        )
        roles = session.secret.roles
        for server, queries in ((self.u1, session.queries_u1), (self.u2, session.queries_u2)):
            for q in queries:
                try:
                    resp = server.pair(q)
                except (ComputationFailed, ProtocolError) as exc:
                    raise VerificationFailed("pairing", str(exc)) from None
                if resp.tag != q.tag or resp.value.p != self.pp.p:
                    raise VerificationFailed("pairing", "response does not match query")
                session.responses[roles[q.tag]] = resp.value
        H = session.responses
        session.verdict = bpsm_verify(H["H1"], H["H2"], H["L1"], H["L2"], session.secret.x)
        return bpsm_recover(session.verdict)


def bpsm_outsource(A: ECPoint, B: ECPoint, pp: PairingParams, servers, rng=None,
                   m: int = DEFAULT_CHECK_BITS) -> GtElement:
    """e(A, B) computed by ``servers = (U1, U2)``; raises VerificationFailed on cheating."""
    u1, u2 = servers
    return BPSMClient(pp, u1, u2, rng, m).outsource(A, B)
