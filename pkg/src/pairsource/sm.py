"""Two-server outsourcing of one scalar multiplication c*P.

The client hides P and the curve by adding random multiples of p to every
coordinate and working modulo N = p*q for a fresh random prime q. Servers run
the ordinary affine formulas over Z_N; reducing their answers mod p yields the
F_p results. U1 returns Q1 = c1*P' and Q3 = r1*Q1 + r2*P', U2 returns
Q2 = c2*P', and the client accepts when Q3 = Q2 (mod p).

Scalars are blinded with multiples of the subgroup order r rather than p:
k*P only depends on k mod r, so c1 = c + r5*r is the value that keeps
Q1 = c*P after reduction. Scalar masks are taken modulo N*r.
"""

from __future__ import annotations

import dataclasses
import random

from . import opcount
from .algebra import Modulus, RingElement, default_rng, rand_prime
from .curve import (
    INFINITY,
    CurveParams,
    ECPoint,
    Point,
    is_on_curve,
    point_add,
    reduce_point,
    scalar_multi,
)
from .errors import ComputationFailed, NotInvertible, ProtocolError, VerificationFailed


@dataclasses.dataclass(frozen=True)
class SMQueryU1:
    point: Point  # P'
    c1: int
    r1: int
    r2: int
    a: int  # a'
    b: int  # b', sent for fidelity, the formulas never read it
    n: int


@dataclasses.dataclass(frozen=True)
class SMQueryU2:
    point: Point
    c2: int
    a: int
    b: int
    n: int


@dataclasses.dataclass(frozen=True)
class SMSecret:
    p: int
    q: int
    n: int
    masks: tuple[int, int, int, int, int, int]  # r1..r6
    t1: int
    t2: int
    point: Point
    scalar: int
    curve: CurveParams


@dataclasses.dataclass(frozen=True)
class SMResponse:
    q1: ECPoint
    q3: ECPoint
    q2: ECPoint


@dataclasses.dataclass(frozen=True)
class SMVerdict:
    ok: bool
    result: ECPoint | None = None

    def __bool__(self) -> bool:
        return self.ok


def sm_transform(
    P: Point, c: int, params: CurveParams, rng: random.Random | None = None
) -> tuple[SMQueryU1, SMQueryU2, SMSecret]:
    """Blind (P, c) into one query per server."""
    if P is INFINITY:
        raise ValueError("the point at infinity cannot be blinded")
    r = params.order
    if r is None:
        raise ValueError("curve parameters must carry the subgroup order")
    if not 0 <= c < r:
        raise ValueError("scalar must lie in [0, r)")
    rng = rng or default_rng()
    p = params.modulus

    q = rand_prime(p.bit_length(), rng).value
    N = Modulus(p * q)
    S = Modulus(p * q * r)  # scalar masks: reduction mod r recovers the scalar
    masks = tuple(rng.randrange(1, N.value) for _ in range(6))
    r1, r2, r3, r4, r5, r6 = (N.element(m) for m in masks)
    t1, t2 = masks[0], masks[1]

    pN = N.element(p)
    x_ = N.element(P.x) + r1 * pN
    y_ = N.element(P.y) + r2 * pN
    a_ = N.element(params.a) + r3 * pN
    b_ = N.element(params.b) + r4 * pN
    rS = S.element(r)
    c1 = S.element(c) + S.element(masks[4]) * rS
    c2 = S.element(t1) * S.element(c) + S.element(t2) + S.element(masks[5]) * rS

    Pb = Point(x_.residue, y_.residue)
    secret = SMSecret(p, q, N.value, masks, t1, t2, P, c, params)
    qu1 = SMQueryU1(Pb, c1.residue, masks[0], masks[1], a_.residue, b_.residue, N.value)
    qu2 = SMQueryU2(Pb, c2.residue, a_.residue, b_.residue, N.value)
    return qu1, qu2, secret


def _arena(n: int, a: int, b: int) -> CurveParams:
    return CurveParams.over(n, a, b)


def sm_server_u1(query: SMQueryU1) -> tuple[ECPoint, ECPoint]:
    """Q1 = c1*P', Q3 = r1*Q1 + r2*P' over Z_N."""
    E = _arena(query.n, query.a, query.b)
    try:
        q1 = scalar_multi(query.point, query.c1, E)
        q3 = point_add(scalar_multi(q1, query.r1, E), scalar_multi(query.point, query.r2, E), E)
    except NotInvertible as exc:
        raise ComputationFailed(str(exc)) from None
    return q1, q3


def sm_server_u2(query: SMQueryU2) -> ECPoint:
    """Q2 = c2*P' over Z_N."""
    E = _arena(query.n, query.a, query.b)
    try:
        return scalar_multi(query.point, query.c2, E)
    except NotInvertible as exc:
        raise ComputationFailed(str(exc)) from None


def _well_formed(P: object, n: int) -> bool:
    if P is INFINITY:
        return True
    return (
        isinstance(P, Point)
        and isinstance(P.x, int)
        and isinstance(P.y, int)
        and 0 <= P.x < n
        and 0 <= P.y < n
    )


def sm_verify(resp: SMResponse, secret: SMSecret) -> SMVerdict:
    """Accept iff Q3 = Q2 (mod p) and Q1 mod p lies on E(F_p)."""
    n, p = secret.n, secret.p
    if not all(_well_formed(P, n) for P in (resp.q1, resp.q2, resp.q3)):
        return SMVerdict(False)
    if reduce_point(resp.q3, p) != reduce_point(resp.q2, p):
        return SMVerdict(False)
    R = reduce_point(resp.q1, p)
    opcount.tick("mod_mul", 3)
    if not is_on_curve(R, secret.curve):
        return SMVerdict(False)
    return SMVerdict(True, R)


def sm_recover(verdict: SMVerdict) -> ECPoint:
    """R = Q1 mod p, only from a passing verdict."""
    if not verdict.ok:
        raise VerificationFailed("sm")
    return verdict.result


class SMClient:
    """Client side of the SM protocol bound to two server handles.

    A handle exposes ``sm_u1(query) -> (Q1, Q3)`` and ``sm_u2(query) -> Q2``.
    """

    def __init__(self, params: CurveParams, u1, u2, rng: random.Random | None = None,
                 retries: int = 3):
        self.params = params
        self.u1 = u1
        self.u2 = u2
        self.rng = rng or default_rng()
        self.retries = retries

    def multiply(self, c: int, P: ECPoint) -> ECPoint:
        """c*P through the servers. Trivial inputs never leave the client."""
        c %= self.params.order
        if P is INFINITY or c == 0:
            return INFINITY
        for _ in range(self.retries):
            qu1, qu2, secret = sm_transform(P, c, self.params, self.rng)
            try:
                q1, q3 = self.u1.sm_u1(qu1)
                q2 = self.u2.sm_u2(qu2)
            except ComputationFailed:
                # the session leaked a factor of N at worst; start over
                continue
            except ProtocolError as exc:
                raise VerificationFailed("sm", f"malformed response: {exc}") from None
            return sm_recover(sm_verify(SMResponse(q1, q3, q2), secret))
        raise VerificationFailed("sm", f"servers failed {self.retries} times")
