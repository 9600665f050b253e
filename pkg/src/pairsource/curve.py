"""Short Weierstrass group law y^2 = x^3 + a*x + b in affine coordinates.

The same formulas serve two arenas: the true group E(F_p), and Z_N where a
blinded point is just a pair of residues with no curve underneath. Over Z_N a
slope denominator can share a factor with N; that surfaces as NotInvertible
and the caller has to discard the session.
"""

from __future__ import annotations

import dataclasses
from typing import NamedTuple, Union

from . import _backend, _pykernels, opcount
from .errors import NonResidue


class Point(NamedTuple):
    x: int
    y: int


class _Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()
ECPoint = Union[Point, _Infinity]


@dataclasses.dataclass(frozen=True)
class CurveParams:
    """Curve coefficients over a modulus.

    ``order``, ``cofactor`` and ``generator`` describe the prime-order
    subgroup and are only meaningful over F_p.
    """

    a: int
    b: int
    modulus: int
    order: int | None = None
    cofactor: int = 1
    generator: ECPoint | None = None

    def __post_init__(self):
        if not (0 <= self.a < self.modulus and 0 <= self.b < self.modulus):
            raise ValueError("coefficients must be reduced")

    @classmethod
    def over(cls, modulus: int, a: int, b: int) -> "CurveParams":
        """Bare formula arena (used for blinded Z_N computations)."""
        return cls(a % modulus, b % modulus, modulus)

    def reduced(self, p: int) -> "CurveParams":
        return CurveParams.over(p, self.a, self.b)

    def is_nonsingular(self) -> bool:
        n = self.modulus
        return (4 * pow(self.a, 3, n) + 27 * self.b * self.b) % n != 0


def _check(P: ECPoint, params: CurveParams) -> None:
    if P is not INFINITY and not (0 <= P.x < params.modulus and 0 <= P.y < params.modulus):
        raise ValueError("point coordinates not reduced for this curve")


def neg(P: ECPoint, params: CurveParams) -> ECPoint:
    if P is INFINITY:
        return P
    return Point(P.x, -P.y % params.modulus)


def point_double(P: ECPoint, params: CurveParams) -> ECPoint:
    _check(P, params)
    opcount.tick("point_op")
    if P is INFINITY:
        return P
    r = _pykernels._dbl(P.x, P.y, params.a, params.modulus)
    return INFINITY if r is None else Point(*r)


def point_add(P: ECPoint, Q: ECPoint, params: CurveParams) -> ECPoint:
    """Chord rule; P == Q falls through to the tangent rule."""
    _check(P, params)
    _check(Q, params)
    opcount.tick("point_op")
    if P is INFINITY:
        return Q
    if Q is INFINITY:
        return P
    r = _pykernels._add(P.x, P.y, Q.x, Q.y, params.a, params.modulus)
    return INFINITY if r is None else Point(*r)


def scalar_multi(P: ECPoint, n: int, params: CurveParams) -> ECPoint:
    """n*P by double-and-add. Negative scalars are rejected; reduce mod r first."""
    if n < 0:
        raise ValueError("negative scalar")
    _check(P, params)
    opcount.tick("scalar_mult")
    if P is INFINITY or n == 0:
        return INFINITY
    r = _backend.kernels.ec_scalar_mult(P.x, P.y, n, params.a, params.modulus)
    return INFINITY if r is None else Point(*r)


def is_on_curve(P: ECPoint, params: CurveParams) -> bool:
    if P is INFINITY:
        return True
    n = params.modulus
    if not (0 <= P.x < n and 0 <= P.y < n):
        return False
    return (P.y * P.y - (P.x * P.x + params.a) * P.x - params.b) % n == 0


def reduce_point(P: ECPoint, p: int) -> ECPoint:
    """Coordinate-wise reduction (Z_N -> F_p for p | N)."""
    opcount.tick("reduce")
    if P is INFINITY:
        return P
    return Point(P.x % p, P.y % p)


def sqrt_mod(v: int, p: int) -> int:
    """Square root modulo a prime p = 3 (mod 4); NonResidue if none exists."""
    if p % 4 != 3:
        raise ValueError("sqrt_mod needs p = 3 (mod 4)")
    v %= p
    y = pow(v, (p + 1) // 4, p)
    if y * y % p != v:
        raise NonResidue(f"{v} is not a square mod p")
    return y


def lift(x: int, params: CurveParams) -> ECPoint:
    """Point with abscissa x, multiplied by the cofactor into the order-r subgroup.

    The result may be INFINITY when the lifted point has order dividing the
    cofactor.
    """
    p = params.modulus
    x %= p
    y = sqrt_mod((x * x + params.a) * x + params.b, p)
    P = Point(x, y)
    if params.cofactor == 1:
        return P
    return scalar_multi(P, params.cofactor, params)
