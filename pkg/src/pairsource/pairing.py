"""Reduced Tate pairing on y^2 = x^3 + x over F_p, p = 3 (mod 4).

The curve is supersingular with p + 1 points and embedding degree 2. The
distortion map (x, y) -> (-x, i*y) sends the order-r subgroup of E(F_p) to an
independent subgroup over F_{p^2}, which gives a symmetric, non-degenerate
pairing e(A, B) = f_{r,A}(psi(B)) ** ((p^2 - 1) / r).
"""

from __future__ import annotations

import dataclasses
import random
from typing import NamedTuple

from . import _backend, opcount
from .algebra import Fp2Element, is_probable_prime, rand_prime
from .curve import INFINITY, CurveParams, ECPoint, Point, is_on_curve, lift, scalar_multi
from .errors import NonResidue, PairsourceError

# G_T elements are F_{p^2} elements of order dividing r
GtElement = Fp2Element


class Fp2Point(NamedTuple):
    x: Fp2Element
    y: Fp2Element


class ParameterSearchExhausted(PairsourceError, RuntimeError):
    pass


@dataclasses.dataclass(frozen=True)
class PairingParams:
    p: int
    r: int
    cofactor: int
    generator: Point
    name: str = ""

    @property
    def curve(self) -> CurveParams:
        return CurveParams(1, 0, self.p, self.r, self.cofactor, self.generator)

    @property
    def final_exp(self) -> int:
        return (self.p * self.p - 1) // self.r

    def one(self) -> GtElement:
        return Fp2Element.one(self.p)

    def validate(self) -> None:
        """Raise ValueError unless every structural invariant holds."""
        p, r = self.p, self.r
        if p % 4 != 3:
            raise ValueError("p must be 3 mod 4")
        if not is_probable_prime(p):
            raise ValueError("p is not prime")
        if not is_probable_prime(r):
            raise ValueError("r is not prime")
        if (p + 1) % r or (p + 1) // r != self.cofactor:
            raise ValueError("cofactor must equal (p + 1) / r")
        G = self.generator
        if G is INFINITY or not is_on_curve(G, self.curve):
            raise ValueError("generator not on the curve")
        with opcount.not_counting():
            if scalar_multi(G, r, self.curve) is not INFINITY:
                raise ValueError("generator does not have order r")


def find_generator(p: int, r: int) -> Point:
    curve = CurveParams(1, 0, p, r, (p + 1) // r)
    x = 1
    while True:
        try:
            G = lift(x, curve)
        except NonResidue:
            G = INFINITY
        if G is not INFINITY and scalar_multi(G, r, curve) is INFINITY:
            return G
        x += 1


def params_from_primes(p: int, r: int, name: str = "") -> PairingParams:
    pp = PairingParams(p, r, (p + 1) // r, find_generator(p, r), name)
    pp.validate()
    return pp


def generate_params(
    bits: int,
    rng: random.Random,
    r_bits: int | None = None,
    max_attempts: int = 200,
    name: str = "",
) -> PairingParams:
    """Pick a prime r, then search p = k*r - 1 (k = 0 mod 4) of exactly ``bits`` bits.

    k = 0 (mod 4) makes p = 3 (mod 4), and r | p + 1 holds by construction.
    """
    if bits < 24:
        raise ValueError("bits must be >= 24")
    if r_bits is None:
        r_bits = bits - 16 if bits >= 48 else bits - 8
    if not 16 <= r_bits <= bits - 3:
        raise ValueError("r_bits must be in [16, bits - 3]")
    lo, hi = 1 << (bits - 1), 1 << bits
    for _ in range(max_attempts):
        r = rand_prime(r_bits, rng).value
        k = -(-(lo + 1) // r)
        k += -k % 4
        tries = 0
        while k * r - 1 < hi and tries < 4 * bits:
            p = k * r - 1
            if is_probable_prime(p, rng=rng):
                return params_from_primes(p, r, name)
            k += 4
            tries += 1
    raise ParameterSearchExhausted(f"no {bits}-bit parameters after {max_attempts} attempts")


def distortion(P: ECPoint, p: int) -> Fp2Point | object:
    """(x, y) -> (-x, i*y)."""
    if P is INFINITY:
        return INFINITY
    return Fp2Point(Fp2Element.of(-P.x, 0, p), Fp2Element.of(0, P.y, p))


def on_curve_fp2(Q: Fp2Point) -> bool:
    """Check y^2 = x^3 + x over F_{p^2}."""
    x, y = Q.x, Q.y
    with opcount.not_counting():
        lhs = y * y
        rhs = x * x * x
    p = x.p
    return lhs == Fp2Element((rhs.c0 + x.c0) % p, (rhs.c1 + x.c1) % p, p)


def _distorted_coords(Q: Fp2Point) -> tuple[int, int]:
    # only points of the shape (-qx, i*qy) with qx, qy in F_p are accepted
    if Q.x.c1 != 0 or Q.y.c0 != 0:
        raise ValueError("second argument must be the image of the distortion map")
    return -Q.x.c0 % Q.x.p, Q.y.c1


def miller_loop(P: ECPoint, Q, r: int) -> Fp2Element:
    """f_{r,P}(Q) with vertical lines dropped; Q must come from ``distortion``."""
    if Q is INFINITY:
        raise ValueError("Q must be a finite distorted point")
    p = Q.x.p
    if P is INFINITY:
        return Fp2Element.one(p)
    qx, qy = _distorted_coords(Q)
    f0, f1 = _backend.kernels.miller(P.x, P.y, qx, qy, r, p)
    return Fp2Element(f0, f1, p)


def tate_pairing(A: ECPoint, B: ECPoint, pp: PairingParams) -> GtElement:
    """Reduced Tate pairing of two points of the order-r subgroup."""
    opcount.tick("pairing")
    if A is INFINITY or B is INFINITY:
        return pp.one()
    c0, c1 = _backend.kernels.tate(A.x, A.y, B.x, B.y, pp.r, pp.p, pp.final_exp)
    return Fp2Element(c0, c1, pp.p)


def gt_is_member(v: GtElement, r: int) -> bool:
    with opcount.not_counting():
        return (v ** r).is_one()
