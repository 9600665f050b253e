"""Modular arithmetic over F_p, Z_N and F_p[i]/(i^2 + 1).

Residues are always stored fully reduced, so equality is plain integer
equality.
"""

from __future__ import annotations

import dataclasses
import math
import random
import secrets
from typing import Literal

from . import _backend, opcount
from .errors import ModulusMismatch, NotInvertible

MR_ROUNDS = 64

# odd primes below 2000; one gcd against their product rejects most candidates
_SIEVE = math.prod(
    n for n in range(3, 2000, 2) if all(n % d for d in range(3, math.isqrt(n) + 1, 2))
)


def default_rng() -> random.Random:
    return secrets.SystemRandom()


def is_probable_prime(n: int, rounds: int = MR_ROUNDS, rng: random.Random | None = None) -> bool:
    """Miller-Rabin with ``rounds`` random bases."""
    if n < 2:
        return False
    if n < 2000:
        return n == 2 or (n % 2 == 1 and all(n % d for d in range(3, math.isqrt(n) + 1, 2)))
    if math.gcd(n, _SIEVE) != 1:
        return False
    rng = rng or default_rng()
    mr = _backend.kernels.miller_rabin
    # one base first: almost every composite dies here
    if not mr(n, [rng.randrange(2, n - 1)]):
        return False
    return rounds <= 1 or mr(n, [rng.randrange(2, n - 1) for _ in range(rounds - 1)])


@dataclasses.dataclass(frozen=True)
class Modulus:
    value: int
    kind: Literal["prime", "composite"] = "composite"

    def __post_init__(self):
        if self.value < 2:
            raise ValueError("modulus must be >= 2")
        if self.kind not in ("prime", "composite"):
            raise ValueError(f"unknown modulus kind {self.kind!r}")

    @classmethod
    def prime(cls, value: int) -> "Modulus":
        if not is_probable_prime(value):
            raise ValueError(f"{value} is not prime")
        return cls(value, "prime")

    def __int__(self) -> int:
        return self.value

    def element(self, v: int) -> "RingElement":
        return RingElement(v % self.value, self)


@dataclasses.dataclass(frozen=True)
class RingElement:
    residue: int
    modulus: Modulus

    def __post_init__(self):
        if not 0 <= self.residue < self.modulus.value:
            raise ValueError("residue out of range")

    def __int__(self) -> int:
        return self.residue

    def __add__(self, other: "RingElement") -> "RingElement":
        return mod_add(self, other)

    def __sub__(self, other: "RingElement") -> "RingElement":
        return mod_sub(self, other)

    def __mul__(self, other: "RingElement") -> "RingElement":
        return mod_mul(self, other)

    def __neg__(self) -> "RingElement":
        return RingElement(-self.residue % self.modulus.value, self.modulus)

    def inverse(self) -> "RingElement":
        return mod_inv(self)


def _same(a: RingElement, b: RingElement) -> int:
    if a.modulus.value != b.modulus.value:
        raise ModulusMismatch(f"{a.modulus.value} != {b.modulus.value}")
    return a.modulus.value


def mod_add(a: RingElement, b: RingElement) -> RingElement:
    m = _same(a, b)
    opcount.tick("mod_add")
    return RingElement((a.residue + b.residue) % m, a.modulus)


def mod_sub(a: RingElement, b: RingElement) -> RingElement:
    m = _same(a, b)
    opcount.tick("mod_add")
    return RingElement((a.residue - b.residue) % m, a.modulus)


def mod_mul(a: RingElement, b: RingElement) -> RingElement:
    m = _same(a, b)
    opcount.tick("mod_mul")
    return RingElement(a.residue * b.residue % m, a.modulus)


def mod_inv(a: RingElement) -> RingElement:
    """Inverse of ``a``; raises NotInvertible when gcd(a, m) != 1."""
    m = a.modulus.value
    opcount.tick("mod_inv")
    try:
        return RingElement(pow(a.residue, -1, m), a.modulus)
    except ValueError:
        raise NotInvertible(math.gcd(a.residue, m)) from None


def rand_prime(bits: int, rng: random.Random | None = None) -> Modulus:
    """Random probable prime of exactly ``bits`` bits (64 Miller-Rabin rounds)."""
    if bits < 16:
        raise ValueError("bits must be >= 16")
    rng = rng or default_rng()
    opcount.tick("prime_gen")
    top = 1 << (bits - 1)
    while True:
        n = rng.getrandbits(bits) | top | 1
        if is_probable_prime(n, MR_ROUNDS, rng):
            return Modulus(n, "prime")


@dataclasses.dataclass(frozen=True)
class Fp2Element:
    """c0 + c1*i over F_p with i^2 = -1 (needs p = 3 mod 4)."""

    c0: int
    c1: int
    p: int

    def __post_init__(self):
        if not (0 <= self.c0 < self.p and 0 <= self.c1 < self.p):
            raise ValueError("Fp2 coordinates must be reduced mod p")

    @classmethod
    def of(cls, c0: int, c1: int, p: int) -> "Fp2Element":
        return cls(c0 % p, c1 % p, p)

    @classmethod
    def one(cls, p: int) -> "Fp2Element":
        return cls(1, 0, p)

    def is_one(self) -> bool:
        return self.c0 == 1 and self.c1 == 0

    def conj(self) -> "Fp2Element":
        return Fp2Element(self.c0, -self.c1 % self.p, self.p)

    def __mul__(self, other: "Fp2Element") -> "Fp2Element":
        return fp2_mul(self, other)

    def __pow__(self, e: int) -> "Fp2Element":
        return fp2_pow(self, e)

    def __repr__(self) -> str:
        return f"Fp2({self.c0:#x} + {self.c1:#x}*i)"


def fp2_mul(a: Fp2Element, b: Fp2Element) -> Fp2Element:
    if a.p != b.p:
        raise ModulusMismatch(f"{a.p} != {b.p}")
    p = a.p
    opcount.tick("gt_mul")
    return Fp2Element(
        (a.c0 * b.c0 - a.c1 * b.c1) % p, (a.c0 * b.c1 + a.c1 * b.c0) % p, p
    )


def fp2_pow(a: Fp2Element, e: int) -> Fp2Element:
    """Square-and-multiply; ``a**0`` is 1."""
    if e < 0:
        raise ValueError("negative exponent")
    opcount.tick("gt_exp")
    c0, c1 = _backend.kernels.fp2_pow(a.c0, a.c1, e, a.p)
    return Fp2Element(c0, c1, a.p)
