"""Verifiable two-server outsourcing of elliptic-curve scalar multiplications
and Tate pairings, with a fair-payment escrow simulator."""

from ._backend import NAME as BACKEND
from .algebra import Fp2Element, Modulus, RingElement, fp2_mul, fp2_pow, rand_prime
from .bpsm import BPSMClient, bpsm_outsource, bpsm_recover, bpsm_verify, gen_coeffs
from .curve import INFINITY, CurveParams, Point, is_on_curve, point_add, point_double, scalar_multi
from .errors import (
    ComputationFailed,
    NotInvertible,
    PairsourceError,
    TransportError,
    VerificationFailed,
)
from .pairing import PairingParams, tate_pairing
from .sm import SMClient, sm_recover, sm_server_u1, sm_server_u2, sm_transform, sm_verify

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BPSMClient",
    "ComputationFailed",
    "CurveParams",
    "Fp2Element",
    "INFINITY",
    "Modulus",
    "NotInvertible",
    "PairingParams",
    "PairsourceError",
    "Point",
    "RingElement",
    "SMClient",
    "TransportError",
    "VerificationFailed",
    "bpsm_outsource",
    "bpsm_recover",
    "bpsm_verify",
    "fp2_mul",
    "fp2_pow",
    "gen_coeffs",
    "is_on_curve",
    "point_add",
    "point_double",
    "rand_prime",
    "scalar_multi",
    "sm_recover",
    "sm_server_u1",
    "sm_server_u2",
    "sm_transform",
    "sm_verify",
    "tate_pairing",
]
