"""Exception hierarchy shared by every layer."""

from __future__ import annotations


class PairsourceError(Exception):
    pass


class ModulusMismatch(PairsourceError, ValueError):
    pass


class NotInvertible(PairsourceError, ArithmeticError):
    """A denominator shares a factor with the modulus.

    Over Z_N this exposes a factor of N, so the session that hit it must be
    thrown away.
    """

    def __init__(self, gcd: int):
        super().__init__(f"element not invertible (gcd={gcd})")
        self.gcd = gcd


class NonResidue(PairsourceError, ValueError):
    pass


class ZeroEvaluation(PairsourceError, ArithmeticError):
    pass


class ComputationFailed(PairsourceError):
    """A server could not finish a query (it reports this instead of an answer)."""


class VerificationFailed(PairsourceError):
    def __init__(self, stage: str, detail: str = ""):
        msg = f"verification failed at {stage} stage"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.stage = stage


class TransportError(PairsourceError, ConnectionError):
    pass


class ProtocolError(PairsourceError, ValueError):
    """Malformed or unexpected wire message."""
