"""Per-party operation counters.

Counted operations are ticked by the public arithmetic entry points
(``mod_mul``, ``fp2_pow``, ``scalar_multi``, ``tate_pairing`` ...). Internal
loops of the kernels are not counted, so a scalar multiplication counts as one
``scalar_mult`` no matter how many doublings it performs.

The active counter lives in a context variable. Server handlers install their
own counter, so work done on behalf of a server never lands in the client's
tally even when both run in the same process.
"""

from __future__ import annotations

import contextlib
import dataclasses
from contextvars import ContextVar
from typing import Iterator

FIELDS = (
    "mod_add",
    "mod_mul",
    "mod_inv",
    "reduce",
    "gt_mul",
    "gt_exp",
    "point_op",
    "scalar_mult",
    "pairing",
    "prime_gen",
)


@dataclasses.dataclass
class OpCounts:
    mod_add: int = 0
    mod_mul: int = 0
    mod_inv: int = 0
    reduce: int = 0
    gt_mul: int = 0
    gt_exp: int = 0
    point_op: int = 0
    scalar_mult: int = 0
    pairing: int = 0
    prime_gen: int = 0

    def as_dict(self) -> dict[str, int]:
        return dataclasses.asdict(self)

    def merge(self, other: "OpCounts") -> None:
        for name in FIELDS:
            setattr(self, name, getattr(self, name) + getattr(other, name))

    def __bool__(self) -> bool:
        return any(getattr(self, name) for name in FIELDS)


_active: ContextVar[OpCounts | None] = ContextVar("pairsource_opcounts", default=None)


def tick(name: str, n: int = 1) -> None:
    counts = _active.get()
    if counts is not None:
        setattr(counts, name, getattr(counts, name) + n)


@contextlib.contextmanager
def counting(counts: OpCounts | None = None) -> Iterator[OpCounts]:
    """Attribute every counted operation in the block to ``counts``."""
    if counts is None:
        counts = OpCounts()
    token = _active.set(counts)
    try:
        yield counts
    finally:
        _active.reset(token)


@contextlib.contextmanager
def not_counting() -> Iterator[None]:
    """Suspend counting (used for test oracles run inside a counted block)."""
    token = _active.set(None)
    try:
        yield
    finally:
        _active.reset(token)
