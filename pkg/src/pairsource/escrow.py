"""Fair-payment escrow: a deterministic state machine with a conserved ledger.

One task walks SMPosted -> SMClaimed -> SMReturned -> PairPosted ->
PairClaimed -> PairReturned and settles to SettledPaid or SettledRefunded.
The client pays the fee up front, the server deposits on each claim, and
``settle`` re-runs the pairing check on the stored material. A failed check
sends fee and deposits to the client.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import random
import threading
from typing import Any, Iterable

from .algebra import default_rng
from .bpsm import (
    DEFAULT_CHECK_BITS,
    BPSMSecret,
    PairQuery,
    PairResponse,
    assemble_queries,
    bpsm_verify,
    gen_coeffs,
)
from .curve import INFINITY, ECPoint
from .errors import ComputationFailed, PairsourceError, ProtocolError
from .pairing import GtElement, PairingParams
from .sm import SMResponse, SMSecret, sm_recover, sm_transform, sm_verify

ESCROW = "escrow"


class EscrowError(PairsourceError):
    pass


class InsufficientFunds(EscrowError):
    pass


class WrongPhase(EscrowError):
    pass


class WrongParty(EscrowError):
    pass


class UnknownTask(EscrowError, KeyError):
    pass


class Phase(str, enum.Enum):
    SM_POSTED = "SMPosted"
    SM_CLAIMED = "SMClaimed"
    SM_RETURNED = "SMReturned"
    PAIR_POSTED = "PairPosted"
    PAIR_CLAIMED = "PairClaimed"
    PAIR_RETURNED = "PairReturned"
    SETTLED_PAID = "SettledPaid"
    SETTLED_REFUNDED = "SettledRefunded"

    @property
    def settled(self) -> bool:
        return self in (Phase.SETTLED_PAID, Phase.SETTLED_REFUNDED)


class Ledger:
    """Balances per party. Only ``transfer`` moves funds, so the total never changes."""

    def __init__(self, balances: dict[str, int] | None = None):
        self._bal: dict[str, int] = {}
        for party, amount in (balances or {}).items():
            if amount < 0:
                raise ValueError(f"negative opening balance for {party!r}")
            self._bal[party] = amount
        self._bal.setdefault(ESCROW, 0)

    def balance(self, party: str) -> int:
        return self._bal.get(party, 0)

    def balances(self) -> dict[str, int]:
        return dict(self._bal)

    def total(self) -> int:
        return sum(self._bal.values())

    def transfer(self, src: str, dst: str, amount: int) -> dict[str, int]:
        if amount <= 0:
            raise ValueError("transfer amount must be positive")
        if self.balance(src) < amount:
            raise InsufficientFunds(f"{src} holds {self.balance(src)}, needs {amount}")
        self._bal[src] = self.balance(src) - amount
        self._bal[dst] = self.balance(dst) + amount
        return {src: -amount, dst: amount}


@dataclasses.dataclass(frozen=True)
class CheckInputs:
    """What the escrow needs to run the pairing check: x and the tag -> role map."""

    x: int
    roles: dict[bytes, str]


@dataclasses.dataclass
class EscrowTask:
    task_id: int
    client: str
    fee: int
    sm_queries: Any
    phase: Phase = Phase.SM_POSTED
    server: str | None = None
    deposits: list[int] = dataclasses.field(default_factory=list)
    sm_responses: list[SMResponse] | None = None
    pair_queries: list[PairQuery] | None = None
    check: CheckInputs | None = None
    pair_responses: list[PairResponse] | None = None
    verdict: bool | None = None

    @property
    def deposit(self) -> int:
        return sum(self.deposits)


@dataclasses.dataclass(frozen=True)
class SettlementOutcome:
    task_id: int
    paid: bool
    phase: Phase
    recipient: str
    amount: int


def check_pair_responses(responses: Iterable[PairResponse], check: CheckInputs) -> bool:
    """bpsm_verify over responses matched to roles by tag; any gap or duplicate fails."""
    by_role: dict[str, Any] = {}
    for resp in responses:
        role = check.roles.get(resp.tag)
        if role is None or role in by_role:
            return False
        by_role[role] = resp.value
    if set(by_role) != {"H1", "H2", "L1", "L2"}:
        return False
    values = [by_role[k] for k in ("H1", "H2", "L1", "L2")]
    if len({v.p for v in values}) != 1:
        return False
    return bpsm_verify(*values, check.x).ok


class Escrow:
    """Single serialized escrow; every transition takes the same lock."""

    def __init__(self, ledger: Ledger):
        self.ledger = ledger
        self.tasks: dict[int, EscrowTask] = {}
        self.log: list[dict] = []
        self._lock = threading.Lock()
        self._next_id = 1

    def __deepcopy__(self, memo):
        # exploration snapshots; payloads are immutable and shared
        clone = Escrow.__new__(Escrow)
        clone.ledger = Ledger()
        clone.ledger._bal = dict(self.ledger._bal)
        clone.tasks = {k: dataclasses.replace(t, deposits=list(t.deposits)) for k, t in self.tasks.items()}
        clone.log = list(self.log)
        clone._lock = threading.Lock()
        clone._next_id = self._next_id
        return clone

    # -- helpers

    def task(self, task_id: int) -> EscrowTask:
        try:
            return self.tasks[task_id]
        except KeyError:
            raise UnknownTask(task_id) from None

    def _expect(self, t: EscrowTask, *phases: Phase) -> None:
        if t.phase not in phases:
            want = "/".join(p.value for p in phases)
            raise WrongPhase(f"task {t.task_id} is {t.phase.value}, needs {want}")

    def _record(self, op: str, t: EscrowTask, party: str, amounts: dict[str, int], before: Phase | None) -> None:
        self.log.append({
            "seq": len(self.log) + 1,
            "op": op,
            "task": t.task_id,
            "party": party,
            "amounts": amounts,
            "phase_before": before.value if before else None,
            "phase_after": t.phase.value,
        })

    def _payout(self, t: EscrowTask, to: str) -> dict[str, int]:
        return self.ledger.transfer(ESCROW, to, t.fee + t.deposit)

    # -- transitions

    def upload_sm(self, client: str, queries: Any, fee: int) -> int:
        if fee <= 0:
            raise ValueError("fee must be positive")
        with self._lock:
            amounts = self.ledger.transfer(client, ESCROW, fee)
            t = EscrowTask(self._next_id, client, fee, queries)
            self._next_id += 1
            self.tasks[t.task_id] = t
            self._record("upload_sm", t, client, amounts, None)
            return t.task_id

    def _claim(self, op: str, server: str, task_id: int, deposit: int, want: Phase, nxt: Phase) -> EscrowTask:
        if deposit <= 0:
            raise ValueError("deposit must be positive")
        t = self.task(task_id)
        self._expect(t, want)
        if t.server is not None and t.server != server:
            raise WrongParty(f"task {task_id} belongs to {t.server}")
        if server == t.client:
            raise WrongParty("the client cannot claim its own task")
        amounts = self.ledger.transfer(server, ESCROW, deposit)
        before = t.phase
        t.server = server
        t.deposits.append(deposit)
        t.phase = nxt
        self._record(op, t, server, amounts, before)
        return t

    def get_sm(self, server: str, task_id: int, deposit: int) -> Any:
        with self._lock:
            return self._claim("get_sm", server, task_id, deposit, Phase.SM_POSTED, Phase.SM_CLAIMED).sm_queries

    def get_task(self, server: str, task_id: int, deposit: int) -> list[PairQuery]:
        with self._lock:
            t = self._claim("get_task", server, task_id, deposit, Phase.PAIR_POSTED, Phase.PAIR_CLAIMED)
            return list(t.pair_queries)

    def _submit(self, op: str, server: str, task_id: int, want: Phase, nxt: Phase) -> EscrowTask:
        t = self.task(task_id)
        self._expect(t, want)
        if server != t.server:
            raise WrongParty(f"{server} did not claim task {task_id}")
        before = t.phase
        t.phase = nxt
        self._record(op, t, server, {}, before)
        return t

    def submit_sm_result(self, server: str, task_id: int, responses: list[SMResponse]) -> None:
        with self._lock:
            t = self._submit("submit_sm_result", server, task_id, Phase.SM_CLAIMED, Phase.SM_RETURNED)
            t.sm_responses = list(responses)

    def submit_result(self, server: str, task_id: int, responses: list[PairResponse]) -> None:
        with self._lock:
            t = self._submit("submit_result", server, task_id, Phase.PAIR_CLAIMED, Phase.PAIR_RETURNED)
            t.pair_responses = list(responses)

    def upload_task(self, client: str, task_id: int, queries: list[PairQuery], check: CheckInputs) -> None:
        """Post the pairing queries after the client accepted the SM stage."""
        with self._lock:
            t = self.task(task_id)
            self._expect(t, Phase.SM_RETURNED)
            if client != t.client:
                raise WrongParty(f"{client} does not own task {task_id}")
            before = t.phase
            t.pair_queries = list(queries)
            t.check = check
            t.phase = Phase.PAIR_POSTED
            self._record("upload_task", t, client, {}, before)

    def dispute_sm(self, client: str, task_id: int, secrets: list[SMSecret]) -> SettlementOutcome:
        """Client reveals its SM secrets; the escrow refunds only if a response fails sm_verify."""
        with self._lock:
            t = self.task(task_id)
            self._expect(t, Phase.SM_RETURNED)
            if client != t.client:
                raise WrongParty(f"{client} does not own task {task_id}")
            responses = t.sm_responses or []
            ok = len(responses) == len(secrets) and all(
                sm_verify(resp, sec).ok for resp, sec in zip(responses, secrets)
            )
            if ok:
                raise WrongParty("SM responses verify; nothing to dispute")
            before = t.phase
            amounts = self._payout(t, t.client)
            t.phase = Phase.SETTLED_REFUNDED
            t.verdict = False
            self._record("dispute_sm", t, client, amounts, before)
            return SettlementOutcome(task_id, False, t.phase, t.client, t.fee + t.deposit)

    def settle(self, task_id: int) -> SettlementOutcome:
        with self._lock:
            t = self.task(task_id)
            self._expect(t, Phase.PAIR_RETURNED)
            ok = check_pair_responses(t.pair_responses or [], t.check)
            before = t.phase
            to = t.server if ok else t.client
            amounts = self._payout(t, to)
            t.phase = Phase.SETTLED_PAID if ok else Phase.SETTLED_REFUNDED
            t.verdict = ok
            self._record("settle", t, ESCROW, amounts, before)
            return SettlementOutcome(task_id, ok, t.phase, to, t.fee + t.deposit)

    # -- export

    def log_jsonl(self) -> str:
        return "".join(json.dumps(entry, sort_keys=True) + "\n" for entry in self.log)

    def write_log(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.log_jsonl())


def sm_batch(A: ECPoint, B: ECPoint, pp: PairingParams, rng: random.Random,
             m: int = DEFAULT_CHECK_BITS) -> tuple[BPSMSecret, list, list[SMSecret]]:
    """Coefficients plus the six blinded SM jobs, in the order assemble_queries wants."""
    r = pp.r
    s = gen_coeffs(r, m, rng)
    jobs = [
        (s.a1, A), (s.b1, A), (s.a2, B), (s.b2, B),
        (s.x * s.b1 % r, A), (s.x * s.a2 % r, B),
    ]
    batch, secrets = [], []
    for c, P in jobs:
        qu1, qu2, sec = sm_transform(P, c, pp.curve, rng)
        batch.append((qu1, qu2))
        secrets.append(sec)
    return s, batch, secrets


@dataclasses.dataclass
class EscrowRun:
    task_id: int
    outcome: SettlementOutcome
    value: GtElement | None  # e(A, B) when the client accepted


def serve_sm_batch(u1, u2, batch) -> list[SMResponse]:
    out = []
    for qu1, qu2 in batch:
        try:
            q1, q3 = u1.sm_u1(qu1)
            q2 = u2.sm_u2(qu2)
        except (ComputationFailed, ProtocolError):
            # nothing useful to return; the client will dispute
            q1 = q3 = q2 = INFINITY
        out.append(SMResponse(q1, q3, q2))
    return out


def serve_pair_batch(u1, u2, to_u1, to_u2) -> list[PairResponse]:
    out = []
    for handle, queries in ((u1, to_u1), (u2, to_u2)):
        for q in queries:
            try:
                out.append(handle.pair(q))
            except (ComputationFailed, ProtocolError):
                pass
    return out


def run_escrowed(
    escrow: Escrow,
    client: str,
    server: str,
    programs,
    A: ECPoint,
    B: ECPoint,
    pp: PairingParams,
    fee: int,
    deposit: int,
    rng: random.Random | None = None,
    m: int = DEFAULT_CHECK_BITS,
) -> EscrowRun:
    """One paid outsourcing of e(A, B) through ``escrow``.

    ``server`` is the paying party that runs both programs ``programs = (U1, U2)``.
    All six blinded multiples go out in one SM batch, so x*b1*A is requested
    as (x*b1 mod r)*A.
    """
    if A is INFINITY or B is INFINITY:
        raise ValueError("trivial inputs are answered locally, not escrowed")
    rng = rng or default_rng()
    u1, u2 = programs
    s, batch, secrets = sm_batch(A, B, pp, rng, m)

    tid = escrow.upload_sm(client, batch, fee)
    posted = escrow.get_sm(server, tid, deposit)
    escrow.submit_sm_result(server, tid, serve_sm_batch(u1, u2, posted))

    verdicts = [sm_verify(resp, sec) for resp, sec in zip(escrow.task(tid).sm_responses, secrets)]
    if not all(verdicts):
        return EscrowRun(tid, escrow.dispute_sm(client, tid, secrets), None)
    points = [sm_recover(v) for v in verdicts]
    to_u1, to_u2 = assemble_queries(*points, s, rng)

    escrow.upload_task(client, tid, to_u1 + to_u2, CheckInputs(s.x, dict(s.roles)))
    queries = escrow.get_task(server, tid, deposit)
    escrow.submit_result(server, tid, serve_pair_batch(u1, u2, queries[:2], queries[2:]))
    outcome = escrow.settle(tid)
    value = None
    if outcome.paid:
        by_role = {s.roles[resp.tag]: resp.value for resp in escrow.task(tid).pair_responses}
        value = by_role["H1"] * by_role["H2"]
    return EscrowRun(tid, outcome, value)
