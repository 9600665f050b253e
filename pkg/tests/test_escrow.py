import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairsource import escrow as esc_mod
from pairsource.curve import INFINITY
from pairsource.escrow import (
    ESCROW,
    Escrow,
    InsufficientFunds,
    Ledger,
    Phase,
    UnknownTask,
    WrongParty,
    WrongPhase,
    check_pair_responses,
    run_escrowed,
)
from pairsource.pairing import tate_pairing

import escrow_model
from conftest import Direct, rand_point


@pytest.fixture(scope="module")
def payload(toy):
    return escrow_model.make_payload(toy)


def fresh():
    return Escrow(Ledger({"C": 100, "S": 50, "T": 50}))


def to_pair_returned(e, pl, variant="honest"):
    tid = e.upload_sm("C", pl.batch, 10)
    e.get_sm("S", tid, 5)
    e.submit_sm_result("S", tid, pl.sm["honest"])
    e.upload_task("C", tid, pl.queries, pl.check)
    e.get_task("S", tid, 5)
    e.submit_result("S", tid, pl.pairs[variant])
    return tid


def test_ledger_basics():
    led = Ledger({"a": 5})
    assert led.transfer("a", "b", 3) == {"a": -3, "b": 3}
    assert led.balances() == {"a": 2, "b": 3, ESCROW: 0}
    with pytest.raises(InsufficientFunds):
        led.transfer("a", "b", 3)
    with pytest.raises(ValueError):
        led.transfer("a", "b", 0)
    with pytest.raises(ValueError):
        Ledger({"a": -1})


def test_honest_task_pays_server(payload):
    e = fresh()
    tid = to_pair_returned(e, payload)
    assert e.ledger.balance(ESCROW) == 20
    out = e.settle(tid)
    assert out.paid and out.phase is Phase.SETTLED_PAID
    assert (out.recipient, out.amount) == ("S", 20)
    assert e.ledger.balances() == {"C": 90, "S": 60, "T": 50, ESCROW: 0}


def test_wrong_answers_refund_client(payload):
    for variant in ("scaled", "short"):
        e = fresh()
        tid = to_pair_returned(e, payload, variant)
        out = e.settle(tid)
        assert not out.paid and out.phase is Phase.SETTLED_REFUNDED
        assert e.ledger.balances() == {"C": 110, "S": 40, "T": 50, ESCROW: 0}


def test_sm_dispute(payload):
    e = fresh()
    tid = e.upload_sm("C", payload.batch, 10)
    e.get_sm("S", tid, 5)
    e.submit_sm_result("S", tid, payload.sm["bad"])
    out = e.dispute_sm("C", tid, payload.secrets)
    assert out.phase is Phase.SETTLED_REFUNDED and out.amount == 15
    assert e.ledger.balance("C") == 105

    e = fresh()
    tid = e.upload_sm("C", payload.batch, 10)
    e.get_sm("S", tid, 5)
    e.submit_sm_result("S", tid, payload.sm["honest"])
    with pytest.raises(WrongParty):
        e.dispute_sm("C", tid, payload.secrets)
    assert e.task(tid).phase is Phase.SM_RETURNED


def test_phase_and_party_errors(payload):
    e = fresh()
    with pytest.raises(InsufficientFunds):
        e.upload_sm("C", payload.batch, 1000)
    tid = e.upload_sm("C", payload.batch, 10)
    with pytest.raises(WrongPhase):
        e.settle(tid)
    with pytest.raises(WrongPhase):
        e.get_task("S", tid, 5)
    with pytest.raises(WrongParty):
        e.get_sm("C", tid, 5)
    with pytest.raises(InsufficientFunds):
        e.get_sm("S", tid, 500)
    e.get_sm("S", tid, 5)
    with pytest.raises(WrongPhase):
        e.get_sm("T", tid, 5)
    with pytest.raises(WrongParty):
        e.submit_sm_result("T", tid, payload.sm["honest"])
    e.submit_sm_result("S", tid, payload.sm["honest"])
    with pytest.raises(WrongParty):
        e.upload_task("S", tid, payload.queries, payload.check)
    e.upload_task("C", tid, payload.queries, payload.check)
    with pytest.raises(WrongParty):
        e.get_task("T", tid, 5)
    with pytest.raises(UnknownTask):
        e.settle(42)
    with pytest.raises(ValueError):
        e.upload_sm("C", payload.batch, 0)


def test_log_is_json_lines(payload, tmp_path):
    e = fresh()
    e.settle(to_pair_returned(e, payload))
    path = tmp_path / "escrow.jsonl"
    e.write_log(path)
    lines = path.read_text().splitlines()
    entries = [json.loads(line) for line in lines]
    assert [x["op"] for x in entries] == [
        "upload_sm", "get_sm", "submit_sm_result", "upload_task", "get_task", "submit_result", "settle",
    ]
    assert [x["seq"] for x in entries] == list(range(1, 8))
    assert entries[0]["phase_before"] is None and entries[-1]["phase_after"] == "SettledPaid"
    for a, b in zip(entries, entries[1:]):
        assert a["phase_after"] == b["phase_before"]
    assert all(sum(x["amounts"].values()) == 0 for x in entries)
    assert set(entries[0]) == {"seq", "op", "task", "party", "amounts", "phase_before", "phase_after"}


def test_check_rejects_duplicates_and_strangers(payload):
    good = payload.pairs["honest"]
    assert check_pair_responses(good, payload.check)
    assert check_pair_responses(list(reversed(good)), payload.check)
    assert not check_pair_responses(good + good[:1], payload.check)
    assert not check_pair_responses(good[:3] + good[:1], payload.check)
    stranger = good[0].__class__(b"\xee" * 8, good[0].value)
    assert not check_pair_responses(good[:3] + [stranger], payload.check)


def test_run_escrowed_honest_and_tampered(toy):
    rng = random.Random(3)
    A, B = rand_point(toy, rng), rand_point(toy, rng)
    e = fresh()
    run = run_escrowed(e, "C", "S", (Direct(toy), Direct(toy)), A, B, toy, 10, 5, rng)
    assert run.outcome.paid and run.value == tate_pairing(A, B, toy)
    assert e.ledger.balances() == {"C": 90, "S": 60, "T": 50, ESCROW: 0}

    class Cheat(Direct):
        def pair(self, q):
            resp = super().pair(q)
            return resp.__class__(resp.tag, resp.value * resp.value)

    run = run_escrowed(e, "C", "S", (Direct(toy), Cheat(toy)), A, B, toy, 10, 5, rng)
    assert not run.outcome.paid and run.value is None
    assert run.outcome.phase is Phase.SETTLED_REFUNDED

    class BadSM(Direct):
        def sm_u2(self, q):
            return INFINITY

    run = run_escrowed(e, "C", "S", (Direct(toy), BadSM(toy)), A, B, toy, 10, 5, rng)
    assert not run.outcome.paid and e.task(run.task_id).pair_queries is None
    assert e.ledger.total() == 200

    with pytest.raises(ValueError):
        run_escrowed(e, "C", "S", (Direct(toy), Direct(toy)), INFINITY, B, toy, 10, 5, rng)


_op = st.tuples(
    st.sampled_from(["upload", "get_sm", "sm_ok", "sm_bad", "task", "dispute", "get_task",
                     "res_ok", "res_bad", "settle"]),
    st.sampled_from(["C", "S", "T"]),
    st.integers(1, 3),
    st.integers(1, 60),
)


@given(st.lists(_op, max_size=30))
@settings(max_examples=150, deadline=None)
def test_random_traces_conserve_funds(payload, ops):
    e = fresh()
    total = e.ledger.total()
    calls = {
        "upload": lambda who, tid, amt: e.upload_sm(who, payload.batch, amt),
        "get_sm": lambda who, tid, amt: e.get_sm(who, tid, amt),
        "sm_ok": lambda who, tid, amt: e.submit_sm_result(who, tid, payload.sm["honest"]),
        "sm_bad": lambda who, tid, amt: e.submit_sm_result(who, tid, payload.sm["bad"]),
        "task": lambda who, tid, amt: e.upload_task(who, tid, payload.queries, payload.check),
        "dispute": lambda who, tid, amt: e.dispute_sm(who, tid, payload.secrets),
        "get_task": lambda who, tid, amt: e.get_task(who, tid, amt),
        "res_ok": lambda who, tid, amt: e.submit_result(who, tid, payload.pairs["honest"]),
        "res_bad": lambda who, tid, amt: e.submit_result(who, tid, payload.pairs["scaled"]),
        "settle": lambda who, tid, amt: e.settle(tid),
    }
    for op, who, tid, amt in ops:
        try:
            calls[op](who, tid, amt)
        except (esc_mod.EscrowError, ValueError):
            pass
        assert escrow_model.violations(e, payload, total) == []


def test_exploration_finds_nothing(toy):
    res = escrow_model.explore(toy, depth=6)
    assert res.violations == []
    assert res.states > 40


def test_exploration_catches_a_broken_settle(toy, monkeypatch):
    # sanity check of the explorer itself: pay out whatever was returned
    monkeypatch.setattr(esc_mod, "check_pair_responses", lambda responses, check: True)
    res = escrow_model.explore(toy, depth=8)
    assert any("paid for wrong answers" in v for v in res.violations)
