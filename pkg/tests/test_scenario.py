import pytest

from pairsource.harness import (
    ACCEPTED_CORRECT,
    ACCEPTED_WRONG,
    REJECTED,
    ScenarioConfig,
    ServerBehavior,
    default_adversaries,
    one_malicious_matrix,
    run_scenario,
)

H = ServerBehavior()


def cfg(pp, u1=H, u2=H, trials=10, **kw):
    return ScenarioConfig(u1, u2, trials, pp, **kw)


def test_honest_pair_always_accepts(toy):
    for protocol, n in (("bpsm", 100), ("sm", 100)):
        rep = run_scenario(cfg(toy, trials=n, protocol=protocol, seed=1))
        assert rep.tally() == {ACCEPTED_CORRECT: n, REJECTED: 0, ACCEPTED_WRONG: 0}
        assert rep.stages == [None] * n


def test_deterministic_under_seed(toy):
    bad = ServerBehavior.parse("bitflip")
    a = run_scenario(cfg(toy, u1=bad, trials=15, seed=3))
    b = run_scenario(cfg(toy, u1=bad, trials=15, seed=3))
    assert a.comparable() == b.comparable()
    assert len(a.wall_times) == 15


def test_one_malicious_enforced(toy):
    bad = ServerBehavior("random")
    with pytest.raises(ValueError):
        cfg(toy, u1=bad, u2=bad)
    with pytest.raises(ValueError):
        cfg(toy, protocol="quantum")
    with pytest.raises(ValueError):
        cfg(toy, transport="pigeon")


def test_matrix_shape():
    advs = default_adversaries()
    pairs = one_malicious_matrix(advs + [H])
    assert pairs[0] == (H, H)
    assert len(pairs) == 1 + 2 * len(advs)
    assert all(a.honest or b.honest for a, b in pairs)


@pytest.mark.parametrize("scope", ["all", "pairing"])
@pytest.mark.parametrize("behavior", default_adversaries(), ids=lambda b: b.label())
def test_adversaries_never_accepted_wrong_bpsm(toy, behavior, scope):
    behavior = ServerBehavior.parse(behavior.label() + ("" if scope == "all" else "@" + scope))
    for u1, u2 in ((behavior, H), (H, behavior)):
        rep = run_scenario(cfg(toy, u1, u2, trials=8, seed=5))
        assert rep.accepted_wrong == 0
        assert rep.outcomes.count(REJECTED) == 8
        if scope == "pairing":
            assert set(rep.stages) == {"pairing"}


@pytest.mark.parametrize("behavior", default_adversaries(), ids=lambda b: b.label())
def test_adversaries_never_accepted_wrong_sm(toy, behavior):
    for u1, u2 in ((behavior, H), (H, behavior)):
        rep = run_scenario(cfg(toy, u1, u2, trials=20, protocol="sm", seed=6))
        assert rep.accepted_wrong == 0
        # a lazy server has nothing stale to replay on its first query
        assert rep.outcomes.count(REJECTED) >= (19 if behavior.kind == "lazy" else 20)
        assert set(rep.stages) - {None} == {"sm"}


def test_pairing_scoped_adversary_passes_sm_stage(toy):
    # an SM-only protocol never reaches the stage this adversary attacks
    rep = run_scenario(cfg(toy, u1=ServerBehavior("random", scope="pairing"), trials=10,
                           protocol="sm", seed=7))
    assert rep.tally()[ACCEPTED_CORRECT] == 10


def test_behavior_parse_and_label():
    cases = {
        "honest": "honest",
        "bitflip": "bitflip:random",
        "bitflip:high@sm": "bitflip:high@sm",
        "scale": "scale:2",
        "scale:5@pairing": "scale:5@pairing",
        "scale-consistent": "scale-consistent:16",
        "scale-consistent:8": "scale-consistent:8",
        "lazy@pairing": "lazy@pairing",
    }
    for text, label in cases.items():
        b = ServerBehavior.parse(text)
        assert b.label() == label
        assert ServerBehavior.parse(b.label()) == b
    for bad in ("sneaky", "bitflip:middle", "lazy:3", "random@elsewhere"):
        with pytest.raises(ValueError):
            ServerBehavior.parse(bad)


def test_client_counts_recorded(toy):
    rep = run_scenario(cfg(toy, trials=5, seed=8))
    c = rep.client_counts
    assert c["gt_exp"] == 5 and c["gt_mul"] == 10
    assert c["pairing"] == c["scalar_mult"] == 0
    assert rep.server_counts["U1"]["pairing"] == rep.server_counts["U2"]["pairing"] == 10
