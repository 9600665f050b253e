"""Seeded adversarial scenarios over either transport."""

from __future__ import annotations

import dataclasses
import itertools
import random
import time

from .. import opcount
from ..bpsm import DEFAULT_CHECK_BITS, BPSMClient
from ..curve import scalar_multi
from ..errors import VerificationFailed
from ..pairing import PairingParams, tate_pairing
from ..sm import SMClient
from .server import ServerBehavior, ServerLogic
from .transport import RemoteServer, connect, serve

ACCEPTED_CORRECT = "accepted-correct"
REJECTED = "rejected"
ACCEPTED_WRONG = "accepted-wrong"

_keys = itertools.count()


@dataclasses.dataclass(frozen=True)
class ScenarioConfig:
    u1: ServerBehavior
    u2: ServerBehavior
    trials: int
    params: PairingParams
    seed: int = 0
    protocol: str = "bpsm"  # or "sm"
    transport: str = "inproc"  # or "tcp"
    check_bits: int = DEFAULT_CHECK_BITS

    def __post_init__(self):
        if not (self.u1.honest or self.u2.honest):
            raise ValueError("one-malicious model: at most one server may misbehave")
        if self.protocol not in ("bpsm", "sm"):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.transport not in ("inproc", "tcp"):
            raise ValueError(f"unknown transport {self.transport!r}")

    def label(self) -> str:
        return f"{self.protocol}[U1={self.u1.label()}, U2={self.u2.label()}]"


@dataclasses.dataclass
class ScenarioReport:
    label: str
    outcomes: list[str]
    stages: list[str | None]
    client_counts: dict[str, int]
    server_counts: dict[str, dict[str, int]]
    wall_times: list[float]

    def tally(self) -> dict[str, int]:
        return {k: self.outcomes.count(k) for k in (ACCEPTED_CORRECT, REJECTED, ACCEPTED_WRONG)}

    @property
    def accepted_wrong(self) -> int:
        return self.outcomes.count(ACCEPTED_WRONG)

    def comparable(self) -> dict:
        """Everything except wall-clock timings."""
        d = dataclasses.asdict(self)
        d.pop("wall_times")
        return d


def run_scenario(config: ScenarioConfig) -> ScenarioReport:
    pp = config.params
    seed = config.seed
    inputs = random.Random(f"{seed}:inputs")
    client_rng = random.Random(f"{seed}:client")
    logics = {
        name: ServerLogic(pp, behavior, random.Random(f"{seed}:{name}"), name)
        for name, behavior in (("U1", config.u1), ("U2", config.u2))
    }
    running = []
    handles = []
    try:
        for name, logic in logics.items():
            if config.transport == "inproc":
                endpoint = f"inproc:scenario-{next(_keys)}-{name}"
            else:
                endpoint = "127.0.0.1:0"
            srv = serve(endpoint, logic)
            running.append(srv)
            handles.append(RemoteServer(connect(srv.endpoint), pp))
        u1, u2 = handles
        client_counts = opcount.OpCounts()
        outcomes: list[str] = []
        stages: list[str | None] = []
        walls: list[float] = []
        G, E, r = pp.generator, pp.curve, pp.r
        for _ in range(config.trials):
            if config.protocol == "bpsm":
                A = scalar_multi(G, inputs.randrange(1, r), E)
                B = scalar_multi(G, inputs.randrange(1, r), E)
                expected = tate_pairing(A, B, pp)
                client = BPSMClient(pp, u1, u2, client_rng, config.check_bits)
                run = lambda: client.outsource(A, B)  # noqa: E731
            else:
                P = scalar_multi(G, inputs.randrange(1, r), E)
                c = inputs.randrange(1, r)
                expected = scalar_multi(P, c, E)
                sm = SMClient(E, u1, u2, client_rng)
                run = lambda: sm.multiply(c, P)  # noqa: E731
            t0 = time.perf_counter()
            stage = None
            with opcount.counting(client_counts):
                try:
                    got = run()
                except VerificationFailed as exc:
                    got, stage = None, exc.stage
            walls.append(time.perf_counter() - t0)
            if got is None:
                outcomes.append(REJECTED)
            elif got == expected:
                outcomes.append(ACCEPTED_CORRECT)
            else:
                outcomes.append(ACCEPTED_WRONG)
            stages.append(stage)
        return ScenarioReport(
            label=config.label(),
            outcomes=outcomes,
            stages=stages,
            client_counts=client_counts.as_dict(),
            server_counts={n: lg.counts.as_dict() for n, lg in logics.items()},
            wall_times=walls,
        )
    finally:
        for h in handles:
            h.close()
        for srv in running:
            srv.shutdown()


def one_malicious_matrix(behaviors: list[ServerBehavior]) -> list[tuple[ServerBehavior, ServerBehavior]]:
    """(honest, honest) plus every behavior on each server in turn."""
    honest = ServerBehavior()
    pairs = [(honest, honest)]
    for b in behaviors:
        if b.honest:
            continue
        pairs.append((b, honest))
        pairs.append((honest, b))
    return pairs


def default_adversaries(scope: str = "all") -> list[ServerBehavior]:
    """The shipped adversaries; ``scope`` confines cheating to one stage."""
    return [
        ServerBehavior("random", scope=scope),
        ServerBehavior("bitflip", policy="random", scope=scope),
        ServerBehavior("bitflip", policy="low", scope=scope),
        ServerBehavior("bitflip", policy="high", scope=scope),
        ServerBehavior("identity", scope=scope),
        ServerBehavior("scale", unit=2, scope=scope),
        ServerBehavior("scale", guess_bits=16, scope=scope),
        ServerBehavior("lazy", scope=scope),
    ]
