"""Phase timings and operation counts for outsourced versus local pairings.

Every trial runs the full two-server protocol in-process against honest
servers and splits the wall time into phases:

    transform      client blinding: coefficients plus the six SM transforms
    sm_total       the whole SM stage (client and server work)
    pair_queries   the four server-side pairings
    verify         the client's G_T check
    recover        the client's recovery
    client_total   all client-side work
    local_pairing  computing e(A, B) directly
"""

from __future__ import annotations

import csv
import dataclasses
import io
import random
import statistics
import time
from typing import Iterable

from . import opcount
from .bpsm import (
    DEFAULT_CHECK_BITS,
    assemble_queries,
    bpsm_recover,
    bpsm_server_pair,
    bpsm_verify,
    gen_coeffs,
)
from .curve import INFINITY, ECPoint, scalar_multi
from .errors import ComputationFailed
from .opcount import OpCounts
from .pairing import PairingParams, tate_pairing
from .sm import SMResponse, sm_recover, sm_server_u1, sm_server_u2, sm_transform, sm_verify

PHASES = ("transform", "sm_total", "pair_queries", "verify", "recover", "client_total", "local_pairing")
COUNTED = ("gt_exp", "gt_mul", "mod_mul", "mod_inv", "prime_gen", "scalar_mult", "pairing")
COLUMNS = ["curve", "phase", "mean_ms", "stddev_ms", "trials"] + [
    f"{party}_{op}" for party in ("client", "server") for op in COUNTED
]


@dataclasses.dataclass
class _Trial:
    ms: dict[str, float]
    client: dict[str, OpCounts]
    server: dict[str, OpCounts]

    @classmethod
    def empty(cls) -> "_Trial":
        return cls(
            dict.fromkeys(PHASES, 0.0),
            {ph: OpCounts() for ph in PHASES},
            {ph: OpCounts() for ph in PHASES},
        )


def _random_point(pp: PairingParams, rng: random.Random) -> ECPoint:
    with opcount.not_counting():
        return scalar_multi(pp.generator, rng.randrange(1, pp.r), pp.curve)


def _sm(c: int, P: ECPoint, pp: PairingParams, rng: random.Random, t: _Trial,
        client_side: OpCounts) -> ECPoint:
    c %= pp.r
    if P is INFINITY or c == 0:
        return INFINITY
    while True:
        t0 = time.perf_counter()
        with opcount.counting() as blind:
            qu1, qu2, secret = sm_transform(P, c, pp.curve, rng)
        t1 = time.perf_counter()
        t.client["transform"].merge(blind)
        client_side.merge(blind)
        try:
            with opcount.counting(t.server["sm_total"]):
                q1, q3 = sm_server_u1(qu1)
                q2 = sm_server_u2(qu2)
        except ComputationFailed:
            t.ms["transform"] += (t1 - t0) * 1e3
            t.ms["sm_total"] += (time.perf_counter() - t0) * 1e3
            continue
        t2 = time.perf_counter()
        with opcount.counting(client_side):
            R = sm_recover(sm_verify(SMResponse(q1, q3, q2), secret))
        t3 = time.perf_counter()
        t.ms["transform"] += (t1 - t0) * 1e3
        t.ms["sm_total"] += (t3 - t0) * 1e3
        t.ms["client_total"] += ((t1 - t0) + (t3 - t2)) * 1e3
        return R


def run_trial(pp: PairingParams, rng: random.Random, m: int = DEFAULT_CHECK_BITS) -> _Trial:
    t = _Trial.empty()
    A, B = _random_point(pp, rng), _random_point(pp, rng)
    total = t.client["client_total"]

    t0 = time.perf_counter()
    with opcount.counting(t.client["local_pairing"]):
        expected = tate_pairing(A, B, pp)
    t.ms["local_pairing"] = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    with opcount.counting(t.client["transform"]):
        s = gen_coeffs(pp.r, m, rng)
    dt = (time.perf_counter() - t0) * 1e3
    t.ms["transform"] += dt
    t.ms["client_total"] += dt
    total.merge(t.client["transform"])

    sm_client = OpCounts()
    a1A = _sm(s.a1, A, pp, rng, t, sm_client)
    b1A = _sm(s.b1, A, pp, rng, t, sm_client)
    a2B = _sm(s.a2, B, pp, rng, t, sm_client)
    b2B = _sm(s.b2, B, pp, rng, t, sm_client)
    xb1A = _sm(s.x, b1A, pp, rng, t, sm_client)
    xa2B = _sm(s.x, a2B, pp, rng, t, sm_client)
    total.merge(sm_client)
    t.client["sm_total"].merge(sm_client)

    t0 = time.perf_counter()
    with opcount.counting(total):
        to_u1, to_u2 = assemble_queries(a1A, b1A, a2B, b2B, xb1A, xa2B, s, rng)
    t.ms["client_total"] += (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    values = {}
    with opcount.counting(t.server["pair_queries"]):
        for q in to_u1 + to_u2:
            values[s.roles[q.tag]] = bpsm_server_pair(q, pp).value
    t.ms["pair_queries"] = (time.perf_counter() - t0) * 1e3

    t0 = time.perf_counter()
    with opcount.counting(t.client["verify"]):
        verdict = bpsm_verify(values["H1"], values["H2"], values["L1"], values["L2"], s.x)
    t1 = time.perf_counter()
    with opcount.counting(t.client["recover"]):
        out = bpsm_recover(verdict)
    t2 = time.perf_counter()
    total.merge(t.client["verify"])
    total.merge(t.client["recover"])
    t.ms["verify"] = (t1 - t0) * 1e3
    t.ms["recover"] = (t2 - t1) * 1e3
    t.ms["client_total"] += (t2 - t0) * 1e3

    if out != expected:
        raise AssertionError("outsourced pairing disagrees with the local pairing")
    return t


def _fold(counts: list[OpCounts], name: str) -> float:
    return statistics.fmean(getattr(c, name) for c in counts)


def bench_preset(pp: PairingParams, trials: int, seed: int = 0,
                 m: int = DEFAULT_CHECK_BITS) -> list[dict]:
    """One row per phase: mean/stddev ms over ``trials`` and mean op counts per trial."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(f"{seed}:{pp.name}")
    runs = [run_trial(pp, rng, m) for _ in range(trials)]
    rows = []
    for ph in PHASES:
        ms = [t.ms[ph] for t in runs]
        row = {
            "curve": pp.name,
            "phase": ph,
            "mean_ms": statistics.fmean(ms),
            "stddev_ms": statistics.stdev(ms) if len(ms) > 1 else 0.0,
            "trials": trials,
        }
        for op in COUNTED:
            row[f"client_{op}"] = _fold([t.client[ph] for t in runs], op)
            row[f"server_{op}"] = _fold([t.server[ph] for t in runs], op)
        rows.append(row)
    return rows


def bench(presets: Iterable[PairingParams], trials: int, seed: int = 0,
          m: int = DEFAULT_CHECK_BITS) -> list[dict]:
    rows = []
    for pp in presets:
        rows.extend(bench_preset(pp, trials, seed, m))
    return rows


def ratio(rows: list[dict], curve: str) -> float:
    """client_total / local_pairing for one curve."""
    by_phase = {r["phase"]: r["mean_ms"] for r in rows if r["curve"] == curve}
    return by_phase["client_total"] / by_phase["local_pairing"]


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()
