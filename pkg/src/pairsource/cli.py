"""pairsource command line: gen | demo | serve | bench | scenarios.

Exit codes: 0 success, 2 verification failure, 3 transport failure, 4 usage.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import random
import sys
import threading
from pathlib import Path

from . import bench as benchmod
from . import params as paramsmod
from ._backend import NAME as BACKEND
from .bpsm import DEFAULT_CHECK_BITS, BPSMClient
from .curve import scalar_multi
from .errors import TransportError, VerificationFailed
from .harness import (
    ScenarioConfig,
    ServerBehavior,
    ServerLogic,
    default_adversaries,
    one_malicious_matrix,
    run_scenario,
)
from .harness.transport import RemoteServer, connect, serve
from .pairing import ParameterSearchExhausted, tate_pairing

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_VERIFY = 2
EXIT_TRANSPORT = 3
EXIT_USAGE = 4

SUITES = ("smoke", "sweep", "checkability", "transport")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("PAIRSOURCE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"PAIRSOURCE_SEED must be an integer, got {env!r}") from None
    return random.SystemRandom().getrandbits(32)


def _behavior(text: str, stage: str) -> ServerBehavior:
    if "@" not in text and text.strip().lower() != "honest":
        text = f"{text}@{stage}"
    try:
        return ServerBehavior.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(spec: str):
    try:
        return paramsmod.load(spec)
    except FileNotFoundError:
        raise UsageError(f"no preset or parameter file named {spec!r}") from None


# -- gen


def cmd_gen(args) -> int:
    seed = _seed(args.seed)
    if args.bits < 32:
        raise UsageError("--bits must be at least 32")
    try:
        pp = paramsmod.gen(args.bits, seed, args.name)
    except ParameterSearchExhausted as exc:
        print(f"parameter search failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    text = paramsmod.dumps(pp)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}: p {pp.p.bit_length()} bits, r {pp.r.bit_length()} bits (seed {seed})")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- demo


class _Tracing:
    """Wraps a server handle and counts what goes through it."""

    def __init__(self, inner, name: str):
        self.inner = inner
        self.name = name
        self.sm = 0
        self.pairs = 0

    def sm_u1(self, q):
        self.sm += 1
        return self.inner.sm_u1(q)

    def sm_u2(self, q):
        self.sm += 1
        return self.inner.sm_u2(q)

    def pair(self, q):
        self.pairs += 1
        return self.inner.pair(q)


def cmd_demo(args) -> int:
    pp = _load(args.params)
    seed = _seed(args.seed)
    b1 = _behavior(args.u1, args.cheat_stage)
    b2 = _behavior(args.u2, args.cheat_stage)
    if not (b1.honest or b2.honest):
        raise UsageError("at most one server may misbehave")
    rng = random.Random(seed)

    print(f"params     {pp.name}: p {pp.p.bit_length()} bits, r {pp.r.bit_length()} bits, backend {BACKEND}")
    with contextlib.ExitStack() as stack:
        if args.connect:
            endpoints = args.connect.split(",")
            if len(endpoints) != 2:
                raise UsageError("--connect takes two endpoints: U1,U2")
            print(f"servers    U1 at {endpoints[0]}, U2 at {endpoints[1]}")
        else:
            endpoints = []
            for name, b in (("U1", b1), ("U2", b2)):
                where = f"inproc:demo-{name}-{seed}" if args.transport == "inproc" else "127.0.0.1:0"
                logic = ServerLogic(pp, b, random.Random(f"{seed}:{name}"), name)
                srv = stack.enter_context(serve(where, logic))
                endpoints.append(srv.endpoint)
            print(f"servers    U1 {b1.label()}, U2 {b2.label()} over {args.transport}")
        handles = []
        for name, ep in zip(("U1", "U2"), endpoints):
            remote = RemoteServer(connect(ep), pp)
            stack.callback(remote.close)
            handles.append(_Tracing(remote, name))
        u1, u2 = handles

        A = scalar_multi(pp.generator, rng.randrange(1, pp.r), pp.curve)
        B = scalar_multi(pp.generator, rng.randrange(1, pp.r), pp.curve)
        print(f"inputs     A = ({A.x:#x}, {A.y:#x})")
        print(f"           B = ({B.x:#x}, {B.y:#x})")
        client = BPSMClient(pp, u1, u2, rng, args.m)
        session = client.new_session()
        print(f"storage    {0 if session.is_empty() else '?'} bytes precomputed before the inputs arrived")
        try:
            got = client.outsource(A, B, session)
        except VerificationFailed as exc:
            sm_calls = u1.sm + u2.sm
            print(f"SM stage   {sm_calls} server calls")
            if exc.stage == "pairing":
                print(f"pairing    {u1.pairs + u2.pairs} queries answered; check L1*L2 == (H1*H2)^x failed")
            print(f"REJECTED at {'SM' if exc.stage == 'sm' else exc.stage} stage")
            return EXIT_VERIFY
        s = session.secret
        print(f"blinding   a1a2 + b1b2 = 1 mod r, check exponent x of {s.x.bit_length()} bits")
        print(f"SM stage   6 blinded multiplications verified ({u1.sm + u2.sm} server calls)")
        print(f"pairing    {u1.pairs} queries to U1, {u2.pairs} to U2, order shuffled {s.swapped}")
        print("check      L1*L2 == (H1*H2)^x: pass")
        print(f"recovered  e(A, B) = {got}")
        expected = tate_pairing(A, B, pp)
        print(f"local      e(A, B) = {expected}")
        if got != expected:
            print("MISMATCH")
            return EXIT_VERIFY
        print("MATCH")
        return EXIT_OK


# -- serve


def cmd_serve(args) -> int:
    pp = _load(args.params)
    b = _behavior(args.behavior, args.cheat_stage)
    logic = ServerLogic(pp, b, random.Random(f"{_seed(args.seed)}:{args.name}"), args.name)
    srv = serve(args.listen, logic)
    print(f"{args.name} ({b.label()}) serving {pp.name} on {srv.endpoint}", flush=True)
    try:
        threading.Event().wait()
    except KeyboardInterrupt:
        pass
    finally:
        srv.shutdown()
    return EXIT_OK


# -- bench


def cmd_bench(args) -> int:
    presets = [_load(name) for name in args.params.split(",") if name]
    if not presets:
        raise UsageError("--params needs at least one preset")
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    rows = benchmod.bench(presets, args.trials, _seed(args.seed), args.m)
    text = benchmod.to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
        for pp in presets:
            print(f"{pp.name}: client_total / local_pairing = {benchmod.ratio(rows, pp.name):.3f}")
        print(f"wrote {args.out} ({len(rows)} rows)")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- scenarios


def _suite(name: str, pp, trials: int, seed: int) -> list[ScenarioConfig]:
    honest = ServerBehavior()
    if name == "smoke":
        return [ScenarioConfig(honest, honest, trials, pp, seed, protocol)
                for protocol in ("sm", "bpsm")]
    if name == "sweep":
        out = []
        for u1, u2 in one_malicious_matrix(default_adversaries()):
            out.append(ScenarioConfig(u1, u2, trials, pp, seed, "sm"))
        for scope in ("all", "pairing"):
            for u1, u2 in one_malicious_matrix(default_adversaries(scope)):
                if scope == "pairing" and u1.honest and u2.honest:
                    continue
                out.append(ScenarioConfig(u1, u2, trials, pp, seed, "bpsm"))
        return out
    if name == "checkability":
        cheat = ServerBehavior("scale", guess_bits=16, scope="pairing")
        return [ScenarioConfig(cheat, honest, trials, pp, seed, check_bits=16),
                ScenarioConfig(honest, cheat, trials, pp, seed, check_bits=16)]
    if name == "transport":
        return [ScenarioConfig(u1, u2, trials, pp, seed, "bpsm", transport)
                for u1, u2 in one_malicious_matrix([ServerBehavior("bitflip", scope="pairing")])
                for transport in ("inproc", "tcp")]
    raise UsageError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")


def cmd_scenarios(args) -> int:
    pp = _load(args.params)
    seed = _seed(args.seed)
    configs = _suite(args.suite, pp, args.trials, seed)
    wrong = 0
    reports = []
    for cfg in configs:
        rep = run_scenario(cfg)
        reports.append((cfg, rep))
        t = rep.tally()
        wrong += rep.accepted_wrong
        status = "FAIL" if rep.accepted_wrong else "ok"
        print(f"{status:4} {cfg.label():58} {cfg.transport:6} correct={t['accepted-correct']} "
              f"rejected={t['rejected']} wrong={t['accepted-wrong']}", flush=True)
    if args.suite == "transport":
        for (c1, r1), (c2, r2) in zip(reports[::2], reports[1::2]):
            same = r1.comparable() == r2.comparable()
            print(f"{'ok' if same else 'FAIL':4} {c1.label()} inproc == tcp")
            if not same:
                wrong += 1
    print(f"{len(configs)} scenarios, {wrong} failures")
    return EXIT_OK if wrong == 0 else EXIT_VERIFY


# -- entry point


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pairsource", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", metavar="{gen,demo,serve,bench,scenarios}", parser_class=_Parser)
    sub.required = True

    g = sub.add_parser("gen", help="generate a parameter file")
    g.add_argument("--bits", type=int, required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--out")
    g.add_argument("--name")
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("demo", help="outsource one pairing and compare with the local oracle")
    d.add_argument("--params", default="toy-64")
    d.add_argument("--transport", choices=("inproc", "tcp"), default="inproc")
    d.add_argument("--u1", default="honest")
    d.add_argument("--u2", default="honest")
    d.add_argument("--cheat-stage", choices=("sm", "pairing", "all"), default="pairing",
                   help="stage a misbehaving server cheats in unless the behavior says @stage")
    d.add_argument("--connect", help="use running servers instead: HOST:PORT,HOST:PORT")
    d.add_argument("--m", type=int, default=DEFAULT_CHECK_BITS, help="check exponent bits")
    d.add_argument("--seed", type=int)
    d.set_defaults(func=cmd_demo)

    s = sub.add_parser("serve", help="host one server until interrupted")
    s.add_argument("--params", default="toy-64")
    s.add_argument("--listen", default="127.0.0.1:7401")
    s.add_argument("--behavior", default="honest")
    s.add_argument("--cheat-stage", choices=("sm", "pairing", "all"), default="all")
    s.add_argument("--name", default="U1")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_serve)

    b = sub.add_parser("bench", help="phase timings and op counts as CSV")
    b.add_argument("--params", default="p160,p256", help="comma-separated presets or files")
    b.add_argument("--trials", type=int, default=500)
    b.add_argument("--out")
    b.add_argument("--m", type=int, default=DEFAULT_CHECK_BITS)
    b.add_argument("--seed", type=int)
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("scenarios", help="run a scenario suite")
    c.add_argument("--suite", required=True, help=", ".join(SUITES))
    c.add_argument("--params", default="toy-64")
    c.add_argument("--trials", type=int, default=100)
    c.add_argument("--seed", type=int)
    c.set_defaults(func=cmd_scenarios)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pairsource: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VerificationFailed as exc:
        print(f"pairsource: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except TransportError as exc:
        print(f"pairsource: transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT


if __name__ == "__main__":
    sys.exit(main())
