import contextlib
import itertools
import random
import sys

import pytest

from pairsource import opcount, params
from pairsource.bpsm import bpsm_server_pair
from pairsource.curve import scalar_multi
from pairsource.harness import RemoteServer, ServerBehavior, ServerLogic, connect, serve
from pairsource.pairing import params_from_primes
from pairsource.sm import sm_server_u1, sm_server_u2

_keys = itertools.count()


@pytest.fixture(scope="session")
def toy():
    return params.load("toy-64")


@pytest.fixture(scope="session")
def p160():
    return params.load("p160")


@pytest.fixture(scope="session")
def tiny():
    # 983 = 3 mod 4, 984 = 24 * 41
    return params_from_primes(983, 41, "tiny")


def rand_point(pp, rng):
    return scalar_multi(pp.generator, rng.randrange(1, pp.r), pp.curve)


class Direct:
    """Honest server handle calling the server functions with no wire in between.

    Like a real server it counts its own work separately from the client's.
    """

    def __init__(self, pp):
        self.pp = pp
        self.calls = 0
        self.counts = opcount.OpCounts()

    def sm_u1(self, q):
        self.calls += 1
        with opcount.counting(self.counts):
            return sm_server_u1(q)

    def sm_u2(self, q):
        self.calls += 1
        with opcount.counting(self.counts):
            return sm_server_u2(q)

    def pair(self, q):
        self.calls += 1
        with opcount.counting(self.counts):
            return bpsm_server_pair(q, self.pp)


@contextlib.contextmanager
def wired(pp, u1="honest", u2="honest", transport="inproc", seed=0):
    """Two served ServerLogic instances and client handles to them."""
    running, handles = [], []
    try:
        for name, b in (("U1", u1), ("U2", u2)):
            if isinstance(b, str):
                b = ServerBehavior.parse(b)
            logic = ServerLogic(pp, b, random.Random(f"{seed}:{name}"), name)
            where = f"inproc:test-{next(_keys)}" if transport == "inproc" else "127.0.0.1:0"
            srv = serve(where, logic)
            running.append(srv)
            handles.append(RemoteServer(connect(srv.endpoint), pp))
        yield tuple(handles)
    finally:
        for h in handles:
            h.close()
        for srv in running:
            srv.shutdown()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = mod.summary_lines() if mod is not None else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
