"""Compiled GMP kernels versus the pure-Python fallback.

    python3 benchmarks/bench_backends.py [--presets toy-64,p160,p256] [--reps 50]

Prints one line per kernel and preset with the mean time for each backend
and the speedup.
"""

import argparse
import random
import statistics
import time

from pairsource import _backend, params
from pairsource.algebra import rand_prime
from pairsource.curve import scalar_multi
from pairsource.pairing import tate_pairing
from pairsource.sm import sm_server_u1, sm_transform


def _time(fn, reps):
    out = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.fmean(out) * 1e3


def kernels_for(pp, rng):
    E = pp.curve
    A = scalar_multi(pp.generator, rng.randrange(1, pp.r), E)
    B = scalar_multi(pp.generator, rng.randrange(1, pp.r), E)
    qu1, _, _ = sm_transform(A, rng.randrange(1, pp.r), E, rng)
    bits = pp.p.bit_length()
    return {
        "scalar_mult F_p": lambda: scalar_multi(A, rng.randrange(1, pp.r), E),
        "SM server U1 (Z_N)": lambda: sm_server_u1(qu1),
        "tate_pairing": lambda: tate_pairing(A, B, pp),
        f"rand_prime({bits})": lambda: rand_prime(bits, rng),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--presets", default="toy-64,p160,p256")
    ap.add_argument("--reps", type=int, default=50)
    args = ap.parse_args()
    if _backend.compiled is None:
        raise SystemExit("compiled kernels not built; run pip install -e . first")

    print(f"{'preset':8} {'kernel':22} {'compiled ms':>12} {'pure ms':>10} {'speedup':>8}")
    for name in args.presets.split(","):
        pp = params.load(name)
        for label, fn in kernels_for(pp, random.Random(1)).items():
            res = {}
            for backend in ("compiled", "pure"):
                _backend.use(backend)
                fn()  # warm up
                res[backend] = _time(fn, args.reps)
            _backend.use("compiled")
            print(f"{name:8} {label:22} {res['compiled']:12.3f} {res['pure']:10.3f} "
                  f"{res['pure'] / res['compiled']:7.1f}x")


if __name__ == "__main__":
    main()
