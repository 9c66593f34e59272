"""Compiled kernels vs the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from genperm import kernels
from genperm.kernels import python as fallback


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(rng):
    for P, Q in [(40, 40), (200, 200), (600, 600)]:
        D = rng.normal(size=(P, Q))
        yield f"max_rect_discrepancy float {P}x{Q}", "max_rect_discrepancy", (D,)
        Di = rng.integers(-1000, 1000, size=(P, Q)).astype(np.int64)
        yield f"max_rect_discrepancy int64 {P}x{Q}", "max_rect_discrepancy", (Di,)
    for P in [200, 2000]:
        a = rng.random((P, P)) / P**2
        b = rng.random((P, P)) / P**2
        idx = np.arange(P, dtype=np.int64)
        one = np.ones(P)
        yield f"cdf_gap {P}x{P}", "cdf_gap", (idx, one, idx, one, a, idx, one, idx, one, b)
    for m, k in [(60, 3), (30, 5), (16, 7)]:
        vals = rng.permutation(m).astype(np.int64) + 1
        yield f"pattern_counts m={m} k={k}", "pattern_counts", (vals, k)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not kernels.HAVE_EXTENSION:
        print("compiled extension not available; only the fallback would run")
        return
    rng = np.random.default_rng(args.seed)
    print(f"{'case':42s} {'compiled':>10s} {'fallback':>10s} {'speedup':>8s}")
    for name, fn, fargs in cases(rng):
        tc, oc = _time(lambda: getattr(kernels, fn)(*fargs), args.repeat)
        tp, op = _time(lambda: getattr(fallback, fn)(*fargs), args.repeat)
        if fn == "pattern_counts":
            assert np.array_equal(oc, op)
        else:
            assert np.isclose(float(oc[0]), float(op[0]))
        print(f"{name:42s} {tc * 1e3:9.2f}ms {tp * 1e3:9.2f}ms {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
