"""Compiled vs numpy timings for shooting, dense assembly and the O(n) R/Q apply.

    python3 benchmarks/bench_kernels.py [--sizes 128 512 2048] [--repeats 7]
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from lag2ch import factor_kernels


def timeit(fn, repeats):
    fn()  # warm-up (includes JIT compile / cache load)
    out = []
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t)
    return statistics.median(out)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[128, 512, 2048])
    ap.add_argument("--repeats", type=int, default=7)
    ap.add_argument("--dxi", type=float, default=0.05)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'n':>6} {'stage':<10} {'numba [ms]':>11} {'numpy [ms]':>11} {'speedup':>8}")
    for n in args.sizes:
        a = rng.uniform(0.2, 2.0, n)
        f1, f2 = rng.normal(size=n), rng.uniform(0, 1, n)
        fj, fn_ = factor_kernels(a, args.dxi, jit=True), factor_kernels(a, args.dxi, jit=False)
        rows = {
            "shoot": (lambda: factor_kernels(a, args.dxi, jit=True),
                      lambda: factor_kernels(a, args.dxi, jit=False)),
            "assemble": (fj.assemble, fn_.assemble),
            # the numpy fallback assembles densely and multiplies
            "R/Q": (lambda: fj.apply(f1, f2), lambda: fn_.apply(f1, f2)),
        }
        for name, (fa, fb) in rows.items():
            ta, tb = timeit(fa, args.repeats), timeit(fb, args.repeats)
            print(f"{n:>6} {name:<10} {1e3 * ta:>11.3f} {1e3 * tb:>11.3f} {tb / ta:>8.1f}")


if __name__ == "__main__":
    main()
