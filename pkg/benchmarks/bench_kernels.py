#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure NumPy fallback.

Times the two hot paths on a family-sweep sized workload: per-pair
Kronecker columns and the full short-polynomial sweep.  Run from the
repository root after building the extension:

    python benchmarks/bench_kernels.py [--N 1000000]
"""

import argparse
import time

import numpy as np

from twistdist import _kernels_py
from twistdist.family import FamilyConfig, polynomial_weights
from twistdist.ntcore import enumerate_discriminants

try:
    from twistdist import _kernels_cy
except ImportError:
    _kernels_cy = None


def timeit(fn, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=1_000_000)
    args = ap.parse_args()

    cfg = FamilyConfig(N=args.N)
    discs = enumerate_discriminants(cfg.N)
    ns, weights = polynomial_weights(cfg)
    print(f"N = {cfg.N}: {len(discs)} discriminants, "
          f"{len(ns)} prime powers (Y = {cfg.Y:.1f})")

    backends = [("python", _kernels_py)]
    if _kernels_cy is not None:
        backends.append(("cython", _kernels_cy))
    else:
        print("compiled extension not available; benchmarking fallback only")

    results = {}
    for name, impl in backends:
        t_col, col = timeit(lambda: impl.kronecker_col(discs, 77))
        t_sweep, vals = timeit(lambda: impl.sweep_sum(discs, ns, weights), repeat=1)
        results[name] = (t_col, t_sweep, col, vals)
        print(f"{name:>7}: kronecker_col {t_col*1e3:8.1f} ms   "
              f"sweep {t_sweep:8.2f} s")

    if len(results) == 2:
        pc, ps, col_p, val_p = results["python"]
        cc, cs, col_c, val_c = results["cython"]
        assert np.array_equal(col_p, col_c), "backend mismatch in kronecker_col"
        assert np.array_equal(val_p, val_c), "backend mismatch in sweep_sum"
        print(f"agreement: bit-identical; speedup kronecker_col x{pc/cc:.1f}, "
              f"sweep x{ps/cs:.1f}")


if __name__ == "__main__":
    main()
