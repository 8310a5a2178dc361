"""Compare the compiled and pure-Python sampling kernels on the Hardy schedule.

    python benchmarks/bench_sampling.py [--samples N] [--repeat R]
"""
import argparse
import time

import numpy as np

from vnhardy import _backend
from vnhardy.cli import HARDY_LAYOUT, _plus_projectors
from vnhardy.dynamics import DensityOperator, sample_reduction_sequence
from vnhardy.hardy import optimize_hardy


def bench(backend, rho, projs, n, repeat):
    prev = _backend.use(backend)
    try:
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            out = sample_reduction_sequence(rho, projs, n, np.random.default_rng(0))
            best = min(best, time.perf_counter() - t0)
    finally:
        _backend.use(prev)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    cfg = optimize_hardy().config
    rho = DensityOperator.pure(cfg.psi, HARDY_LAYOUT)
    projs = _plus_projectors(cfg, ("L1", "R1"))
    results = {}
    for name in _backend.available():
        t, out = bench(name, rho, projs, args.samples, args.repeat)
        results[name] = out
        print(f"{name:>9}: {t:8.4f} s for {args.samples} trajectories "
              f"({1e6 * t / args.samples:7.2f} us/trajectory)")
    if len(results) == 2:
        same = np.array_equal(results["compiled"], results["python"])
        print(f"identical outcomes: {same}")


if __name__ == "__main__":
    main()
