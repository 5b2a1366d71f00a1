#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Times the three hot kernels on representative shapes (per-tick flow arrays
and a long NLMS signal) and an end-to-end very_high scenario run under the
active backend. The numba timings exclude compilation (one warm-up call).

    python3 benchmarks/bench_kernels.py [--flows N] [--ticks N] [--signal N]
"""

import argparse
import time

import numpy as np

from iovsim import accel
from iovsim.config import preset
from iovsim.engine import World


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_pair(name, np_fn, nb_fn, repeats=7):
    t_np = timeit(np_fn, repeats)
    if nb_fn is not None:
        nb_fn()   # compile outside the timed region
        t_nb = timeit(nb_fn, repeats)
        speedup = t_np / t_nb if t_nb > 0 else float("inf")
        print(f"{name:24s} numpy {t_np * 1e3:9.3f} ms   numba "
              f"{t_nb * 1e3:9.3f} ms   speedup {speedup:5.2f}x")
    else:
        print(f"{name:24s} numpy {t_np * 1e3:9.3f} ms   numba unavailable")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--flows", type=int, default=5000,
                        help="active flows per service step")
    parser.add_argument("--ticks", type=int, default=600,
                        help="service steps per kernel benchmark")
    parser.add_argument("--signal", type=int, default=1_000_000,
                        help="samples for the batch NLMS benchmark")
    args = parser.parse_args()

    rng = np.random.Generator(np.random.PCG64(0))
    n, n_pms, n_pairs = args.flows, 3, 9
    pm_idx = rng.integers(0, n_pms, n)
    pair_idx = rng.integers(0, n_pairs, n)
    cpu = rng.uniform(0.5, 2.0, n)
    bw = rng.uniform(0.2, 0.9, n)
    prev = rng.uniform(5.0, 20.0, n)
    is_new = rng.random(n) < 0.05
    latency = rng.uniform(4.0, 16.0, n_pairs)
    pm_delay = rng.uniform(0.0, 30.0, n_pms)
    signal = rng.random(args.signal)

    print(f"active backend: {accel.backend_name()} "
          f"(numba available: {accel.NUMBA_AVAILABLE})")
    print(f"flows={n}, ticks={args.ticks}, signal={args.signal}\n")

    def loads_np():
        for _ in range(args.ticks):
            accel.accumulate_loads_np(pm_idx, pair_idx, cpu, bw, n_pms, n_pairs)

    def loads_nb():
        for _ in range(args.ticks):
            accel.accumulate_loads_numba(pm_idx, pair_idx, cpu, bw, n_pms, n_pairs)

    def delays_np():
        for _ in range(args.ticks):
            accel.flow_delays_np(pair_idx, pm_idx, prev, is_new, latency, pm_delay)

    def delays_nb():
        for _ in range(args.ticks):
            accel.flow_delays_numba(pair_idx, pm_idx, prev, is_new, latency, pm_delay)

    have = accel.NUMBA_AVAILABLE
    bench_pair("accumulate_loads", loads_np, loads_nb if have else None)
    bench_pair("flow_delays", delays_np, delays_nb if have else None)
    bench_pair("nlms_run",
               lambda: accel.nlms_run_np(signal, 8, 0.5),
               (lambda: accel.nlms_run_numba(signal, 8, 0.5)) if have else None,
               repeats=3)

    cfg = preset("very_high", seed=1)
    start = time.perf_counter()
    World(cfg).run()
    print(f"\nend-to-end very_high (600 s simulated, {accel.backend_name()} "
          f"backend): {time.perf_counter() - start:.2f} s")
    print("set IOVSIM_NO_NUMBA=1 to rerun the end-to-end case on the "
          "numpy path")


if __name__ == "__main__":
    main()
