#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Runs each dispatched kernel on a representative workload in this process,
then re-runs itself in a subprocess with FAVLAB_NO_NUMBA=1 and prints the
speedup table.  Use --inner to run just the measurement half.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def workloads():
    rng = np.random.default_rng(0)
    m = 4096
    px = rng.uniform(0, 1, m)
    py = rng.uniform(0, 1, m)
    w = np.full(m, 1.0 / m)
    thetas = np.linspace(0.0, np.pi, 1024, endpoint=False)
    delta = 4.0 ** -5
    n_dir = int(np.floor(np.pi / delta)) + 1
    k2max = int(np.floor(2.0 / delta))
    return {
        "projection_measures":
            lambda k: k.projection_measures(px, py, delta, thetas, 1e-12),
        "riesz_energy_sum":
            lambda k: k.riesz_energy_sum(px, py, w, 1.0, delta),
        "line_counts_table":
            lambda k: k.line_counts_table(px, py, delta, 4.0, n_dir,
                                          -k2max, k2max),
        "f_delta_stats":
            lambda k: k.f_delta_stats(px, py, delta, 4.0,
                                      np.ones(n_dir, dtype=bool),
                                      -k2max, k2max),
    }


def measure(repeats: int = 3) -> dict:
    from favlab import _kernels
    out = {"numba": _kernels.NUMBA_ENABLED}
    for name, fn in workloads().items():
        fn(_kernels)                       # warm-up / JIT compile
        out[name] = min(_timed(fn, _kernels) for _ in range(repeats))
    return out


def _timed(fn, kernels) -> float:
    t0 = time.perf_counter()
    fn(kernels)
    return time.perf_counter() - t0


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--inner", action="store_true",
                    help="print raw timings as JSON and exit")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    if args.inner:
        print(json.dumps(measure(args.repeats)))
        return 0

    results = {}
    for label, env_val in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, FAVLAB_NO_NUMBA=env_val)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--inner",
             "--repeats", str(args.repeats)],
            env=env, capture_output=True, text=True, check=True)
        results[label] = json.loads(proc.stdout.strip().splitlines()[-1])
    if results["numba"]["numba"] is not True:
        print("warning: numba unavailable; both columns use the numpy path")

    print(f"{'kernel':<24} {'numba (s)':>12} {'numpy (s)':>12} {'speedup':>9}")
    for name in workloads():
        tn = results["numba"][name]
        tp = results["numpy"][name]
        print(f"{name:<24} {tn:>12.4f} {tp:>12.4f} {tp / tn:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
