#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Times the hot kernels (transform evaluation, Huber location/scale, the
bounded-loss criterion) and a complete reweighted fit, on the sample sizes
the simulation harness actually uses. Run after an editable install:

    python benchmarks/bench_kernels.py [--repeat 200]
"""

import argparse
import math
import time

import numpy as np

from centranorm import _kernels_py
from centranorm.robust import normal_quantile, plotting_positions

try:
    from centranorm import _kernels
except ImportError:
    _kernels = None

NO_RECT = (math.nan, 0.0, 0.0, math.nan, 0.0, 0.0)


def best_of(fn, repeat, inner=10):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn()
        best = min(best, (time.perf_counter() - t0) / inner)
    return best


def bench_kernels(repeat):
    rows = []
    for n in (100, 1_000, 10_000):
        rng = np.random.default_rng(7)
        z = np.sort(rng.standard_normal(n))
        x = np.sort(np.exp(rng.standard_normal(n)))
        q = normal_quantile(plotting_positions(n))
        cases = [
            (f"yj transform      n={n:6d}",
             lambda k: k.transform(z, 0.37, 1, *NO_RECT)),
            (f"bc transform      n={n:6d}",
             lambda k: k.transform(x, -0.6, 0, *NO_RECT)),
            (f"huber loc/scale   n={n:6d}",
             lambda k: k.huber_sorted(z, 1.5, 1e-6, 50)),
            (f"loss criterion    n={n:6d}",
             lambda k: k.criterion_sorted(z, q, 0.5, 1.5, 1e-6, 50)),
        ]
        for label, call in cases:
            t_py = best_of(lambda: call(_kernels_py), repeat)
            t_cy = best_of(lambda: call(_kernels), repeat) if _kernels else math.nan
            rows.append((label, t_py, t_cy))
    return rows


def bench_full_fit(repeat):
    import subprocess
    import sys

    script = (
        "import time, numpy as np, centranorm as cn\n"
        "scen = cn.SimulationScenario('boxcox', 0.0, n=100, epsilon=0.10, k=10, seed=3)\n"
        "data = cn.generate(scen)\n"
        "spec = cn.EstimatorSpec('rewml', 'boxcox')\n"
        "cn.fit_rewml(data, spec)\n"
        "best = float('inf')\n"
        f"for _ in range({repeat}):\n"
        "    t0 = time.perf_counter()\n"
        "    cn.fit_rewml(data, spec)\n"
        "    best = min(best, time.perf_counter() - t0)\n"
        "print(best)\n"
    )

    def run(pure):
        import os
        env = dict(os.environ, CN_PURE_PYTHON="1" if pure else "0")
        out = subprocess.run([sys.executable, "-c", script], env=env,
                             capture_output=True, text=True, check=True)
        return float(out.stdout.strip())

    t_py = run(pure=True)
    t_cy = run(pure=False) if _kernels else math.nan
    return [("rewml fit         n=   100", t_py, t_cy)]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=50)
    args = parser.parse_args()

    if _kernels is None:
        print("compiled extension not available; timing the fallback only\n")
    rows = bench_kernels(args.repeat) + bench_full_fit(max(10, args.repeat // 2))
    print(f"{'kernel':28s} {'numpy':>12s} {'compiled':>12s} {'speedup':>9s}")
    for label, t_py, t_cy in rows:
        speed = f"{t_py / t_cy:8.1f}x" if t_cy == t_cy else "      n/a"
        cy = f"{t_cy * 1e6:10.1f}us" if t_cy == t_cy else "       n/a"
        print(f"{label:28s} {t_py * 1e6:10.1f}us {cy} {speed}")


if __name__ == "__main__":
    main()
