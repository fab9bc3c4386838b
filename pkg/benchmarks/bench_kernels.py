#!/usr/bin/env python3
"""Compare the compiled and numpy kernel backends on the hot path.

The per-feature evidence kernel dominates the robustness benchmark
(thousands of explanation-vector evaluations) and the estimation grid,
so this script times both backends on representative (k, d) shapes.

Usage: python3 benchmarks/bench_kernels.py [--repeats 2000]
"""

import argparse
import time

import numpy as np

from woebox._kernels import available_backends

SHAPES = [(2, 10), (6, 10), (4, 59), (2, 100), (16, 30)]
LOG_FLOOR = float(np.log(1e-12))


def _inputs(rng, k, d):
    means = rng.normal(size=(k, d), scale=2.0)
    variances = rng.uniform(0.3, 2.0, size=(k, d))
    weights = rng.uniform(0.5, 2.0, size=k)
    log_priors = np.log(weights / weights.sum())
    x = rng.normal(size=d)
    u = np.array([0], dtype=np.intp)
    v = np.arange(1, k, dtype=np.intp)
    return x, means, variances, log_priors, u, v


def time_backend(module, rng, k, d, repeats):
    x, means, variances, log_priors, u, v = _inputs(rng, k, d)
    # one warm-up evaluation, then the timed loop over fresh instances
    table, _ = module.log_density_table(x, means, variances, LOG_FLOOR)
    module.per_feature_woe(table, log_priors, u, v)
    points = rng.normal(size=(repeats, d))
    start = time.perf_counter()
    for row in points:
        table, _ = module.log_density_table(row, means, variances, LOG_FLOOR)
        module.per_feature_woe(table, log_priors, u, v)
    return (time.perf_counter() - start) / repeats


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=2000)
    args = parser.parse_args()

    backends = available_backends()
    print(f"available backends: {', '.join(sorted(backends))}")
    header = f"{'shape (k,d)':>12} | " + " | ".join(f"{name:>12}" for name in sorted(backends))
    if len(backends) == 2:
        header += " |      speedup"
    print(header)
    print("-" * len(header))
    rng = np.random.default_rng(0)
    for k, d in SHAPES:
        per_call = {
            name: time_backend(module, rng, k, d, args.repeats)
            for name, module in backends.items()
        }
        row = f"{f'({k},{d})':>12} | " + " | ".join(
            f"{per_call[name] * 1e6:>10.2f}us" for name in sorted(backends)
        )
        if len(per_call) == 2:
            row += f" | {per_call['python'] / per_call['cython']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
