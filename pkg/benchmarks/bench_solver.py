#!/usr/bin/env python3
"""Benchmark the compiled pivot kernel against the pure numpy fallback.

Times full quantile-regression solves (median tau) on synthetic data that
mimics the estimates database: discrete assumption grids, heavy-tailed
response, random weights.  The bootstrap is the hot consumer - a
1000-replicate cluster bootstrap on the full-size problem runs the solver
thousands of times, so per-solve milliseconds matter.

Usage: python benchmarks/bench_solver.py [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from metaemu.solver import available_backends, solve_weighted_quantile

CASES = [
    (200, 2), (200, 5),
    (2_000, 2), (2_000, 5),
    (14_000, 2), (14_000, 5),
]


def make_problem(rng, n, p):
    cols = []
    if p >= 2:
        cols.append(rng.choice([0.0, 1.0, 1.5, 3.0], n))
    if p >= 3:
        cols.append(rng.choice([0.5, 1.0, 1.5, 2.0], n))
    if p >= 4:
        cols.append(np.clip(rng.normal(-1.3, 1.0, n), -9, 2))
    if p >= 5:
        cols.append(rng.integers(1985, 2025, n).astype(float))
    X = np.column_stack(cols + [np.ones(n)])
    beta = np.array([-66.0, -45.0, -18.0, 3.0, 150.0][5 - p:])
    y = X @ beta + rng.standard_normal(n) * np.exp(rng.normal(3.5, 1.0, n))
    w = rng.uniform(0.2, 3.0, n)
    return X, y, w


def bench(backend, X, y, w, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        sol = solve_weighted_quantile(X, y, w, 0.5, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, sol


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    header = f"{'n':>8} {'params':>7}"
    for b in backends:
        header += f" {b + ' (ms)':>15}"
    header += f" {'speedup':>9} {'pivots':>7}"
    print(header)
    rng = np.random.default_rng(99)
    for n, p in CASES:
        X, y, w = make_problem(rng, n, p)
        times = {}
        sol = None
        for b in backends:
            times[b], sol = bench(b, X, y, w, args.repeats)
        line = f"{n:>8} {p:>7}"
        for b in backends:
            line += f" {times[b] * 1e3:>15.2f}"
        if len(backends) == 2:
            line += f" {times['pure'] / times['compiled']:>8.2f}x"
        else:
            line += f" {'n/a':>9}"
        line += f" {sol.n_pivots:>7}"
        print(line)


if __name__ == "__main__":
    main()
