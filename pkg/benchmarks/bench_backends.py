#!/usr/bin/env python3
"""Benchmark the compiled kernel extension against its pure-Python
source on the three hot paths: the norm DP, round selection, and round
verification.

Usage: python3 benchmarks/bench_backends.py [--repeat 5]
"""

import argparse
import importlib.util
import pathlib
import statistics
import time

import numpy as np


def load_backends():
    from ssrank import _kernels as compiled
    path = pathlib.Path(__file__).resolve().parents[1] / "src" / "ssrank" \
        / "_kernels.py"
    spec = importlib.util.spec_from_file_location("_kernels_pure", path)
    pure = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(pure)
    return compiled, pure


def bench(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times)


def make_tree(n_nodes, seed):
    rng = np.random.default_rng(seed)
    parent = np.empty(n_nodes, dtype=np.int32)
    parent[0] = -1
    for i in range(1, n_nodes):
        parent[i] = int(rng.integers(0, i))
    order = np.argsort(parent, kind="stable")  # parents precede children
    remap = np.empty(n_nodes, dtype=np.int32)
    remap[order] = np.arange(n_nodes, dtype=np.int32)
    parent = np.where(parent[order] == -1, -1, remap[parent[order]])
    vals = rng.normal(size=n_nodes)
    return parent.astype(np.int32), vals


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    compiled, pure = load_backends()
    print(f"compiled backend available: {compiled.COMPILED}")

    rows = []

    parent, vals = make_tree(20_000, seed=1)
    g = np.empty(len(vals))
    h = np.empty(len(vals))

    def dp(mod):
        return lambda: mod.znorm_dp(parent, vals, 1.5, 3.0, g, h)

    rows.append(("znorm_dp, 20k nodes", dp(compiled), dp(pure)))

    N = 4096
    arrays = [(np.empty(N, np.int32), np.empty(N, np.float64),
               np.empty(N, np.int8)) for _ in range(4)]

    def sel(mod):
        return lambda: mod.select_rounds(2.0, N, *arrays[0], *arrays[1],
                                         *arrays[2], *arrays[3])

    rows.append((f"select_rounds, N={N}", sel(compiled), sel(pure)))

    compiled.select_rounds(2.0, N, *arrays[0], *arrays[1],
                           *arrays[2], *arrays[3])

    def ver(mod):
        return lambda: mod.verify_rounds(2.0, 1.0, N, *arrays[0],
                                         *arrays[2], *arrays[3])

    rows.append((f"verify_rounds, N={N}", ver(compiled), ver(pure)))

    print(f"{'benchmark':<26} {'compiled':>12} {'pure':>12} {'speedup':>9}")
    for name, fc, fp in rows:
        tc, _ = bench(fc, args.repeat)
        tp, _ = bench(fp, args.repeat)
        print(f"{name:<26} {tc * 1e3:>10.2f}ms {tp * 1e3:>10.2f}ms "
              f"{tp / tc:>8.1f}x")


if __name__ == "__main__":
    main()
