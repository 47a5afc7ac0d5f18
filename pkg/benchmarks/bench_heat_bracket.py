"""Benchmark the heat-bracket contraction kernel: compiled vs pure numpy.

The divided-difference evaluation of a bracket is a sum over d^(n+1) index
tuples; this is the hot loop of every JLO evaluation.  Usage:

    python benchmarks/bench_heat_bracket.py [--repeat 5]

The table reports the best wall time per evaluation for each backend and the
speedup of the compiled kernel when it is available.
"""

import argparse
import time
from itertools import combinations_with_replacement

import numpy as np

from indexbench import kernels
from indexbench.context import TraceContext
from indexbench.heatbracket import binomial_table, divided_diff_exp
from indexbench.randgen import random_hermitian, random_matrix


def make_case(rng, d, n):
    ctx = TraceContext([(d, 1.0)])
    dmat = random_hermitian(rng, ctx)
    lam = np.linalg.eigvalsh(dmat) ** 2
    m = n + 1
    binom = binomial_table(d + m + 1, m + 2)
    size = int(binom[d + m - 1, m])
    dd = np.empty(size, dtype=np.complex128)
    for combo in combinations_with_replacement(range(d), m):
        r = sum(int(binom[combo[k] + k, k + 1]) for k in range(m))
        dd[r] = divided_diff_exp(lam[list(combo)])
    w = ctx.weight_vector()
    mats = np.stack([random_matrix(rng, ctx) for _ in range(m)])
    return w, mats, dd, binom


def best_time(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = kernels.available_backends()
    print(f"selected backend: {kernels.BACKEND}")
    print(f"available: {', '.join(backends)}\n")
    header = f"{'d':>3} {'n':>3} {'tuples':>12}"
    for name in backends:
        header += f" {name + ' [ms]':>16}"
    if "compiled" in backends and "python" in backends:
        header += f" {'speedup':>9}"
    print(header)

    rng = np.random.default_rng(0)
    cases = [(2, 3), (2, 6), (4, 3), (4, 5), (6, 3), (6, 5), (8, 4), (12, 4)]
    for d, n in cases:
        case = make_case(rng, d, n)
        row = f"{d:>3} {n:>3} {d ** (n + 1):>12}"
        times = {}
        for name, fn in backends.items():
            times[name] = best_time(fn, case, args.repeat)
            row += f" {times[name] * 1e3:>16.3f}"
        if "compiled" in times and "python" in times:
            row += f" {times['python'] / times['compiled']:>8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
