#!/usr/bin/env python3
"""Timing comparison of the compiled kernels against the Python fallback.

Run:  python benchmarks/bench_backends.py [--quick]
"""
import argparse
import time

import numpy as np

from adsat import formula, ldev
from adsat._kernels import get_impl


def timeit(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_bp(impl, g, neg, sweeps):
    nuhat = np.random.default_rng(1).uniform(0, 1, g.n_edges)

    def run():
        for s in range(sweeps):
            order = np.random.default_rng(s).permutation(
                g.n_clauses).astype(np.int32)
            impl.bp_sweep(g.k, g.clause_vars, g.var_ptr, g.var_eids, neg.j,
                          nuhat.copy(), order, 0.2)
    return run


def bench_sp(impl, g, neg, sweeps):
    qhat = np.random.default_rng(2).uniform(0, 1, g.n_edges)

    def run():
        for s in range(sweeps):
            order = np.random.default_rng(s).permutation(
                g.n_clauses).astype(np.int32)
            impl.sp_sweep(g.k, g.clause_vars, g.var_ptr, g.var_eids, neg.j,
                          qhat.copy(), order, 0.2)
    return run


def bench_count(impl, g, neg):
    occ_cls = (g.var_eids // g.k).astype(np.int32)
    occ_j = neg.j[g.var_eids].astype(np.int8)

    def run():
        impl.count_kernel(g.n_vars, g.k, g.clause_vars, neg.j, g.var_ptr,
                          occ_cls, occ_j, 10**9)
    return run


def bench_popdyn(backend, g, sweeps):
    def run():
        pd = ldev.InstancePopDyn(g, "bp", x=-5.0, pop_size=60, seed=3,
                                 backend=backend)
        for _ in range(sweeps):
            pd.sweep()
    return run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    scale = 1 if args.quick else 4

    g_mp = formula.generate_regular(600 * scale, 4, 3, seed=0)
    n_mp = formula.assign_negations(g_mp, "random", 1)
    g_ct = formula.generate_regular(24, 8, 3, seed=2)
    n_ct = formula.assign_negations(g_ct, "random", 3)
    g_pd = formula.generate_poisson(60 * scale, 1.5, 3, seed=4)

    rows = []
    impls = {"python": get_impl("python"), "cython": get_impl("cython")}
    for name, impl in impls.items():
        rows.append((f"bp_sweep x10 (n={g_mp.n_vars})", name,
                     timeit(bench_bp(impl, g_mp, n_mp, 10))))
        rows.append((f"sp_sweep x10 (n={g_mp.n_vars})", name,
                     timeit(bench_sp(impl, g_mp, n_mp, 10))))
        rows.append((f"count_models (n={g_ct.n_vars}, L=8)", name,
                     timeit(bench_count(impl, g_ct, n_ct))))
        rows.append((f"popdyn sweep x3 (n={g_pd.n_vars}, P=60)", name,
                     timeit(bench_popdyn(name, g_pd, 3))))

    print(f"{'kernel':40s} {'backend':8s} {'best s':>10s} {'speedup':>8s}")
    by_kernel = {}
    for kernel, name, t in rows:
        by_kernel.setdefault(kernel, {})[name] = t
    for kernel, res in by_kernel.items():
        for name, t in res.items():
            speed = res["python"] / t if name == "cython" else 1.0
            print(f"{kernel:40s} {name:8s} {t:10.4f} {speed:7.1f}x")


if __name__ == "__main__":
    main()
