"""Compiled and pure-Python kernels must agree on identical random streams."""
import numpy as np
import pytest

from adsat import formula, ldev
from adsat._kernels import get_impl

pk = get_impl("python")
try:
    ck = get_impl("cython")
except ImportError:  # extension not built; parity is vacuous
    ck = None

needs_ext = pytest.mark.skipif(ck is None, reason="compiled kernels not built")


@needs_ext
def test_bp_sweep_parity():
    g = formula.generate_poisson(50, 1.6, 3, seed=3)
    neg = formula.assign_negations(g, "random", 4)
    nu_p = np.random.default_rng(5).uniform(0, 1, g.n_edges)
    nu_c = nu_p.copy()
    for sweep in range(25):
        order = np.random.default_rng(sweep).permutation(
            g.n_clauses).astype(np.int32)
        dp = pk.bp_sweep(g.k, g.clause_vars, g.var_ptr, g.var_eids, neg.j,
                         nu_p, order, 0.2)
        dc = ck.bp_sweep(g.k, g.clause_vars, g.var_ptr, g.var_eids, neg.j,
                         nu_c, order, 0.2)
        assert dp[1] == dc[1]
        assert dp[0] == pytest.approx(dc[0], abs=1e-14)
    assert np.max(np.abs(nu_p - nu_c)) < 1e-13
    tp = pk.bp_entropy_terms(g.k, g.clause_vars, g.var_ptr, g.var_eids,
                             neg.j, nu_p)
    tc = ck.bp_entropy_terms(g.k, g.clause_vars, g.var_ptr, g.var_eids,
                             neg.j, nu_c)
    assert tp == pytest.approx(tc, abs=1e-10)


@needs_ext
def test_sp_sweep_parity():
    g = formula.generate_regular(48, 4, 3, seed=6)
    neg = formula.assign_negations(g, "balanced", 7)
    q_p = np.random.default_rng(8).uniform(0, 1, g.n_edges)
    q_c = q_p.copy()
    for sweep in range(25):
        order = np.random.default_rng(100 + sweep).permutation(
            g.n_clauses).astype(np.int32)
        pk.sp_sweep(g.k, g.clause_vars, g.var_ptr, g.var_eids, neg.j, q_p,
                    order, 0.2)
        ck.sp_sweep(g.k, g.clause_vars, g.var_ptr, g.var_eids, neg.j, q_c,
                    order, 0.2)
    assert np.max(np.abs(q_p - q_c)) < 1e-13
    tp = pk.sp_complexity_terms(g.k, g.clause_vars, g.var_ptr, g.var_eids,
                                neg.j, q_p)
    tc = ck.sp_complexity_terms(g.k, g.clause_vars, g.var_ptr, g.var_eids,
                                neg.j, q_c)
    assert tp == pytest.approx(tc, abs=1e-10)


@needs_ext
def test_count_parity():
    rng = np.random.default_rng(9)
    for _ in range(15):
        n = int(rng.integers(10, 22))
        g = formula.generate_poisson(n, 2.2, 3, seed=int(rng.integers(1 << 30)))
        neg = formula.assign_negations(g, "random", int(rng.integers(1 << 30)))
        occ_cls = (g.var_eids // g.k).astype(np.int32)
        occ_j = neg.j[g.var_eids].astype(np.int8)
        rp = pk.count_kernel(g.n_vars, g.k, g.clause_vars, neg.j, g.var_ptr,
                             occ_cls, occ_j, 10**8)
        rc = ck.count_kernel(g.n_vars, g.k, g.clause_vars, neg.j, g.var_ptr,
                             occ_cls, occ_j, 10**8)
        assert rp == rc  # identical counts AND identical node traversal


def _popdyn_state_pair(balanced, base):
    g = formula.generate_poisson(30, 1.4, 3, seed=10)
    pds = []
    for backend in ("python", "cython"):
        pds.append(ldev.InstancePopDyn(g, base, x=-3.0, pop_size=12, seed=11,
                                       restrict_balanced=balanced,
                                       backend=backend))
    return pds


@needs_ext
@pytest.mark.parametrize("base", ["bp", "sp"])
@pytest.mark.parametrize("balanced", [False, True])
def test_popdyn_sweep_parity(base, balanced):
    pd_p, pd_c = _popdyn_state_pair(balanced, base)
    # same master seed means identical pre-generated random arrays
    for _ in range(4):
        pd_p.sweep()
        pd_c.sweep()
    assert np.max(np.abs(pd_p.s - pd_c.s)) < 1e-12
    assert np.max(np.abs(pd_p.shat - pd_c.shat)) < 1e-12
    mp = pd_p.measure(64)
    mc = pd_c.measure(64)
    assert mp == pytest.approx(mc, abs=1e-9)
