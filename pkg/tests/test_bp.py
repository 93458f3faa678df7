import math

import numpy as np
import pytest

from adsat import bp, exact, formula


def random_tree_instance(n_clauses, k, seed):
    """Tree-shaped formula: every new clause hangs off one existing variable."""
    rng = np.random.default_rng(seed)
    clauses = []
    n = 1
    for _ in range(n_clauses):
        root = int(rng.integers(n))
        clauses.append([root] + list(range(n, n + k - 1)))
        n += k - 1
    g = formula.FactorGraph.from_clauses(n, np.array(clauses, dtype=np.int32))
    neg = formula.assign_negations(g, "random", int(rng.integers(1 << 30)))
    return g, neg


def test_clause_update_hand_values():
    out = bp.bp_clause_update([(0.5, 0.5), (0.5, 0.5)], [0, 0], 0)
    assert out == pytest.approx((3 / 7, 4 / 7), abs=1e-15)
    # any incoming message with zero weight on its bad value kills the product
    out = bp.bp_clause_update([(0.0, 1.0), (0.3, 0.7)], [0, 0], 0)
    assert out == pytest.approx((0.5, 0.5), abs=1e-15)
    # all other members surely violating forces the literal
    out = bp.bp_clause_update([(1.0, 0.0), (1.0, 0.0)], [0, 0], 0)
    assert out == pytest.approx((0.0, 1.0), abs=1e-15)


def test_var_update_hand_values():
    assert bp.bp_var_update([(3 / 7, 4 / 7), (3 / 7, 4 / 7)]) == pytest.approx(
        (9 / 25, 16 / 25), abs=1e-15)
    assert bp.bp_var_update([]) == (0.5, 0.5)
    with pytest.raises(bp.ContradictionError):
        bp.bp_var_update([(0.0, 1.0), (1.0, 0.0)])


def test_message_normalization_invariant():
    rng = np.random.default_rng(0)
    for _ in range(200):
        k = int(rng.integers(2, 5))
        nus = [(p, 1 - p) for p in rng.random(k - 1)]
        js = rng.integers(0, 2, k - 1).tolist()
        out = bp.bp_clause_update(nus, js, int(rng.integers(2)))
        assert abs(out[0] + out[1] - 1.0) < 1e-12
        hats = [(p, 1 - p) for p in rng.random(int(rng.integers(1, 6)))]
        out = bp.bp_var_update(hats)
        assert abs(out[0] + out[1] - 1.0) < 1e-12


def test_tree_convergence_and_exact_entropy():
    for seed in range(10):
        g, neg = random_tree_instance(6, 3, seed)
        st = bp.run_bp(g, neg, damping=0.0, tol=1e-13, seed=seed)
        assert st.status is bp.Status.CONVERGED
        assert st.sweeps <= 2 * g.n_clauses  # well under max; trees are exact
        s = bp.bethe_entropy(g, neg, st)
        s_exact = math.log(exact.brute_force_count(g, neg).count) / g.n_vars
        assert abs(s - s_exact) < 1e-10


def test_zero_clause_entropy_is_log2():
    g = formula.FactorGraph.from_clauses(5, np.zeros((0, 3), dtype=np.int32))
    neg = formula.Negations(np.zeros(0, dtype=np.int8))
    st = bp.run_bp(g, neg, seed=0)
    assert st.status is bp.Status.CONVERGED
    assert bp.bethe_entropy(g, neg, st) == pytest.approx(math.log(2), abs=1e-12)


def test_factorized_regular_analytic_values():
    # uniform / polarized column
    for L, want in [(2, 0.6196), (4, 0.5796), (8, 0.5293), (14, 0.4831)]:
        _, s = bp.factorized_regular_bp(L, 3, "uniform")
        assert abs(s - want) < 1e-3
    # balanced column (even degrees)
    for L, want in [(2, 0.5710), (4, 0.4488), (8, 0.2044)]:
        _, s = bp.factorized_regular_bp(L, 3, "balanced_even")
        assert abs(s - want) < 1e-3
    with pytest.raises(ValueError):
        bp.factorized_regular_bp(5, 3, "balanced_even")


def test_factorized_matches_instance_on_zero_negations():
    for L in (2, 3, 6, 9):
        g = formula.generate_regular(3000, L, 3, seed=L)
        nz = formula.assign_negations(g, "all_zero", 0)
        st = bp.run_bp(g, nz, seed=1)
        assert st.status is bp.Status.CONVERGED
        s_inst = bp.bethe_entropy(g, nz, st)
        _, s_fact = bp.factorized_regular_bp(L, 3, "uniform")
        assert abs(s_inst - s_fact) < 2e-3


def test_gauge_invariance_under_variable_flip():
    g = formula.generate_regular(300, 4, 3, seed=9)
    neg = formula.assign_negations(g, "random", 3)
    st = bp.run_bp(g, neg, seed=4, tol=1e-12)
    s1 = bp.bethe_entropy(g, neg, st)
    j2 = neg.j.copy()
    for i in (0, 7, 100):
        eids = g.edges_of_var(i)
        j2[eids] = 1 - j2[eids]
    neg2 = formula.Negations(j2)
    st2 = bp.run_bp(g, neg2, seed=4, tol=1e-12)
    s2 = bp.bethe_entropy(g, neg2, st2)
    assert abs(s1 - s2) < 1e-7


def test_entropy_on_contradiction_raises():
    st = bp.BpState(nuhat0=np.array([]), status=bp.Status.CONTRADICTION,
                    sweeps=1, max_delta=0.0)
    g = formula.generate_regular(3, 1, 3, seed=0)
    neg = formula.assign_negations(g, "all_zero", 0)
    with pytest.raises(bp.ContradictionError):
        bp.bethe_entropy(g, neg, st)


def test_not_converged_average_window():
    # a contradiction-free but frustrated instance at small size may still
    # converge; force the window path with max_sweeps too small to converge
    g = formula.generate_regular(60, 4, 3, seed=2)
    neg = formula.assign_negations(g, "random", 2)
    st = bp.run_bp(g, neg, seed=0, max_sweeps=5, average_window=3)
    assert st.status is bp.Status.NOT_CONVERGED
    assert st.entropy_avg is not None
