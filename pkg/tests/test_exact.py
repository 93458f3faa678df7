import itertools
import math

import numpy as np
import pytest

from adsat import exact, formula


def test_zero_clauses_counts_all_assignments():
    g = formula.FactorGraph.from_clauses(3, np.zeros((0, 3), dtype=np.int32))
    neg = formula.Negations(np.zeros(0, dtype=np.int8))
    assert exact.count_models(g, neg).count == 8


def test_single_clause_excludes_one_assignment():
    g = formula.generate_regular(3, 1, 3, seed=0)
    neg = formula.assign_negations(g, "all_zero", 0)
    mc = exact.count_models(g, neg)
    assert mc.count == 7
    assert mc.entropy == pytest.approx(math.log(7) / 3)


def test_all_sign_patterns_unsat():
    clauses = np.array([[0, 1, 2]] * 8, dtype=np.int32)
    g = formula.FactorGraph.from_clauses(3, clauses)
    j = np.array(list(itertools.product([0, 1], repeat=3)),
                 dtype=np.int8).reshape(-1)
    mc = exact.count_models(g, formula.Negations(j))
    assert mc.count == 0
    assert mc.entropy is None


def test_free_variable_doubles_count():
    g3 = formula.FactorGraph.from_clauses(3, np.array([[0, 1, 2]], dtype=np.int32))
    g4 = formula.FactorGraph.from_clauses(4, np.array([[0, 1, 2]], dtype=np.int32))
    neg = formula.Negations(np.zeros(3, dtype=np.int8))
    assert exact.count_models(g4, neg).count == 2 * exact.count_models(g3, neg).count


def test_component_factorization():
    # two disjoint copies of the same clause set multiply their counts
    base = np.array([[0, 1, 2], [1, 2, 3]], dtype=np.int32)
    g1 = formula.FactorGraph.from_clauses(4, base)
    g2 = formula.FactorGraph.from_clauses(8, np.vstack([base, base + 4]))
    j1 = np.array([0, 1, 0, 1, 1, 0], dtype=np.int8)
    n1 = formula.Negations(j1)
    n2 = formula.Negations(np.concatenate([j1, j1]))
    c1 = exact.count_models(g1, n1).count
    assert exact.count_models(g2, n2).count == c1 * c1


def test_counter_matches_brute_force_random_sweep():
    rng = np.random.default_rng(77)
    for _ in range(60):
        n = int(rng.integers(8, 18))
        if rng.random() < 0.5:
            L = int(rng.integers(2, 6))
            while (n * L) % 3:
                n += 1
            g = formula.generate_regular(n, L, 3, seed=int(rng.integers(1 << 30)))
        else:
            g = formula.generate_poisson(n, float(rng.uniform(0.5, 3.0)), 3,
                                         seed=int(rng.integers(1 << 30)))
        neg = formula.assign_negations(g, "random", int(rng.integers(1 << 30)))
        assert exact.count_models(g, neg).count == \
            exact.brute_force_count(g, neg).count


def test_count_budget():
    g = formula.generate_regular(30, 4, 3, seed=1)
    neg = formula.assign_negations(g, "random", 1)
    with pytest.raises(exact.CountBudgetExceeded) as err:
        exact.count_models(g, neg, max_nodes=3)
    assert err.value.nodes > 0


def test_big_count_entropy():
    mc = exact.ModelCount(count=1 << 200, n_vars=200)
    assert mc.entropy == pytest.approx(math.log(2), rel=1e-12)


def test_empirical_ldf_basics():
    g = formula.generate_regular(15, 4, 3, seed=5)
    h = exact.empirical_ldf(g, 200, 0.01, seed=9)
    assert h.n_samples + h.n_skipped == 200
    assert sum(h.counts.values()) == h.n_samples - h.n_unsat
    assert max(h.l_n.values()) == 0.0
    # bit-identical rerun
    h2 = exact.empirical_ldf(g, 200, 0.01, seed=9)
    assert h2.counts == h.counts


def test_empirical_ldf_balanced_mode():
    g = formula.generate_regular(15, 4, 3, seed=5)
    h = exact.empirical_ldf(g, 100, 0.01, seed=3, mode="balanced")
    assert h.n_samples == 100


def test_crossover_size_values():
    assert exact.crossover_size(math.log(2), math.log(2)) == pytest.approx(math.e)
    assert exact.crossover_size(0.0, 1.0) == 1.0
    assert exact.crossover_size(12 * math.log(2), 1.0) == pytest.approx(4096.0)
    with pytest.raises(ValueError):
        exact.crossover_size(1.0, 0.0)
