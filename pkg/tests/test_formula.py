import numpy as np
import pytest

from adsat import formula


def test_regular_trivial_single_clause():
    g = formula.generate_regular(3, 1, 3, seed=42)
    assert g.n_clauses == 1
    assert sorted(g.vars_of(0).tolist()) == [0, 1, 2]


def test_regular_counting_identity():
    g = formula.generate_regular(6, 2, 3, seed=0)
    assert g.n_clauses == 4
    assert set(g.degrees.tolist()) == {2}


def test_regular_dense_instance_scan():
    # exhaustive scan of the generated incidence at a collision-heavy size
    g = formula.generate_regular(9, 8, 3, seed=7)
    assert g.n_clauses == 24
    assert set(g.degrees.tolist()) == {8}
    for a in range(g.n_clauses):
        vs = g.vars_of(a).tolist()
        assert len(set(vs)) == 3
    g.validate()


def test_regular_generator_property_sweep():
    # degree and distinctness invariants over many seeds
    for seed in range(120):
        g = formula.generate_regular(12, 3, 3, seed=seed)
        assert g.n_clauses == 12
        assert set(g.degrees.tolist()) == {3}
        for a in range(g.n_clauses):
            assert len(set(g.vars_of(a).tolist())) == 3


def test_regular_divisibility_error():
    with pytest.raises(ValueError):
        formula.generate_regular(10, 4, 3, seed=0)


def test_poisson_forced_and_error():
    g = formula.generate_poisson(3, 1 / 3, 3, seed=5)
    assert g.n_clauses == 1
    assert sorted(g.vars_of(0).tolist()) == [0, 1, 2]
    with pytest.raises(ValueError):
        formula.generate_poisson(2, 1.0, 3, seed=0)
    with pytest.raises(ValueError):
        formula.generate_poisson(100, -0.5, 3, seed=0)


def test_poisson_clause_count_and_degrees():
    g = formula.generate_poisson(1000, 2.0, 3, seed=1)
    assert g.n_clauses == 2000
    # the total edge count fixes the mean degree exactly
    assert g.degrees.sum() == 6000
    # per-variable degrees concentrate around k*alpha = 6 (binomial-ish)
    assert abs(g.degrees.var() - 6.0) < 1.0
    for a in range(g.n_clauses):
        assert len(set(g.vars_of(a).tolist())) == 3


def test_negation_modes():
    g = formula.generate_regular(12, 4, 3, seed=3)
    nz = formula.assign_negations(g, "all_zero", 0)
    assert not nz.j.any()
    npol = formula.assign_negations(g, "polarized", 1)
    for i in range(g.n_vars):
        vals = set(npol.j[g.edges_of_var(i)].tolist())
        assert len(vals) == 1
    nb = formula.assign_negations(g, "balanced", 2)
    assert set(nb.ones_per_var(g).tolist()) == {2}
    with pytest.raises(ValueError):
        formula.assign_negations(g, "nope", 0)


def test_balanced_imbalance_property():
    # imbalance <= 1 always, == 0 for even degrees, over many seeds
    for seed in range(100):
        g = formula.generate_poisson(30, 1.5, 3, seed=seed)
        nb = formula.assign_negations(g, "balanced", seed)
        imb = nb.imbalance(g)
        degs = g.degrees
        assert (imb[degs % 2 == 0] == 0).all()
        assert (imb[degs % 2 == 1] == 1).all()


def test_dimacs_sign_encoding():
    g = formula.FactorGraph.from_clauses(3, np.array([[0, 1, 2]], dtype=np.int32))
    neg = formula.Negations(np.array([0, 1, 0], dtype=np.int8))
    text = formula.to_dimacs(g, neg)
    assert text.splitlines()[1] == "1 -2 3 0"


def test_dimacs_round_trip():
    for seed in range(20):
        g = formula.generate_poisson(25, 1.8, 3, seed=seed)
        neg = formula.assign_negations(g, "random", seed)
        g2, neg2 = formula.from_dimacs(formula.to_dimacs(g, neg))
        assert g2.n_vars == g.n_vars and g2.n_clauses == g.n_clauses
        for a in range(g.n_clauses):
            pairs = sorted(zip(g.vars_of(a).tolist(),
                               neg.j[a * 3:(a + 1) * 3].tolist()))
            pairs2 = sorted(zip(g2.vars_of(a).tolist(),
                                neg2.j[a * 3:(a + 1) * 3].tolist()))
            assert pairs == pairs2


def test_dimacs_parse_errors():
    with pytest.raises(formula.DimacsParseError) as err:
        formula.from_dimacs("p cnf 3 2\n1 -2 3 0\n")
    assert "declares 2" in str(err.value)
    with pytest.raises(formula.DimacsParseError):
        formula.from_dimacs("1 2 3 0\n")
    with pytest.raises(formula.DimacsParseError):
        formula.from_dimacs("p cnf 2 1\n1 -2 3 0\n")
    with pytest.raises(formula.DimacsParseError) as err:
        formula.from_dimacs("p cnf 3 1\n1 -2 x 0\n")
    assert "line 2" in str(err.value)


def test_instance_json_round_trip(tmp_path):
    g = formula.generate_regular(9, 4, 3, seed=11)
    neg = formula.assign_negations(g, "balanced", 4)
    path = tmp_path / "inst.json"
    formula.save_instance(path, g, neg, generator={"kind": "regular"})
    g2, neg2 = formula.load_instance(path)
    assert np.array_equal(g2.clause_vars, g.clause_vars)
    assert np.array_equal(neg2.j, neg.j)


def test_graph_arrays_read_only():
    g = formula.generate_regular(6, 2, 3, seed=0)
    with pytest.raises(ValueError):
        g.clause_vars[0] = 5
