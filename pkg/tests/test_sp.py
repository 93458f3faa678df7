import numpy as np
import pytest

from adsat import bp, formula, sp


def test_clause_update_hand_values():
    assert sp.sp_clause_update([0.0, 0.9]) == 0.0
    assert sp.sp_clause_update([1.0, 1.0]) == 1.0
    assert sp.sp_clause_update([0.5, 0.5]) == 0.25


def test_var_update_hand_values():
    out = sp.sp_var_update([0.0], [0.0])
    assert out == pytest.approx((0.0, 0.0, 1.0), abs=1e-15)
    out = sp.sp_var_update([0.5], [0.5])
    assert out == pytest.approx((1 / 3, 1 / 3, 1 / 3), abs=1e-15)
    with pytest.raises(bp.ContradictionError):
        sp.sp_var_update([1.0], [1.0])


def test_var_update_normalization_property():
    rng = np.random.default_rng(1)
    for _ in range(200):
        same = rng.random(int(rng.integers(0, 4))).tolist()
        opp = rng.random(int(rng.integers(0, 4))).tolist()
        qs, qu, qstar = sp.sp_var_update(same, opp)
        assert abs(qs + qu + qstar - 1.0) < 1e-12


def test_zero_start_is_exact_fixed_point():
    for seed in range(5):
        g = formula.generate_poisson(60, 2.0, 3, seed=seed)
        neg = formula.assign_negations(g, "random", seed)
        st = sp.run_sp(g, neg, seed=seed, init="zero", max_sweeps=3)
        assert st.status is sp.Status.CONVERGED
        assert st.max_delta == 0.0
        assert st.sweeps == 1


def test_trivial_fixed_point_has_zero_complexity():
    g = formula.generate_regular(120, 4, 3, seed=2)
    neg = formula.assign_negations(g, "random", 2)
    st = sp.run_sp(g, neg, seed=1, init="zero", max_sweeps=2)
    assert st.trivial
    assert abs(sp.complexity(g, neg, st)) < 1e-6


def test_near_trivial_complexity_small():
    # all surveys below 1e-9 must give |Sigma| < 1e-6
    g = formula.generate_regular(90, 4, 3, seed=3)
    neg = formula.assign_negations(g, "random", 3)
    st = sp.run_sp(g, neg, seed=1, init="zero", max_sweeps=1)
    st.qhat[:] = 1e-10
    assert abs(sp.complexity(g, neg, st)) < 1e-6


def test_random_init_decays_to_trivial_in_rs_phase():
    # small constraint density: the only fixed point is the trivial one
    g = formula.generate_regular(300, 4, 3, seed=4)
    neg = formula.assign_negations(g, "random", 4)
    st = sp.run_sp(g, neg, seed=2, tol=1e-10)
    assert st.status is sp.Status.CONVERGED
    assert st.trivial


def test_scan_no_crossing_error():
    with pytest.raises(sp.NoCrossingError):
        sp.threshold_scan_balanced([2.8, 3.0], 600, k=3, seed=0,
                                   max_sweeps=400)
