import math

import numpy as np
import pytest

from adsat import bp, formula, ldev

GOLD = (math.sqrt(5.0) - 1.0) / 2.0  # balanced fixed-point bad-value weight, k=3


def delta_pops(value, p):
    return (np.full(p, value), np.full(p, 1.0 - value))


def test_clause_step_zero_tilt_is_unweighted():
    rng = np.random.default_rng(0)
    pops = [delta_pops(0.4, 8), delta_pops(0.7, 8)]
    for _ in range(20):
        c0, c1, logw = ldev.popdyn_clause_step(pops, 0.0, rng, base="bp")
        assert logw == 0.0
        assert abs(c0 + c1 - 1.0) < 1e-12


def test_var_step_zero_tilt_and_leaf():
    rng = np.random.default_rng(1)
    cand, logw = ldev.popdyn_var_step([], 0.0, rng, base="bp")
    assert cand == 0.5  # empty neighborhood gives the uniform message
    pops = [delta_pops(0.3, 4)]
    cand, logw = ldev.popdyn_var_step(pops, 0.0, rng, base="bp")
    assert logw == 0.0


def test_clause_step_delta_populations_reproduce_factorized():
    # feed the balanced fixed-point atoms; the output must be its Shat atom
    rng = np.random.default_rng(2)
    msgs, _ = bp.factorized_regular_bp(4, 3, "balanced_even")
    p = msgs["nu_bad"]
    # S(.|J=0) puts nu0 = p, S(.|J=1) puts nu0 = 1-p
    pops = [(np.full(6, p), np.full(6, 1.0 - p)) for _ in range(2)]
    for _ in range(30):
        c0, c1, logw = ldev.popdyn_clause_step(pops, -5.0, rng, base="bp")
        assert c0 == pytest.approx(1.0 - GOLD, abs=1e-12)
        assert c1 == pytest.approx(GOLD, abs=1e-12)


def test_var_step_delta_populations_balanced():
    rng = np.random.default_rng(3)
    # Shat(.|0) = 1-GOLD, Shat(.|1) = GOLD (stored as nu0)
    pops = [(np.full(6, 1.0 - GOLD), np.full(6, GOLD)) for _ in range(3)]
    for tgt in (0, 1):
        cand, logw = ldev.popdyn_var_step(pops, -5.0, rng, base="bp",
                                          j_target=tgt, balanced=True)
        want = GOLD if tgt == 0 else 1.0 - GOLD
        assert cand == pytest.approx(want, abs=1e-12)


def test_sp_step_trivial_stays_trivial():
    rng = np.random.default_rng(4)
    # trivial survey state: qU = 0 everywhere
    triple = np.zeros((5, 2))
    pops = [(triple, triple), (triple, triple)]
    c0, c1, logw = ldev.popdyn_clause_step(pops, 3.0, rng, base="sp")
    assert c0 == 0.0 and c1 == 0.0 and logw == 0.0


def test_systematic_resample_uniform_weights_is_identity():
    idx = ldev._systematic_resample(np.zeros(16), 16, 0.37)
    assert np.array_equal(idx, np.arange(16))


def test_edge_populations_j_marginal_structural():
    g = formula.generate_poisson(40, 1.0, 3, seed=0)
    pd = ldev.InstancePopDyn(g, "bp", x=0.5, pop_size=16, seed=1)
    pd.sweep()
    ep = pd.edge_populations(0)
    # both conditionals always hold exactly P members: the J-marginal is 1/2
    assert ep.s.shape[0] == 2 and ep.shat.shape[0] == 2
    assert ep.s.shape[1] == ep.shat.shape[1] == 16


def test_balanced_tables_consistency():
    r0c, r1c, pfc, t0f, t1f, pff, logbf = ldev.balanced_tables(8)
    assert logbf[4] == pytest.approx(math.log(6))
    assert logbf[5] == pytest.approx(math.log(2 * math.comb(5, 2)))
    # even degree, conditioned draws: single option of d/2 - tgt ones
    assert r0c[4 * 2 + 0] == 2 and r1c[4 * 2 + 0] == -1
    assert r0c[4 * 2 + 1] == 1


def test_balanced_logcount_values():
    assert ldev.balanced_logcount(ldev.RegularEnsemble(4)) == pytest.approx(
        math.log(6))
    assert ldev.balanced_logcount(ldev.RegularEnsemble(5)) == pytest.approx(
        math.log(2) + math.log(math.comb(5, 2)))
    assert ldev.balanced_logcount(ldev.PoissonEnsemble(1e-12)) < 1e-10


def test_balanced_logcount_poisson_against_monte_carlo():
    # independent oracle: average log-balanced-counts over Poisson degrees
    series = ldev.balanced_logcount(ldev.PoissonEnsemble(1.0, 3))
    rng = np.random.default_rng(123)
    ds = rng.poisson(3.0, size=1_000_000)
    table = np.array([math.log(ldev._balanced_count(d)) if d else 0.0
                      for d in range(ds.max() + 1)])
    mc = table[ds]
    assert abs(series - mc.mean()) < 3.0 * mc.std() / 1000.0


def test_regular_popdyn_zero_tilt_identities():
    pt = ldev.regular_factorized_popdyn(4, 3, "bp", x=0.0, pop_size=500,
                                        burn_sweeps=150, measure_sweeps=150,
                                        n_samples=400, seed=7)
    assert pt.phi == pytest.approx(4 * math.log(2), rel=1e-9)
    assert abs(pt.s - 0.5134) < 0.01
    assert pt.l == pytest.approx(pt.phi)  # l = phi at x = 0


def test_instance_popdyn_zero_tilt_identity_any_state():
    g = formula.generate_poisson(60, 1.5, 3, seed=8)
    pd = ldev.InstancePopDyn(g, "bp", x=0.0, pop_size=40, seed=2)
    pd.sweep()
    phi = ldev.free_energy(pd, n_samples=100)
    want = 3 * (g.n_clauses / g.n_vars) * math.log(2)
    assert phi == pytest.approx(want, rel=1e-9)


def test_instance_popdyn_annealed_identity():
    g = formula.generate_poisson(80, 1.0, 3, seed=9)
    pd = ldev.InstancePopDyn(g, "bp", x=1.0, pop_size=100, seed=3)
    for _ in range(150):
        pd.sweep()
    vals = []
    for _ in range(50):
        pd.sweep()
        vals.append(pd.measure(200)[0])
    want = math.log(2) + (g.n_clauses / g.n_vars) * math.log(7)
    assert np.mean(vals) == pytest.approx(want, rel=0.01)


def test_sp_trivial_population_free_energy():
    g = formula.generate_poisson(60, 1.5, 3, seed=10)
    pd = ldev.InstancePopDyn(g, "sp", x=2.0, pop_size=30, seed=4,
                             init="trivial")
    for _ in range(5):
        pd.sweep()
    phi, s_tilt, _ = pd.measure(100)
    want = 3 * (g.n_clauses / g.n_vars) * math.log(2)
    assert phi == pytest.approx(want, rel=1e-9)
    assert abs(s_tilt) < 1e-9
    # and the populations stayed at the trivial point
    assert float(np.max(pd.shat)) == 0.0


def test_balanced_restricted_instance_collapses_to_factorized_point():
    g = formula.generate_regular(60, 4, 3, seed=11)
    pd = ldev.InstancePopDyn(g, "bp", x=-4.0, pop_size=80, seed=5,
                             restrict_balanced=True)
    for _ in range(250):
        pd.sweep()
    assert pd.s[:, 0, :].std() < 1e-9
    assert pd.s[:, 0, 0] == pytest.approx(GOLD, abs=1e-9)
    assert pd.s[:, 1, 0] == pytest.approx(1.0 - GOLD, abs=1e-9)
    phi, s_tilt, _ = pd.measure(400)
    assert s_tilt == pytest.approx(0.4488, abs=1e-3)
    assert phi - (-4.0) * s_tilt == pytest.approx(math.log(6), abs=1e-6)


def test_balanced_restricted_entropy_x_independent():
    # all balanced configurations share one factorized entropy on even L
    pts = []
    for x in (-6.0, 0.0, 6.0):
        pt = ldev.regular_factorized_popdyn(
            4, 3, "bp", x=x, pop_size=400, burn_sweeps=200,
            measure_sweeps=100, n_samples=400, seed=12, restrict_balanced=True)
        pts.append(pt.s)
    assert max(pts) - min(pts) < 5e-3


def test_curve_legendre_identity_and_flags():
    curve = ldev.ldf_curve(ldev.RegularEnsemble(4), base="bp",
                           xs=(-5.0, 0.0, 5.0), pop_size=300, burn_sweeps=150,
                           measure_sweeps=100, n_samples=300, seed=13)
    assert len(curve.points) == 3
    for p in curve.points:
        assert p.legendre_gap == pytest.approx(0.0, abs=1e-12)
    xs = [p.x for p in curve.points]
    ss = [p.s for p in curve.points]
    assert xs == sorted(xs)
    # monotone s(x) on the physical branch
    phys = [p for p in curve.points if p.physical]
    for a, b in zip(phys, phys[1:]):
        assert b.s >= a.s - 5e-3


def test_curve_finite_difference_cross_check():
    xs = (-2.0, -1.0, 0.0, 1.0, 2.0)
    curve = ldev.ldf_curve(ldev.RegularEnsemble(4), base="bp", xs=xs,
                           pop_size=400, burn_sweeps=200, measure_sweeps=150,
                           n_samples=400, seed=14)
    pts = curve.points
    step = 1.0
    for left, mid, right in zip(pts, pts[1:], pts[2:]):
        dphi_dx = (right.phi - left.phi) / (right.x - left.x)
        assert abs(mid.s - dphi_dx) < 5.0 * step


def test_mark_physical_branch_flags_convex_tail():
    pts = [ldev.LdfPoint(x=x, phi=0.0, s=s, l=l, ess=1.0, degenerate=False)
           for x, s, l in [(-3, 0.10, 0.50), (-2, 0.12, 0.58),
                           (-1, 0.20, 0.70), (0, 0.30, 0.75), (1, 0.40, 0.70)]]
    # make the two lowest-x points convex relative to the rest
    pts[0].l = 0.70
    marked = ldev.mark_physical_branch(pts)
    assert not marked[0].physical
    assert all(p.physical for p in marked[2:])


def test_curve_threads_deterministic():
    kw = dict(base="bp", xs=(-2.0, 0.0, 2.0), pop_size=80, burn_sweeps=40,
              measure_sweeps=30, n_samples=100, seed=20)
    c1 = ldev.ldf_curve(ldev.PoissonEnsemble(1.0, 3, 30), threads=1, **kw)
    c2 = ldev.ldf_curve(ldev.PoissonEnsemble(1.0, 3, 30), threads=2, **kw)
    for a, b in zip(c1.points, c2.points):
        assert a.phi == b.phi and a.s == b.s
