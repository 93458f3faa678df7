"""Large deviations of the Bethe entropy over negation-configurations.

The entropy (or complexity) of a formula is a sum of local clause, variable
and edge terms evaluated at a message-passing fixed point.  Treating the
negation bits as annealed degrees of freedom reweighted by exp(x * N * s)
turns the fixed-point condition into cavity equations for *distributions*
of messages conditioned on the local negation bit.  Those distributions are
represented as populations of P messages per (directed edge, J) pair and
iterated by reweighted population dynamics: candidate updates carry the
local normalizer z of the underlying update raised to the power x, and the
population is refreshed by systematic resampling proportional to those
weights.

Two solvers are provided:

* :class:`RegularPopDyn` - the degree-regular ensemble is edge-transitive,
  so two population pairs describe the whole graph and the thermodynamic
  limit is taken directly (vectorized numpy).
* :class:`InstancePopDyn` - one population pair per directed edge of a
  concrete graph (compiled kernels), used for Poisson ensembles.

The tilted free entropy per variable Phi(x) and its conjugate s(x) are
estimated by Monte Carlo over the converged populations; the rate curve is
l(s) = Phi - x * s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import formula
from ._kernels import impl as _impl
from ._kernels import get_impl

__all__ = [
    "RegularEnsemble",
    "PoissonEnsemble",
    "EdgePopulations",
    "LdfPoint",
    "LdfCurve",
    "RegularPopDyn",
    "InstancePopDyn",
    "popdyn_clause_step",
    "popdyn_var_step",
    "free_energy",
    "conjugate_entropy",
    "ldf_curve",
    "regular_factorized_popdyn",
    "balanced_logcount",
]

DEFAULT_X_GRID = (-100.0, -50.0, -20.0, -10.0, -5.0, -2.0, -1.0, 0.0,
                  1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0)
DEFAULT_BURN_SWEEPS = 1000
DEFAULT_MEASURE_SWEEPS = 1000
ESS_DEGENERATE_FRACTION = 0.01
_TINY = 1e-300


@dataclass
class RegularEnsemble:
    """Degree-regular ensemble: every variable sits in exactly L clauses."""
    L: int
    k: int = 3


@dataclass
class PoissonEnsemble:
    """Fixed-size instance with round(alpha*n) clauses on k uniform variables."""
    alpha: float
    k: int = 3
    n: int = 300


@dataclass
class EdgePopulations:
    """The two population pairs attached to one directed edge pair.

    ``s[J]`` holds P variable-to-clause base messages conditioned on the
    edge negation bit J, ``shat[J]`` the clause-to-variable ones.  The
    J-marginal is exactly 1/2 by construction: both conditionals always
    carry the same number of members.
    """
    s: np.ndarray     # (2, P) BP nu0, or (2, P, 2) SP (qS, qU)
    shat: np.ndarray  # (2, P)

    @property
    def pop_size(self):
        return self.s.shape[1]


# ---------------------------------------------------------------------------
# balanced negation bookkeeping
# ---------------------------------------------------------------------------

def _admissible_totals(d):
    """Totals of ones over d edges in a balanced configuration."""
    if d % 2 == 0:
        return (d // 2,)
    return ((d - 1) // 2, (d + 1) // 2)


def _balanced_count(d):
    """Number of balanced negation patterns on a degree-d variable."""
    return sum(math.comb(d, t) for t in _admissible_totals(d))


def balanced_tables(max_deg):
    """Sampling tables for balanced negation draws, indexed by degree.

    ``cav`` tables drive the cavity draw of d-1 bits conditioned on the
    target edge bit; ``full`` tables drive the draw of all d bits.  Option
    pairs carry -1 when only one count is admissible; ``pfirst`` is the
    probability of the first option.
    """
    r0c = np.full((max_deg + 1) * 2, -1, dtype=np.int32)
    r1c = np.full((max_deg + 1) * 2, -1, dtype=np.int32)
    pfc = np.zeros((max_deg + 1) * 2, dtype=np.float64)
    t0f = np.full(max_deg + 1, -1, dtype=np.int32)
    t1f = np.full(max_deg + 1, -1, dtype=np.int32)
    pff = np.zeros(max_deg + 1, dtype=np.float64)
    logbf = np.zeros(max_deg + 1, dtype=np.float64)
    for d in range(max_deg + 1):
        totals = _admissible_totals(d)
        opts = [(t, math.comb(d, t)) for t in totals]
        logbf[d] = math.log(sum(w for _, w in opts)) if d else 0.0
        t0f[d] = opts[0][0]
        if len(opts) == 2:
            t1f[d] = opts[1][0]
            pff[d] = opts[0][1] / (opts[0][1] + opts[1][1])
        else:
            pff[d] = 1.0
        for tgt in (0, 1):
            ropts = [(t - tgt, math.comb(d - 1, t - tgt)) for t in totals
                     if 0 <= t - tgt <= d - 1] if d >= 1 else []
            if not ropts:
                continue
            r0c[d * 2 + tgt] = ropts[0][0]
            if len(ropts) == 2:
                r1c[d * 2 + tgt] = ropts[1][0]
                pfc[d * 2 + tgt] = ropts[0][1] / (ropts[0][1] + ropts[1][1])
            else:
                pfc[d * 2 + tgt] = 1.0
    return r0c, r1c, pfc, t0f, t1f, pff, logbf


def _draw_balanced_counts(rng, n_rows, d, tgt, tables):
    """Vector of per-row ones-counts for a cavity draw of d-1 bits."""
    r0c, r1c, pfc = tables[0], tables[1], tables[2]
    r0, r1, pf = r0c[d * 2 + tgt], r1c[d * 2 + tgt], pfc[d * 2 + tgt]
    if r1 < 0:
        return np.full(n_rows, r0, dtype=np.int64)
    u = rng.random(n_rows)
    return np.where(u < pf, r0, r1)


def _bits_with_counts(rng, counts, n_slots):
    """Random 0/1 matrix with prescribed per-row ones-counts."""
    if n_slots == 0:
        return np.zeros((len(counts), 0), dtype=np.int64)
    ranks = np.argsort(rng.random((len(counts), n_slots)), axis=1)
    return (ranks < counts[:, None]).astype(np.int64)


def balanced_logcount(spec):
    """Log-number (per variable) of balanced negation-configurations.

    Regular even L: log C(L, L/2); regular odd L: log 2 + log C(L,(L-1)/2).
    Poisson: the Poisson-degree average of log-balanced-counts, summed until
    the relative tail drops below 1e-12.
    """
    if isinstance(spec, RegularEnsemble):
        return math.log(_balanced_count(spec.L))
    if isinstance(spec, PoissonEnsemble):
        lam = spec.k * spec.alpha
        total = 0.0
        log_pmf = -lam  # log P(d=0)
        d = 0
        while True:
            pmf = math.exp(log_pmf)
            if d:
                total += pmf * math.log(_balanced_count(d))
            d += 1
            log_pmf += math.log(lam) - math.log(d)
            # log-count grows only linearly in d, so once the pmf is far
            # below target precision the remaining tail is negligible
            if d > lam and pmf < 1e-18:
                break
        return total
    raise TypeError(f"unsupported ensemble spec {spec!r}")


# ---------------------------------------------------------------------------
# single-candidate cavity steps (the unit operations the sweeps vectorize)
# ---------------------------------------------------------------------------

def popdyn_clause_step(s_pops, x, rng, base="bp"):
    """Draw one reweighted clause-update candidate.

    ``s_pops`` are the (pop_J0, pop_J1) pairs of the other clause members.
    Returns ``(cand_j0, cand_j1, log_weight)``: the candidate message for
    either value of the target edge bit, and x*log(z) of the update
    normalizer (identically 0 for the survey base).
    """
    if base == "bp":
        pi = 1.0
        for pop0, pop1 in s_pops:
            jb = int(rng.integers(2))
            pop = pop0 if jb == 0 else pop1
            nu0 = pop[int(rng.integers(len(pop)))]
            pi *= nu0 if jb == 0 else 1.0 - nu0
        bad = (1.0 - pi) / (2.0 - pi)
        return bad, 1.0 - bad, x * math.log(2.0 - pi)
    if base == "sp":
        prod = 1.0
        for pop0, pop1 in s_pops:
            jb = int(rng.integers(2))
            pop = pop0 if jb == 0 else pop1
            prod *= pop[int(rng.integers(len(pop)))][1]
        return prod, prod, 0.0
    raise ValueError(f"unknown base {base!r}")


def popdyn_var_step(shat_pops, x, rng, base="bp", j_target=0, balanced=False):
    """Draw one reweighted variable-update candidate for the given target bit.

    ``shat_pops`` are the (pop_J0, pop_J1) pairs of the variable's other
    edges.  Returns ``(candidate, log_weight)``; the candidate is nu0 for
    the BP base and (qS, qU) for the survey base.  With ``balanced`` the
    drawn bits complete a balanced pattern around the variable.
    """
    d1 = len(shat_pops)
    if balanced:
        d = d1 + 1
        tables = balanced_tables(d)
        r = int(_draw_balanced_counts(rng, 1, d, j_target, tables)[0])
        bits = _bits_with_counts(rng, np.array([r]), d1)[0]
    else:
        bits = rng.integers(0, 2, size=d1)
    if base == "bp":
        a0 = 1.0
        a1 = 1.0
        for (pop0, pop1), jb in zip(shat_pops, bits):
            pop = pop0 if jb == 0 else pop1
            h = pop[int(rng.integers(len(pop)))]
            a0 *= h
            a1 *= 1.0 - h
        z = a0 + a1
        if z <= 0.0:
            return 0.5, float("-inf")
        return a0 / z, x * math.log(z)
    if base == "sp":
        p_same = 1.0
        p_opp = 1.0
        for (pop0, pop1), jb in zip(shat_pops, bits):
            pop = pop0 if jb == 0 else pop1
            f = 1.0 - pop[int(rng.integers(len(pop)))]
            if jb == j_target:
                p_same *= f
            else:
                p_opp *= f
        z = p_same + p_opp - p_same * p_opp
        if z <= 0.0:
            return (0.0, 0.0), float("-inf")
        return ((p_opp * (1.0 - p_same) / z, p_same * (1.0 - p_opp) / z),
                x * math.log(z))
    raise ValueError(f"unknown base {base!r}")


def _systematic_resample(logw, p_out, u):
    """Indices of a weight-proportional systematic resample."""
    wmax = np.max(logw)
    if not np.isfinite(wmax):
        return np.arange(p_out) % len(logw)
    w = np.exp(logw - wmax)
    cdf = np.cumsum(w)
    pos = (np.arange(p_out) + u) / p_out * cdf[-1]
    return np.minimum(np.searchsorted(cdf, pos, side="right"), len(logw) - 1)


def _log_mean_exp(xv):
    m = np.max(xv)
    if not np.isfinite(m):
        return float("-inf")
    return float(m + np.log(np.mean(np.exp(xv - m))))


def _tilted_stats(vals, xv):
    """(log mean exp, tilted mean, ESS fraction) over one sample block."""
    m = np.max(xv)
    if not np.isfinite(m):
        return float("-inf"), 0.0, 0.0
    w = np.exp(xv - m)
    sw = float(np.sum(w))
    lme = float(m + np.log(sw / len(w)))
    tilted = float(np.sum(w * vals) / sw)
    ess = sw * sw / float(np.sum(w * w)) / len(w)
    return lme, tilted, ess


# ---------------------------------------------------------------------------
# degree-regular ensemble (two population pairs, numpy-vectorized)
# ---------------------------------------------------------------------------

class RegularPopDyn:
    """Reweighted population dynamics for the L-regular ensemble."""

    def __init__(self, L, k, base, x, pop_size, seed, restrict_balanced=False,
                 n_per_slot=1, init="random"):
        if base not in ("bp", "sp"):
            raise ValueError(f"unknown base {base!r}")
        self.L = L
        self.k = k
        self.base = base
        self.x = float(x)
        self.p = int(pop_size)
        self.balanced = bool(restrict_balanced)
        self.n_cand = self.p * int(n_per_slot)
        self.rng = np.random.default_rng(seed)
        self.tables = balanced_tables(max(L, k) + 1)
        if base == "bp":
            if init == "random":
                self.s = self.rng.random((2, self.p))
                self.shat = self.rng.random((2, self.p))
            else:
                self.s = np.full((2, self.p), 0.5)
                self.shat = np.full((2, self.p), 0.5)
        else:
            if init == "random":
                g = self.rng.random((2, self.p, 3))
                g /= g.sum(axis=2, keepdims=True)
                self.s = g[:, :, :2].copy()
                self.shat = self.rng.random((2, self.p))
            elif init == "trivial":
                self.s = np.zeros((2, self.p, 2))
                self.shat = np.zeros((2, self.p))
            else:
                raise ValueError(f"unknown init {init!r}")

    @property
    def populations(self):
        return EdgePopulations(s=self.s, shat=self.shat)

    def _draw_members(self, pops, n_rows, n_slots, bits):
        idx = self.rng.integers(0, self.p, size=(n_rows, n_slots))
        return pops[bits, idx]

    def _cavity_bits(self, n_rows, n_slots, tgt):
        if not self.balanced:
            return self.rng.integers(0, 2, size=(n_rows, n_slots))
        counts = _draw_balanced_counts(self.rng, n_rows, n_slots + 1, tgt,
                                       self.tables)
        return _bits_with_counts(self.rng, counts, n_slots)

    def _full_bits(self, n_rows, d):
        if not self.balanced:
            return self.rng.integers(0, 2, size=(n_rows, d))
        t0, t1, pf = (self.tables[3][d], self.tables[4][d], self.tables[5][d])
        if t1 < 0:
            counts = np.full(n_rows, t0, dtype=np.int64)
        else:
            counts = np.where(self.rng.random(n_rows) < pf, t0, t1)
        return _bits_with_counts(self.rng, counts, d)

    def sweep(self):
        """One synchronous refresh of both population pairs."""
        nc, k, L = self.n_cand, self.k, self.L
        # clause direction: K-1 unconstrained draws from S
        bits = self.rng.integers(0, 2, size=(nc, k - 1))
        if self.base == "bp":
            vals = self._draw_members(self.s, nc, k - 1, bits)
            pi = np.prod(np.where(bits == 0, vals, 1.0 - vals), axis=1)
            cand = (1.0 - pi) / (2.0 - pi)
            logw = self.x * np.log(2.0 - pi)
            sel = _systematic_resample(logw, self.p, float(self.rng.random()))
            self.shat = np.stack([cand[sel], 1.0 - cand[sel]])
        else:
            qu = self._draw_members(self.s[:, :, 1], nc, k - 1, bits)
            cand = np.prod(qu, axis=1)
            sel = _systematic_resample(np.zeros(nc), self.p,
                                       float(self.rng.random()))
            picked = cand[sel]
            self.shat = np.stack([picked, picked])
        # variable direction: L-1 draws from Shat, one target (or two when
        # the balanced restriction breaks the J symmetry)
        targets = (0, 1) if self.balanced else (0,)
        new_s = np.empty_like(self.s)
        for tgt in targets:
            bits = self._cavity_bits(nc, L - 1, tgt)
            hv = self._draw_members(self.shat, nc, L - 1, bits)
            if self.base == "bp":
                a0 = np.prod(hv, axis=1)
                a1 = np.prod(1.0 - hv, axis=1)
                z = a0 + a1
                bad = z <= 0.0
                zs = np.where(bad, 1.0, z)
                cand = np.where(bad, 0.5, a0 / zs)
                logw = np.where(bad, -np.inf, self.x * np.log(zs))
                sel = _systematic_resample(logw, self.p,
                                           float(self.rng.random()))
                new_s[tgt] = cand[sel]
            else:
                f = 1.0 - hv
                p_same = np.prod(np.where(bits == tgt, f, 1.0), axis=1)
                p_opp = np.prod(np.where(bits != tgt, f, 1.0), axis=1)
                z = p_same + p_opp - p_same * p_opp
                bad = z <= 0.0
                zs = np.where(bad, 1.0, z)
                qs = np.where(bad, 0.0, p_opp * (1.0 - p_same) / zs)
                qu = np.where(bad, 0.0, p_same * (1.0 - p_opp) / zs)
                logw = np.where(bad, -np.inf, self.x * np.log(zs))
                sel = _systematic_resample(logw, self.p,
                                           float(self.rng.random()))
                new_s[tgt, :, 0] = qs[sel]
                new_s[tgt, :, 1] = qu[sel]
        if not self.balanced:
            new_s[1] = new_s[0]
        self.s = new_s

    def measure(self, n_samples):
        """(phi, tilted entropy, min ESS fraction) from the current state."""
        ns, k, L, x = int(n_samples), self.k, self.L, self.x
        # clause functional over K draws from S
        bits = self.rng.integers(0, 2, size=(ns, k))
        if self.base == "bp":
            vals = self._draw_members(self.s, ns, k, bits)
            pi = np.prod(np.where(bits == 0, vals, 1.0 - vals), axis=1)
            va = np.log(np.maximum(1.0 - pi, _TINY))
        else:
            qu = self._draw_members(self.s[:, :, 1], ns, k, bits)
            va = np.log(np.maximum(1.0 - np.prod(qu, axis=1), _TINY))
        fa, ta, ess_a = _tilted_stats(va, x * va)
        # variable functional over L draws from Shat
        bits = self._full_bits(ns, L)
        hv = self._draw_members(self.shat, ns, L, bits)
        if self.base == "bp":
            vi = np.log(np.maximum(np.prod(hv, axis=1)
                                   + np.prod(1.0 - hv, axis=1), _TINY))
        else:
            f = 1.0 - hv
            p0 = np.prod(np.where(bits == 0, f, 1.0), axis=1)
            p1 = np.prod(np.where(bits == 1, f, 1.0), axis=1)
            vi = np.log(np.maximum(p0 + p1 - p0 * p1, _TINY))
        fi, ti, ess_i = _tilted_stats(vi, x * vi)
        if self.balanced:
            fi += self.tables[6][L] - L * math.log(2.0)
        # edge functional over paired draws sharing one J bit
        jb = self.rng.integers(0, 2, size=ns)
        i1 = self.rng.integers(0, self.p, size=ns)
        i2 = self.rng.integers(0, self.p, size=ns)
        if self.base == "bp":
            mm = self.s[jb, i1]
            hh = self.shat[jb, i2]
            ve = np.log(np.maximum(mm * hh + (1.0 - mm) * (1.0 - hh), _TINY))
        else:
            qu = self.s[jb, i1, 1]
            hh = self.shat[jb, i2]
            ve = np.log(np.maximum(1.0 - qu * hh, _TINY))
        fe, te, ess_e = _tilted_stats(ve, x * ve)
        fe += math.log(0.5)
        alpha = L / k
        phi = alpha * fa + fi - L * fe
        s_tilt = alpha * ta + ti - L * te
        return phi, s_tilt, min(ess_a, ess_i, ess_e)


# ---------------------------------------------------------------------------
# per-edge populations on a concrete instance (compiled kernels)
# ---------------------------------------------------------------------------

class InstancePopDyn:
    """Reweighted population dynamics with one population pair per edge."""

    def __init__(self, graph, base, x, pop_size, seed, restrict_balanced=False,
                 n_per_slot=1, init="random", backend=None):
        if base not in ("bp", "sp"):
            raise ValueError(f"unknown base {base!r}")
        self.graph = graph
        self.base = base
        self.x = float(x)
        self.p = int(pop_size)
        self.balanced = bool(restrict_balanced)
        self.n_cand = self.p * int(n_per_slot)
        self.kern = get_impl(backend) if backend else _impl
        self.rng = np.random.default_rng(seed)
        g = graph
        self.n_edges = g.n_edges
        degs = g.degrees
        self.max_deg = int(degs.max()) if len(degs) else 0
        # flattened "other edges of my variable" lists per edge
        deg_e = degs[g.clause_vars].astype(np.int32)
        self.deg_edge = deg_e
        off = np.zeros(self.n_edges + 1, dtype=np.int64)
        np.cumsum(deg_e - 1, out=off[1:])
        others = np.empty(int(off[-1]), dtype=np.int32)
        pos = 0
        for e in range(self.n_edges):
            v = int(g.clause_vars[e])
            for t in range(int(g.var_ptr[v]), int(g.var_ptr[v + 1])):
                eb = int(g.var_eids[t])
                if eb != e:
                    others[pos] = eb
                    pos += 1
        self.off = off
        self.others = others
        tabs = balanced_tables(self.max_deg + 1)
        (self.r0c, self.r1c, self.pfc,
         self.t0f, self.t1f, self.pff, self.logbf) = tabs
        E, P = self.n_edges, self.p
        if base == "bp":
            if init == "random":
                self.s = self.rng.random((E, 2, P))
            else:
                self.s = np.full((E, 2, P), 0.5)
            self.s_next = np.empty_like(self.s)
            self.shat = self.rng.random((E, 2, P)) if init == "random" \
                else np.full((E, 2, P), 0.5)
        else:
            if init == "random":
                g3 = self.rng.random((E, 2, P, 3))
                g3 /= g3.sum(axis=3, keepdims=True)
                self.s = np.ascontiguousarray(g3[:, :, :, :2])
                self.shat = self.rng.random((E, 2, P))
            elif init == "trivial":
                self.s = np.zeros((E, 2, P, 2))
                self.shat = np.zeros((E, 2, P))
            else:
                raise ValueError(f"unknown init {init!r}")
            self.s_next = np.empty_like(self.s)

    def edge_populations(self, e):
        return EdgePopulations(s=self.s[e], shat=self.shat[e])

    def sweep(self):
        """Clause phase then variable phase, each from the other's snapshot."""
        g, P, nc = self.graph, self.p, self.n_cand
        E, k = self.n_edges, g.k
        rng = self.rng
        na = E * nc * (k - 1)
        uj_a = rng.random(na)
        midx_a = rng.integers(0, P, size=na, dtype=np.int32)
        res_a = rng.random(E)
        n_tgt = 2 if self.balanced else 1
        nb = int(self.off[-1]) * nc * n_tgt
        uj_b = rng.random(nb)
        midx_b = rng.integers(0, P, size=nb, dtype=np.int32)
        ucnt = rng.random(E * n_tgt * nc) if self.balanced \
            else np.empty(0, dtype=np.float64)
        res_b = rng.random(E * n_tgt)
        if self.base == "bp":
            self.kern.popdyn_bp_sweep_a(k, P, nc, self.x, self.s, self.shat,
                                        uj_a, midx_a, res_a)
            self.kern.popdyn_bp_sweep_b(
                P, nc, self.x, int(self.balanced), self.shat, self.s_next,
                self.others, self.off, self.deg_edge,
                self.r0c, self.r1c, self.pfc, uj_b, midx_b, ucnt, res_b)
        else:
            self.kern.popdyn_sp_sweep_a(k, P, nc, self.x, self.s, self.shat,
                                        uj_a, midx_a, res_a)
            self.kern.popdyn_sp_sweep_b(
                P, nc, self.x, int(self.balanced), self.shat, self.s_next,
                self.others, self.off, self.deg_edge,
                self.r0c, self.r1c, self.pfc, uj_b, midx_b, ucnt, res_b)
        self.s, self.s_next = self.s_next, self.s

    def measure(self, n_samples):
        """(phi, tilted entropy, min ESS fraction); Monte Carlo per node."""
        g, P = self.graph, self.p
        E, k, ns = self.n_edges, g.k, int(n_samples)
        m = g.n_clauses
        rng = self.rng
        na = m * ns * k
        uj_a = rng.random(na)
        midx_a = rng.integers(0, P, size=na, dtype=np.int32)
        ni = ns * E
        uj_i = rng.random(ni)
        midx_i = rng.integers(0, P, size=ni, dtype=np.int32)
        ucnt_i = rng.random(g.n_vars * ns) if self.balanced \
            else np.empty(0, dtype=np.float64)
        ne = E * ns
        uj_e = rng.random(ne)
        midx_e1 = rng.integers(0, P, size=ne, dtype=np.int32)
        midx_e2 = rng.integers(0, P, size=ne, dtype=np.int32)
        fn = self.kern.popdyn_bp_measure if self.base == "bp" \
            else self.kern.popdyn_sp_measure
        fa, fi, fe, ta, ti, te, min_ess = fn(
            k, P, ns, self.x, int(self.balanced), self.s, self.shat,
            g.clause_vars, g.var_ptr, g.var_eids,
            self.t0f, self.t1f, self.pff, self.logbf,
            uj_a, midx_a, uj_i, midx_i, ucnt_i, uj_e, midx_e1, midx_e2)
        n = g.n_vars
        return (fa + fi - fe) / n, (ta + ti - te) / n, min_ess


# ---------------------------------------------------------------------------
# estimation protocol and the rate curve
# ---------------------------------------------------------------------------

def free_energy(pd, n_samples=1000):
    """Monte-Carlo estimate of Phi(x) from the current populations."""
    phi, _, _ = pd.measure(n_samples)
    return phi


def conjugate_entropy(pd, n_samples=1000):
    """Reweighted mean entropy (complexity) at the solver's x."""
    _, s_tilt, _ = pd.measure(n_samples)
    return s_tilt


@dataclass
class LdfPoint:
    x: float
    phi: float
    s: float
    l: float
    ess: float
    degenerate: bool
    physical: bool = True

    @property
    def legendre_gap(self):
        return self.phi - (self.l + self.x * self.s)


@dataclass
class LdfCurve:
    points: list = field(default_factory=list)

    def physical_points(self):
        return [p for p in self.points if p.physical]

    def rows(self):
        return [(p.x, p.phi, p.s, p.l, int(p.physical)) for p in self.points]


def equilibrate_and_measure(pd, burn_sweeps, measure_sweeps, n_samples,
                            max_extensions=2):
    """Burn in, then average measurements over sweeps.

    The measurement window is extended (up to ``max_extensions`` times) when
    the drift between its halves exceeds twice the standard error of the
    mean, so slowly relaxing points get more time automatically.
    """
    for _ in range(int(burn_sweeps)):
        pd.sweep()
    phis, ss, esss = [], [], []
    windows = 0
    while True:
        for _ in range(int(measure_sweeps)):
            pd.sweep()
            phi, s_tilt, ess = pd.measure(n_samples)
            phis.append(phi)
            ss.append(s_tilt)
            esss.append(ess)
        windows += 1
        half = len(phis) // 2
        drift = abs(np.mean(phis[:half]) - np.mean(phis[half:]))
        sem = np.std(phis) / math.sqrt(len(phis)) if len(phis) > 1 else 0.0
        if drift <= 2.0 * sem or windows > max_extensions:
            break
    phi = float(np.mean(phis))
    s_tilt = float(np.mean(ss))
    ess = float(np.min(esss))
    return LdfPoint(
        x=pd.x, phi=phi, s=s_tilt, l=phi - pd.x * s_tilt, ess=ess,
        degenerate=ess < ESS_DEGENERATE_FRACTION)


def _make_popdyn(spec, base, x, pop_size, seed, restrict_balanced, n_per_slot,
                 backend=None):
    if isinstance(spec, RegularEnsemble):
        return RegularPopDyn(spec.L, spec.k, base, x, pop_size, seed,
                             restrict_balanced=restrict_balanced,
                             n_per_slot=n_per_slot)
    if isinstance(spec, PoissonEnsemble):
        sub = np.random.SeedSequence(seed).spawn(2)
        graph = formula.generate_poisson(spec.n, spec.alpha, spec.k,
                                         sub[0])
        return InstancePopDyn(graph, base, x, pop_size, sub[1],
                              restrict_balanced=restrict_balanced,
                              n_per_slot=n_per_slot, backend=backend)
    if isinstance(spec, formula.FactorGraph):
        return InstancePopDyn(spec, base, x, pop_size, seed,
                              restrict_balanced=restrict_balanced,
                              n_per_slot=n_per_slot, backend=backend)
    raise TypeError(f"unsupported ensemble spec {spec!r}")


def mark_physical_branch(points, slope_eps=1e-6):
    """Flag the non-concave low-x continuation of the rate curve.

    Points are scanned in ascending x; where the discrete curvature of l(s)
    on three consecutive points turns convex, everything at or below that x
    is marked unphysical.
    """
    pts = sorted(points, key=lambda p: p.x)
    for p in pts:
        p.physical = True
    x0 = None
    for im1, i, ip1 in zip(range(len(pts) - 2), range(1, len(pts) - 1),
                           range(2, len(pts))):
        a, b, c = pts[im1], pts[i], pts[ip1]
        ds1 = b.s - a.s
        ds2 = c.s - b.s
        if abs(ds1) < slope_eps or abs(ds2) < slope_eps:
            continue
        slope1 = (b.l - a.l) / ds1
        slope2 = (c.l - b.l) / ds2
        if slope2 > slope1 + slope_eps:
            x0 = b.x
    if x0 is not None:
        for p in pts:
            if p.x < x0:
                p.physical = False
    return pts


def ldf_curve(spec, base="bp", xs=DEFAULT_X_GRID, pop_size=1000,
              burn_sweeps=DEFAULT_BURN_SWEEPS,
              measure_sweeps=DEFAULT_MEASURE_SWEEPS, n_samples=100,
              seed=0, restrict_balanced=False, n_per_slot=1, threads=1,
              progress=None, backend=None):
    """Rate curve l(s) over a grid of tilt parameters.

    Each x point equilibrates an independent population-dynamics run with a
    seed derived from the master seed, so points are reproducible and
    embarrassingly parallel.
    """
    xs = sorted(float(x) for x in xs)
    seeds = np.random.SeedSequence(seed).spawn(len(xs) + 1)
    if isinstance(spec, PoissonEnsemble):
        # one concrete graph carries the populations for every tilt value
        spec = formula.generate_poisson(spec.n, spec.alpha, spec.k, seeds[-1])
    seeds = seeds[:-1]
    tasks = [(spec, base, x, pop_size, ss, restrict_balanced, n_per_slot,
              burn_sweeps, measure_sweeps, n_samples, backend)
             for x, ss in zip(xs, seeds)]
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(_curve_point_task, tasks))
    else:
        points = []
        for t in tasks:
            pt = _curve_point_task(t)
            points.append(pt)
            if progress:
                progress(pt)
    return LdfCurve(points=mark_physical_branch(points))


def _curve_point_task(args):
    (spec, base, x, pop_size, ss, restrict_balanced, n_per_slot,
     burn_sweeps, measure_sweeps, n_samples, backend) = args
    pd = _make_popdyn(spec, base, x, pop_size, ss, restrict_balanced,
                      n_per_slot, backend)
    return equilibrate_and_measure(pd, burn_sweeps, measure_sweeps, n_samples)


def regular_factorized_popdyn(L, k=3, base="bp", x=0.0, pop_size=1000,
                              burn_sweeps=DEFAULT_BURN_SWEEPS,
                              measure_sweeps=DEFAULT_MEASURE_SWEEPS,
                              n_samples=100, seed=0, restrict_balanced=False,
                              n_per_slot=1):
    """One tilted point of the regular ensemble (two populations total)."""
    pd = RegularPopDyn(L, k, base, x, pop_size, seed,
                       restrict_balanced=restrict_balanced,
                       n_per_slot=n_per_slot)
    return equilibrate_and_measure(pd, burn_sweeps, measure_sweeps, n_samples)
