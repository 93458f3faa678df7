"""Pure-Python reference kernels.

Selected at import when the compiled extension is unavailable (or when
``ADSAT_PURE_PYTHON=1``).  Every function here has an identically named,
identically behaving twin in ``_fast.pyx``; both consume the same
pre-generated random arrays, so results agree across backends up to float
rounding.  These loops are written for clarity, not speed.
"""
from __future__ import annotations

import math

__all__ = [
    "bp_sweep", "bp_entropy_terms",
    "sp_sweep", "sp_complexity_terms",
    "count_kernel",
    "popdyn_bp_sweep_a", "popdyn_bp_sweep_b", "popdyn_bp_measure",
    "popdyn_sp_sweep_a", "popdyn_sp_sweep_b", "popdyn_sp_measure",
]

BACKEND_NAME = "python"

_TINY = 1e-300


# ---------------------------------------------------------------------------
# belief propagation on a fixed instance
# ---------------------------------------------------------------------------

def bp_sweep(k, clause_vars, var_ptr, var_eids, j, nuhat0, order, damping):
    """One asynchronous sweep over clauses in the given order.

    ``nuhat0[e]`` is the 0-component of the clause-to-variable message on
    edge ``e``; it is updated in place with damping.  Returns
    ``(max_change, contradiction)``.
    """
    kk = int(k)
    max_delta = 0.0
    nu_bad = [0.0] * kk
    for a in order:
        a = int(a)
        base = a * kk
        # cavity marginals nu_{j->a} for every slot of clause a
        for s in range(kk):
            v = int(clause_vars[base + s])
            p0 = 1.0
            p1 = 1.0
            for t in range(int(var_ptr[v]), int(var_ptr[v + 1])):
                e = int(var_eids[t])
                if e // kk == a:
                    continue
                h = nuhat0[e]
                p0 *= h
                p1 *= 1.0 - h
            z = p0 + p1
            if z <= 0.0:
                return max_delta, 1
            nu_bad[s] = (p0 / z) if j[base + s] == 0 else (p1 / z)
        # update every outgoing message of clause a
        for s in range(kk):
            pi = 1.0
            for t in range(kk):
                if t != s:
                    pi *= nu_bad[t]
            e = base + s
            good = 1.0 / (2.0 - pi)
            cand = (1.0 - pi) * good if j[e] == 0 else good
            new = (1.0 - damping) * cand + damping * nuhat0[e]
            delta = abs(new - nuhat0[e])
            if delta > max_delta:
                max_delta = delta
            nuhat0[e] = new
    return max_delta, 0


def bp_entropy_terms(k, clause_vars, var_ptr, var_eids, j, nuhat0):
    """Clause, variable and edge contributions to the Bethe entropy.

    Returns ``(sum_a, sum_i, sum_ai, ok)``; ``ok == 0`` when some log
    argument vanished (contradictory fixed point).
    """
    kk = int(k)
    n_vars = len(var_ptr) - 1
    m = len(clause_vars) // kk if kk else 0
    sum_i = 0.0
    for v in range(n_vars):
        p0 = 1.0
        p1 = 1.0
        for t in range(int(var_ptr[v]), int(var_ptr[v + 1])):
            e = int(var_eids[t])
            p0 *= nuhat0[e]
            p1 *= 1.0 - nuhat0[e]
        z = p0 + p1
        if z <= 0.0:
            return 0.0, 0.0, 0.0, 0
        sum_i += math.log(z)
    sum_a = 0.0
    sum_ai = 0.0
    for a in range(m):
        base = a * kk
        pi_full = 1.0
        for s in range(kk):
            v = int(clause_vars[base + s])
            p0 = 1.0
            p1 = 1.0
            for t in range(int(var_ptr[v]), int(var_ptr[v + 1])):
                e = int(var_eids[t])
                if e // kk == a:
                    continue
                p0 *= nuhat0[e]
                p1 *= 1.0 - nuhat0[e]
            z = p0 + p1
            if z <= 0.0:
                return 0.0, 0.0, 0.0, 0
            nu0 = p0 / z
            e = base + s
            pi_full *= nu0 if j[e] == 0 else 1.0 - nu0
            olap = nu0 * nuhat0[e] + (1.0 - nu0) * (1.0 - nuhat0[e])
            if olap <= 0.0:
                return 0.0, 0.0, 0.0, 0
            sum_ai += math.log(olap)
        if pi_full >= 1.0:
            return 0.0, 0.0, 0.0, 0
        sum_a += math.log(1.0 - pi_full)
    return sum_a, sum_i, sum_ai, 1


# ---------------------------------------------------------------------------
# survey propagation on a fixed instance
# ---------------------------------------------------------------------------

def _sp_cavity_products(kk, clause_vars, var_ptr, var_eids, j, qhat, a, s):
    """(same-J, opposite-J) products of (1 - qhat) seen by slot s of clause a."""
    base = a * kk
    v = int(clause_vars[base + s])
    js = j[base + s]
    p_same = 1.0
    p_opp = 1.0
    for t in range(int(var_ptr[v]), int(var_ptr[v + 1])):
        e = int(var_eids[t])
        if e // kk == a:
            continue
        f = 1.0 - qhat[e]
        if j[e] == js:
            p_same *= f
        else:
            p_opp *= f
    return p_same, p_opp


def sp_sweep(k, clause_vars, var_ptr, var_eids, j, qhat, order, damping):
    """One asynchronous survey-propagation sweep (damped, in place)."""
    kk = int(k)
    max_delta = 0.0
    qu = [0.0] * kk
    for a in order:
        a = int(a)
        base = a * kk
        for s in range(kk):
            p_same, p_opp = _sp_cavity_products(
                kk, clause_vars, var_ptr, var_eids, j, qhat, a, s)
            z = p_same + p_opp - p_same * p_opp
            if z <= 0.0:
                return max_delta, 1
            qu[s] = p_same * (1.0 - p_opp) / z
        for s in range(kk):
            cand = 1.0
            for t in range(kk):
                if t != s:
                    cand *= qu[t]
            e = base + s
            new = (1.0 - damping) * cand + damping * qhat[e]
            delta = abs(new - qhat[e])
            if delta > max_delta:
                max_delta = delta
            qhat[e] = new
    return max_delta, 0


def sp_complexity_terms(k, clause_vars, var_ptr, var_eids, j, qhat):
    """Clause, variable and edge contributions to the complexity."""
    kk = int(k)
    n_vars = len(var_ptr) - 1
    m = len(clause_vars) // kk if kk else 0
    sum_i = 0.0
    for v in range(n_vars):
        p0 = 1.0
        p1 = 1.0
        for t in range(int(var_ptr[v]), int(var_ptr[v + 1])):
            e = int(var_eids[t])
            f = 1.0 - qhat[e]
            if j[e] == 0:
                p0 *= f
            else:
                p1 *= f
        z = p0 + p1 - p0 * p1
        if z <= 0.0:
            return 0.0, 0.0, 0.0, 0
        sum_i += math.log(z)
    sum_a = 0.0
    sum_ai = 0.0
    for a in range(m):
        base = a * kk
        pi_full = 1.0
        for s in range(kk):
            p_same, p_opp = _sp_cavity_products(
                kk, clause_vars, var_ptr, var_eids, j, qhat, a, s)
            z = p_same + p_opp - p_same * p_opp
            if z <= 0.0:
                return 0.0, 0.0, 0.0, 0
            qu = p_same * (1.0 - p_opp) / z
            e = base + s
            pi_full *= qu
            olap = 1.0 - qu * qhat[e]
            if olap <= 0.0:
                return 0.0, 0.0, 0.0, 0
            sum_ai += math.log(olap)
        if pi_full >= 1.0:
            return 0.0, 0.0, 0.0, 0
        sum_a += math.log(1.0 - pi_full)
    return sum_a, sum_i, sum_ai, 1


# ---------------------------------------------------------------------------
# exact model counting (DPLL with components)
# ---------------------------------------------------------------------------

class _Budget(Exception):
    pass


IE_MAX_CLAUSES = 10  # components this small are counted by inclusion-exclusion


def count_kernel(n_vars, k, clause_vars, clause_j, occ_ptr, occ_cls, occ_j,
                 max_nodes, cache=None):
    """Count satisfying assignments of the whole formula.

    Depth-first search with queue-driven unit propagation and
    connected-component factorization.  Small components are finished in
    closed form by inclusion-exclusion over their violated-clause events;
    larger ones branch on the most frequent variable among their active
    clauses.  Component counts are memoized in ``cache``, keyed by the
    packed residual clause structure, so entries stay valid across repeated
    counts of near-identical formulas.  Returns ``(count, nodes,
    completed)``; ``count`` is None when the node budget was exhausted.
    """
    import struct

    n = int(n_vars)
    kk = int(k)
    m = len(clause_vars) // kk if kk else 0
    if cache is None:
        cache = {}
    # packed keys need one byte per literal, 0xFF reserved as padding
    use_cache = n <= 126 and kk <= 8
    use_ie = n <= 120
    assign = [-1] * n
    sat_cnt = [0] * m
    nfree = [kk] * m
    trail = []
    nodes = [0]
    units = []

    def set_var(v, val):
        assign[v] = val
        trail.append(v)
        for t in range(occ_ptr[v], occ_ptr[v + 1]):
            c = occ_cls[t]
            nfree[c] -= 1
            if val != occ_j[t]:
                sat_cnt[c] += 1
            elif sat_cnt[c] == 0 and nfree[c] <= 1:
                units.append(c)

    def undo_to(mark):
        while len(trail) > mark:
            v = trail.pop()
            val = assign[v]
            assign[v] = -1
            for t in range(occ_ptr[v], occ_ptr[v + 1]):
                c = occ_cls[t]
                nfree[c] += 1
                if val != occ_j[t]:
                    sat_cnt[c] -= 1

    def propagate(clauses):
        """Unit-propagate within the given clause scope; True on conflict."""
        units.clear()
        for c in clauses:
            if sat_cnt[c] == 0 and nfree[c] <= 1:
                units.append(c)
        while units:
            c = units.pop()
            if sat_cnt[c] != 0:
                continue
            if nfree[c] == 0:
                return True
            if nfree[c] != 1:
                continue
            base = c * kk
            for s in range(kk):
                v = int(clause_vars[base + s])
                if assign[v] == -1:
                    set_var(v, 1 - clause_j[base + s])
                    break
        return False

    def components(clauses):
        """Split active clauses into groups connected via unassigned vars."""
        active = [c for c in clauses if sat_cnt[c] == 0]
        comp_of = {}
        var_seen = {}
        groups = []
        for c in active:
            if c in comp_of:
                continue
            group = []
            stack = [c]
            comp_of[c] = len(groups)
            while stack:
                cc = stack.pop()
                group.append(cc)
                base = cc * kk
                for s in range(kk):
                    v = int(clause_vars[base + s])
                    if assign[v] != -1 or v in var_seen:
                        continue
                    var_seen[v] = True
                    for t in range(occ_ptr[v], occ_ptr[v + 1]):
                        c2 = occ_cls[t]
                        if sat_cnt[c2] == 0 and c2 not in comp_of:
                            comp_of[c2] = len(groups)
                            stack.append(c2)
            groups.append(group)
        return groups

    def component_key(clauses):
        """Sorted uint64 codes of the residual clauses, packed to bytes."""
        codes = []
        for c in clauses:
            base = c * kk
            lits = sorted((int(clause_vars[base + s]) << 1)
                          | int(clause_j[base + s])
                          for s in range(kk)
                          if assign[clause_vars[base + s]] == -1)
            code = 0xFFFFFFFFFFFFFFFF
            for idx, lit in enumerate(lits):
                code &= ~(0xFF << (8 * idx))
                code |= lit << (8 * idx)
            codes.append(code)
        codes.sort()
        return struct.pack(f"<{len(codes)}Q", *codes)

    def pick_branch(clauses):
        counts = {}
        for c in clauses:
            base = c * kk
            for s in range(kk):
                v = int(clause_vars[base + s])
                if assign[v] == -1:
                    counts[v] = counts.get(v, 0) + 1
        best_v, best_n = -1, -1
        for v in sorted(counts):
            if counts[v] > best_n:
                best_v, best_n = v, counts[v]
        return best_v

    def inclusion_exclusion(clauses, nv):
        """Closed-form count of one small component over its nv variables."""
        cl = []
        for c in clauses:
            base = c * kk
            mask = 0
            pat = 0
            for s in range(kk):
                v = int(clause_vars[base + s])
                if assign[v] == -1:
                    mask |= 1 << v
                    if clause_j[base + s]:
                        pat |= 1 << v
            cl.append((mask, pat))
        nc = len(cl)
        # subset DP: each subset extends (subset minus lowest clause) by one
        masks = [0] * (1 << nc)
        pats = [0] * (1 << nc)
        alive = [True] * (1 << nc)
        coeff = {0: 1}
        for sub in range(1, 1 << nc):
            low = sub & -sub
            rest = sub ^ low
            if not alive[rest]:
                alive[sub] = False
                continue
            mc, pc = cl[low.bit_length() - 1]
            inter = masks[rest] & mc
            if (pats[rest] & inter) != (pc & inter):
                alive[sub] = False
                continue
            m_ = masks[rest] | mc
            masks[sub] = m_
            pats[sub] = pats[rest] | pc
            b = bin(m_).count("1")
            sign = -1 if bin(sub).count("1") & 1 else 1
            coeff[b] = coeff.get(b, 0) + sign
        return sum(co << (nv - b) for b, co in coeff.items())

    def count(clauses, var_count):
        """Count models of one component; restores state before returning."""
        nodes[0] += 1
        if nodes[0] > max_nodes:
            raise _Budget
        mark = len(trail)
        if propagate(clauses):
            undo_to(mark)
            return 0
        groups = components(clauses)
        covered = 0
        group_vars = []
        for g in groups:
            seen = set()
            for c in g:
                base = c * kk
                for s in range(kk):
                    v = int(clause_vars[base + s])
                    if assign[v] == -1:
                        seen.add(v)
            group_vars.append(len(seen))
            covered += len(seen)
        assigned_here = len(trail) - mark
        free = var_count - assigned_here - covered
        total = 1 << free
        for g, nv in zip(groups, group_vars):
            if total == 0:
                break
            if use_ie and len(g) <= IE_MAX_CLAUSES:
                # nv is determined by the key (all component vars appear in
                # its clauses), so these memoize like branched components
                if use_cache and len(g) >= 4:
                    key = component_key(g)
                    sub = cache.get(key)
                    if sub is None:
                        sub = inclusion_exclusion(g, nv)
                        if len(cache) >= 500_000:
                            cache.clear()
                        cache[key] = sub
                    total *= sub
                else:
                    total *= inclusion_exclusion(g, nv)
                continue
            key = component_key(g) if use_cache else None
            sub = cache.get(key) if use_cache else None
            if sub is None:
                x = pick_branch(g)
                sub = 0
                for val in (0, 1):
                    m2 = len(trail)
                    set_var(x, val)
                    sub += count(g, nv - 1)
                    undo_to(m2)
                if use_cache:
                    if len(cache) >= 500_000:
                        cache.clear()
                    cache[key] = sub
            total *= sub
        undo_to(mark)
        return total

    in_formula = {int(v) for v in clause_vars}
    outside = n - len(in_formula)
    try:
        result = count(list(range(m)), len(in_formula)) << outside
        return result, nodes[0], True
    except _Budget:
        return None, nodes[0], False


# ---------------------------------------------------------------------------
# per-edge population dynamics, BP base
#
# S[e, J, p]    variable-to-clause message nu^0, conditioned on the edge
#               negation J; Shat[e, J, p] clause-to-variable message nu^0.
# Random inputs are pre-generated arrays laid out by (edge, candidate, slot);
# see ldev.InstancePopDyn for the layout bookkeeping.
# ---------------------------------------------------------------------------

def _resample(logw, n_cand, p_out, u, sel):
    """Systematic resampling: fill ``sel`` with indices into the candidates."""
    wmax = max(logw[:n_cand])
    if wmax == float("-inf"):
        for i in range(p_out):
            sel[i] = i % n_cand
        return 0
    w = [math.exp(lw - wmax) for lw in logw[:n_cand]]
    wsum = 0.0
    for x in w:
        wsum += x
    jj = 0
    cum = w[0]
    for i in range(p_out):
        pos = (i + u) / p_out * wsum
        while cum <= pos and jj < n_cand - 1:
            jj += 1
            cum += w[jj]
        sel[i] = jj
    return 1


def popdyn_bp_sweep_a(k, p, n_cand, x, s_pop, shat_new, uj, midx, res_u):
    """Clause-to-variable phase: refresh every Shat population from S."""
    kk = int(k)
    n_edges = s_pop.shape[0]
    cand = [0.0] * n_cand
    logw = [0.0] * n_cand
    sel = [0] * p
    pos = 0
    for e in range(n_edges):
        a = e // kk
        base = a * kk
        for c in range(n_cand):
            pi = 1.0
            for t in range(kk):
                et = base + t
                if et == e:
                    continue
                jb = 0 if uj[pos] < 0.5 else 1
                mm = s_pop[et, jb, midx[pos]]
                pos += 1
                pi *= mm if jb == 0 else 1.0 - mm
            cand[c] = (1.0 - pi) / (2.0 - pi)
            logw[c] = x * math.log(2.0 - pi)
        _resample(logw, n_cand, p, res_u[e], sel)
        for i in range(p):
            v = cand[sel[i]]
            shat_new[e, 0, i] = v
            shat_new[e, 1, i] = 1.0 - v
    return 0


def _draw_balanced(uj, pos, nslots, r):
    """Sequentially place exactly r ones among nslots slots; returns bits.

    Reads uj[pos:pos+nslots] without advancing; the caller moves ``pos``
    once per candidate so the J-draw and member-index arrays stay parallel.
    """
    bits = []
    k_rem = r
    n_rem = nslots
    for t in range(nslots):
        if uj[pos + t] * n_rem < k_rem:
            bits.append(1)
            k_rem -= 1
        else:
            bits.append(0)
        n_rem -= 1
    return bits


def popdyn_bp_sweep_b(p, n_cand, x, balanced, shat_pop, s_new,
                      others, off, deg_edge,
                      r0_cav, r1_cav, pfirst_cav,
                      uj, midx, ucnt, res_u):
    """Variable-to-clause phase: refresh every S population from Shat.

    In balanced mode both J-conditionals are built (their cavity negation
    counts differ); otherwise one population is built and mirrored.
    """
    n_edges = s_new.shape[0]
    n_tgt = 2 if balanced else 1
    cand = [0.0] * n_cand
    logw = [0.0] * n_cand
    sel = [0] * p
    pos = 0
    cpos = 0
    for e in range(n_edges):
        d1 = deg_edge[e] - 1
        lo = off[e]
        for tgt in range(n_tgt):
            for c in range(n_cand):
                if balanced:
                    d = d1 + 1
                    rr0 = r0_cav[d * 2 + tgt]
                    rr1 = r1_cav[d * 2 + tgt]
                    if rr1 >= 0 and ucnt[cpos] >= pfirst_cav[d * 2 + tgt]:
                        r = rr1
                    else:
                        r = rr0
                    cpos += 1
                    bits = _draw_balanced(uj, pos, d1, r)
                a0 = 1.0
                a1 = 1.0
                for b in range(d1):
                    eb = others[lo + b]
                    if balanced:
                        jb = bits[b]
                    else:
                        jb = 0 if uj[pos + b] < 0.5 else 1
                    h = shat_pop[eb, jb, midx[pos + b]]
                    a0 *= h
                    a1 *= 1.0 - h
                pos += d1
                z = a0 + a1
                if z <= 0.0:
                    cand[c] = 0.5
                    logw[c] = float("-inf")
                else:
                    cand[c] = a0 / z
                    logw[c] = x * math.log(z)
            _resample(logw, n_cand, p, res_u[e * n_tgt + tgt], sel)
            for i in range(p):
                s_new[e, tgt, i] = cand[sel[i]]
        if not balanced:
            for i in range(p):
                s_new[e, 1, i] = s_new[e, 0, i]
    return 0


def _log_mean_exp_stats(vals, xw):
    """(log mean exp(xw_i), tilted mean of vals, ESS fraction)."""
    ns = len(vals)
    wmax = max(xw)
    if wmax == float("-inf"):
        return float("-inf"), 0.0, 0.0
    sw = 0.0
    sw2 = 0.0
    sv = 0.0
    for i in range(ns):
        w = math.exp(xw[i] - wmax)
        sw += w
        sw2 += w * w
        sv += w * vals[i]
    lme = wmax + math.log(sw / ns)
    return lme, sv / sw, (sw * sw / sw2) / ns


def popdyn_bp_measure(k, p, ns, x, balanced, s_pop, shat_pop,
                      clause_vars, var_ptr, var_eids,
                      t0_full, t1_full, pfirst_full, logb_full,
                      uj_a, midx_a, uj_i, midx_i, ucnt_i,
                      uj_e, midx_e1, midx_e2):
    """One Monte-Carlo estimate of the tilted free entropy and its conjugate.

    Returns (F_a, F_i, F_ia, tilted S_a, S_i, S_ai sums, min mean ESS).
    """
    kk = int(k)
    n_edges = s_pop.shape[0]
    m = n_edges // kk
    n_vars = len(var_ptr) - 1
    vals = [0.0] * ns
    xw = [0.0] * ns

    fa = 0.0
    ta = 0.0
    ess_a = 0.0
    pos = 0
    for a in range(m):
        base = a * kk
        for c in range(ns):
            pi = 1.0
            for s in range(kk):
                jb = 0 if uj_a[pos] < 0.5 else 1
                mm = s_pop[base + s, jb, midx_a[pos]]
                pos += 1
                pi *= mm if jb == 0 else 1.0 - mm
            v = math.log(max(1.0 - pi, _TINY))
            vals[c] = v
            xw[c] = x * v
        lme, tm, ess = _log_mean_exp_stats(vals, xw)
        fa += lme
        ta += tm
        ess_a += ess

    fi = 0.0
    ti = 0.0
    ess_i = 0.0
    pos = 0
    cpos = 0
    for i in range(n_vars):
        d = int(var_ptr[i + 1]) - int(var_ptr[i])
        lo = int(var_ptr[i])
        for c in range(ns):
            if balanced and d > 0:
                tt0 = t0_full[d]
                tt1 = t1_full[d]
                if tt1 >= 0 and ucnt_i[cpos] >= pfirst_full[d]:
                    t_ones = tt1
                else:
                    t_ones = tt0
                cpos += 1
                bits = _draw_balanced(uj_i, pos, d, t_ones)
            a0 = 1.0
            a1 = 1.0
            for b in range(d):
                eb = int(var_eids[lo + b])
                if balanced:
                    jb = bits[b]
                else:
                    jb = 0 if uj_i[pos + b] < 0.5 else 1
                h = shat_pop[eb, jb, midx_i[pos + b]]
                a0 *= h
                a1 *= 1.0 - h
            pos += d
            v = math.log(max(a0 + a1, _TINY))
            vals[c] = v
            xw[c] = x * v
        lme, tm, ess = _log_mean_exp_stats(vals, xw)
        fi += lme + (logb_full[d] - d * math.log(2.0) if balanced else 0.0)
        ti += tm
        ess_i += ess

    fe = 0.0
    te = 0.0
    ess_e = 0.0
    pos = 0
    log_half = math.log(0.5)
    for e in range(n_edges):
        for c in range(ns):
            jb = 0 if uj_e[pos] < 0.5 else 1
            mm = s_pop[e, jb, midx_e1[pos]]
            hh = shat_pop[e, jb, midx_e2[pos]]
            pos += 1
            v = math.log(max(mm * hh + (1.0 - mm) * (1.0 - hh), _TINY))
            vals[c] = v
            xw[c] = x * v
        lme, tm, ess = _log_mean_exp_stats(vals, xw)
        fe += lme + log_half
        te += tm
        ess_e += ess

    min_ess = min(ess_a / max(m, 1), ess_i / max(n_vars, 1),
                  ess_e / max(n_edges, 1))
    return fa, fi, fe, ta, ti, te, min_ess


# ---------------------------------------------------------------------------
# per-edge population dynamics, SP base
#
# S2[e, J, p, 0:2] holds (q_satisfy, q_unsatisfy); q_star is the remainder.
# Shat[e, J, p] holds the clause survey qhat (identical for both J).
# ---------------------------------------------------------------------------

def popdyn_sp_sweep_a(k, p, n_cand, x, s2_pop, shat_new, uj, midx, res_u):
    """Clause phase for the survey base; the clause reweighting factor is 1."""
    kk = int(k)
    n_edges = s2_pop.shape[0]
    cand = [0.0] * n_cand
    logw = [0.0] * n_cand
    sel = [0] * p
    pos = 0
    for e in range(n_edges):
        a = e // kk
        base = a * kk
        for c in range(n_cand):
            prod = 1.0
            for t in range(kk):
                et = base + t
                if et == e:
                    continue
                jb = 0 if uj[pos] < 0.5 else 1
                prod *= s2_pop[et, jb, midx[pos], 1]
                pos += 1
            cand[c] = prod
            logw[c] = 0.0
        _resample(logw, n_cand, p, res_u[e], sel)
        for i in range(p):
            v = cand[sel[i]]
            shat_new[e, 0, i] = v
            shat_new[e, 1, i] = v
    return 0


def popdyn_sp_sweep_b(p, n_cand, x, balanced, shat_pop, s2_new,
                      others, off, deg_edge,
                      r0_cav, r1_cav, pfirst_cav,
                      uj, midx, ucnt, res_u):
    """Variable phase for the survey base.

    The partition into same-sign/opposite-sign neighbours is decided by the
    drawn negation bit against the target J.
    """
    n_edges = s2_new.shape[0]
    n_tgt = 2 if balanced else 1
    cand_s = [0.0] * n_cand
    cand_u = [0.0] * n_cand
    logw = [0.0] * n_cand
    sel = [0] * p
    pos = 0
    cpos = 0
    for e in range(n_edges):
        d1 = deg_edge[e] - 1
        lo = off[e]
        for tgt in range(n_tgt):
            for c in range(n_cand):
                if balanced:
                    d = d1 + 1
                    rr0 = r0_cav[d * 2 + tgt]
                    rr1 = r1_cav[d * 2 + tgt]
                    if rr1 >= 0 and ucnt[cpos] >= pfirst_cav[d * 2 + tgt]:
                        r = rr1
                    else:
                        r = rr0
                    cpos += 1
                    bits = _draw_balanced(uj, pos, d1, r)
                p_same = 1.0
                p_opp = 1.0
                for b in range(d1):
                    eb = others[lo + b]
                    if balanced:
                        jb = bits[b]
                    else:
                        jb = 0 if uj[pos + b] < 0.5 else 1
                    f = 1.0 - shat_pop[eb, jb, midx[pos + b]]
                    if jb == tgt:
                        p_same *= f
                    else:
                        p_opp *= f
                pos += d1
                z = p_same + p_opp - p_same * p_opp
                if z <= 0.0:
                    cand_s[c] = 0.0
                    cand_u[c] = 0.0
                    logw[c] = float("-inf")
                else:
                    cand_s[c] = p_opp * (1.0 - p_same) / z
                    cand_u[c] = p_same * (1.0 - p_opp) / z
                    logw[c] = x * math.log(z)
            _resample(logw, n_cand, p, res_u[e * n_tgt + tgt], sel)
            for i in range(p):
                s2_new[e, tgt, i, 0] = cand_s[sel[i]]
                s2_new[e, tgt, i, 1] = cand_u[sel[i]]
        if not balanced:
            for i in range(p):
                s2_new[e, 1, i, 0] = s2_new[e, 0, i, 0]
                s2_new[e, 1, i, 1] = s2_new[e, 0, i, 1]
    return 0


def popdyn_sp_measure(k, p, ns, x, balanced, s2_pop, shat_pop,
                      clause_vars, var_ptr, var_eids,
                      t0_full, t1_full, pfirst_full, logb_full,
                      uj_a, midx_a, uj_i, midx_i, ucnt_i,
                      uj_e, midx_e1, midx_e2):
    """Survey-base analogue of :func:`popdyn_bp_measure`."""
    kk = int(k)
    n_edges = s2_pop.shape[0]
    m = n_edges // kk
    n_vars = len(var_ptr) - 1
    vals = [0.0] * ns
    xw = [0.0] * ns

    fa = 0.0
    ta = 0.0
    ess_a = 0.0
    pos = 0
    for a in range(m):
        base = a * kk
        for c in range(ns):
            prod = 1.0
            for s in range(kk):
                jb = 0 if uj_a[pos] < 0.5 else 1
                prod *= s2_pop[base + s, jb, midx_a[pos], 1]
                pos += 1
            v = math.log(max(1.0 - prod, _TINY))
            vals[c] = v
            xw[c] = x * v
        lme, tm, ess = _log_mean_exp_stats(vals, xw)
        fa += lme
        ta += tm
        ess_a += ess

    fi = 0.0
    ti = 0.0
    ess_i = 0.0
    pos = 0
    cpos = 0
    for i in range(n_vars):
        d = int(var_ptr[i + 1]) - int(var_ptr[i])
        lo = int(var_ptr[i])
        for c in range(ns):
            if balanced and d > 0:
                tt0 = t0_full[d]
                tt1 = t1_full[d]
                if tt1 >= 0 and ucnt_i[cpos] >= pfirst_full[d]:
                    t_ones = tt1
                else:
                    t_ones = tt0
                cpos += 1
                bits = _draw_balanced(uj_i, pos, d, t_ones)
            p0 = 1.0
            p1 = 1.0
            for b in range(d):
                eb = int(var_eids[lo + b])
                if balanced:
                    jb = bits[b]
                else:
                    jb = 0 if uj_i[pos + b] < 0.5 else 1
                f = 1.0 - shat_pop[eb, jb, midx_i[pos + b]]
                if jb == 0:
                    p0 *= f
                else:
                    p1 *= f
            pos += d
            v = math.log(max(p0 + p1 - p0 * p1, _TINY))
            vals[c] = v
            xw[c] = x * v
        lme, tm, ess = _log_mean_exp_stats(vals, xw)
        fi += lme + (logb_full[d] - d * math.log(2.0) if balanced else 0.0)
        ti += tm
        ess_i += ess

    fe = 0.0
    te = 0.0
    ess_e = 0.0
    pos = 0
    log_half = math.log(0.5)
    for e in range(n_edges):
        for c in range(ns):
            jb = 0 if uj_e[pos] < 0.5 else 1
            qu = s2_pop[e, jb, midx_e1[pos], 1]
            qh = shat_pop[e, jb, midx_e2[pos]]
            pos += 1
            v = math.log(max(1.0 - qu * qh, _TINY))
            vals[c] = v
            xw[c] = x * v
        lme, tm, ess = _log_mean_exp_stats(vals, xw)
        fe += lme + log_half
        te += tm
        ess_e += ess

    min_ess = min(ess_a / max(m, 1), ess_i / max(n_vars, 1),
                  ess_e / max(n_edges, 1))
    return fa, fi, fe, ta, ti, te, min_ess
