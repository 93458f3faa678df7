# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: message-passing sweeps, DPLL counting, population dynamics.

Mirrors ``pyref`` function for function; both consume the same pre-generated
random arrays with the same semantics, so the two backends agree up to float
rounding.
"""
import numpy as np

cimport cython
from libc.math cimport log, exp, fabs, INFINITY

BACKEND_NAME = "cython"

cdef double _TINY = 1e-300


# ---------------------------------------------------------------------------
# belief propagation
# ---------------------------------------------------------------------------

def bp_sweep(int k, const int[::1] clause_vars, const int[::1] var_ptr, const int[::1] var_eids,
             const signed char[::1] j, double[::1] nuhat0, const int[::1] order,
             double damping):
    cdef int m = order.shape[0]
    cdef int oi, a, base, s, v, t, e, tt
    cdef double p0, p1, z, pi, good, cand, new, delta
    cdef double max_delta = 0.0
    cdef double[8] nu_bad_buf
    cdef double* nu_bad
    nu_bad_arr = np.empty(k, dtype=np.float64) if k > 8 else None
    cdef double[::1] nu_bad_mv
    if k > 8:
        nu_bad_mv = nu_bad_arr
        nu_bad = &nu_bad_mv[0]
    else:
        nu_bad = &nu_bad_buf[0]
    for oi in range(m):
        a = order[oi]
        base = a * k
        for s in range(k):
            v = clause_vars[base + s]
            p0 = 1.0
            p1 = 1.0
            for t in range(var_ptr[v], var_ptr[v + 1]):
                e = var_eids[t]
                if e / k == a:
                    continue
                p0 *= nuhat0[e]
                p1 *= 1.0 - nuhat0[e]
            z = p0 + p1
            if z <= 0.0:
                return max_delta, 1
            nu_bad[s] = (p0 / z) if j[base + s] == 0 else (p1 / z)
        for s in range(k):
            pi = 1.0
            for tt in range(k):
                if tt != s:
                    pi *= nu_bad[tt]
            e = base + s
            good = 1.0 / (2.0 - pi)
            cand = (1.0 - pi) * good if j[e] == 0 else good
            new = (1.0 - damping) * cand + damping * nuhat0[e]
            delta = fabs(new - nuhat0[e])
            if delta > max_delta:
                max_delta = delta
            nuhat0[e] = new
    return max_delta, 0


def bp_entropy_terms(int k, const int[::1] clause_vars, const int[::1] var_ptr,
                     const int[::1] var_eids, const signed char[::1] j,
                     double[::1] nuhat0):
    cdef int n_vars = var_ptr.shape[0] - 1
    cdef int m = clause_vars.shape[0] / k if k else 0
    cdef int v, t, e, a, base, s
    cdef double p0, p1, z, nu0, pi_full, olap
    cdef double sum_i = 0.0, sum_a = 0.0, sum_ai = 0.0
    for v in range(n_vars):
        p0 = 1.0
        p1 = 1.0
        for t in range(var_ptr[v], var_ptr[v + 1]):
            e = var_eids[t]
            p0 *= nuhat0[e]
            p1 *= 1.0 - nuhat0[e]
        z = p0 + p1
        if z <= 0.0:
            return 0.0, 0.0, 0.0, 0
        sum_i += log(z)
    for a in range(m):
        base = a * k
        pi_full = 1.0
        for s in range(k):
            v = clause_vars[base + s]
            p0 = 1.0
            p1 = 1.0
            for t in range(var_ptr[v], var_ptr[v + 1]):
                e = var_eids[t]
                if e / k == a:
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
            sum_ai += log(olap)
        if pi_full >= 1.0:
            return 0.0, 0.0, 0.0, 0
        sum_a += log(1.0 - pi_full)
    return sum_a, sum_i, sum_ai, 1


# ---------------------------------------------------------------------------
# survey propagation
# ---------------------------------------------------------------------------

def sp_sweep(int k, const int[::1] clause_vars, const int[::1] var_ptr, const int[::1] var_eids,
             const signed char[::1] j, double[::1] qhat, const int[::1] order,
             double damping):
    cdef int m = order.shape[0]
    cdef int oi, a, base, s, v, t, e, tt
    cdef signed char js
    cdef double p_same, p_opp, z, f, cand, new, delta
    cdef double max_delta = 0.0
    cdef double[8] qu_buf
    cdef double* qu
    qu_arr = np.empty(k, dtype=np.float64) if k > 8 else None
    cdef double[::1] qu_mv
    if k > 8:
        qu_mv = qu_arr
        qu = &qu_mv[0]
    else:
        qu = &qu_buf[0]
    for oi in range(m):
        a = order[oi]
        base = a * k
        for s in range(k):
            v = clause_vars[base + s]
            js = j[base + s]
            p_same = 1.0
            p_opp = 1.0
            for t in range(var_ptr[v], var_ptr[v + 1]):
                e = var_eids[t]
                if e / k == a:
                    continue
                f = 1.0 - qhat[e]
                if j[e] == js:
                    p_same *= f
                else:
                    p_opp *= f
            z = p_same + p_opp - p_same * p_opp
            if z <= 0.0:
                return max_delta, 1
            qu[s] = p_same * (1.0 - p_opp) / z
        for s in range(k):
            cand = 1.0
            for tt in range(k):
                if tt != s:
                    cand *= qu[tt]
            e = base + s
            new = (1.0 - damping) * cand + damping * qhat[e]
            delta = fabs(new - qhat[e])
            if delta > max_delta:
                max_delta = delta
            qhat[e] = new
    return max_delta, 0


def sp_complexity_terms(int k, const int[::1] clause_vars, const int[::1] var_ptr,
                        const int[::1] var_eids, const signed char[::1] j,
                        double[::1] qhat):
    cdef int n_vars = var_ptr.shape[0] - 1
    cdef int m = clause_vars.shape[0] / k if k else 0
    cdef int v, t, e, a, base, s
    cdef signed char js
    cdef double p0, p1, z, f, p_same, p_opp, qu, pi_full, olap
    cdef double sum_i = 0.0, sum_a = 0.0, sum_ai = 0.0
    for v in range(n_vars):
        p0 = 1.0
        p1 = 1.0
        for t in range(var_ptr[v], var_ptr[v + 1]):
            e = var_eids[t]
            f = 1.0 - qhat[e]
            if j[e] == 0:
                p0 *= f
            else:
                p1 *= f
        z = p0 + p1 - p0 * p1
        if z <= 0.0:
            return 0.0, 0.0, 0.0, 0
        sum_i += log(z)
    for a in range(m):
        base = a * k
        pi_full = 1.0
        for s in range(k):
            v = clause_vars[base + s]
            js = j[base + s]
            p_same = 1.0
            p_opp = 1.0
            for t in range(var_ptr[v], var_ptr[v + 1]):
                e = var_eids[t]
                if e / k == a:
                    continue
                f = 1.0 - qhat[e]
                if j[e] == js:
                    p_same *= f
                else:
                    p_opp *= f
            z = p_same + p_opp - p_same * p_opp
            if z <= 0.0:
                return 0.0, 0.0, 0.0, 0
            qu = p_same * (1.0 - p_opp) / z
            e = base + s
            pi_full *= qu
            olap = 1.0 - qu * qhat[e]
            if olap <= 0.0:
                return 0.0, 0.0, 0.0, 0
            sum_ai += log(olap)
        if pi_full >= 1.0:
            return 0.0, 0.0, 0.0, 0
        sum_a += log(1.0 - pi_full)
    return sum_a, sum_i, sum_ai, 1


# ---------------------------------------------------------------------------
# exact model counting
# ---------------------------------------------------------------------------

class _Budget(Exception):
    pass


from libc.stdlib cimport qsort
from libc.string cimport memset
from cpython.bytes cimport PyBytes_FromStringAndSize

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    ctypedef long long int128_t "__int128"

DEF IE_MAX_CLAUSES = 10  # components this small use inclusion-exclusion


cdef int _cmp_u64(const void* a, const void* b) noexcept nogil:
    cdef unsigned long long x = (<const unsigned long long*>a)[0]
    cdef unsigned long long y = (<const unsigned long long*>b)[0]
    if x < y:
        return -1
    if x > y:
        return 1
    return 0


cdef class _Counter:
    cdef int n, k, m
    cdef long long max_nodes, nodes
    cdef bint use_cache
    cdef bint use_ie
    cdef dict cache
    cdef const int[::1] clause_vars
    cdef const signed char[::1] clause_j
    cdef const int[::1] occ_ptr
    cdef const int[::1] occ_cls
    cdef const signed char[::1] occ_j
    cdef signed char[::1] assign
    cdef int[::1] sat_cnt
    cdef int[::1] nfree
    cdef int[::1] trail
    cdef int trail_len
    cdef int[:, ::1] grp_cls      # per-depth clause storage
    cdef int[:, ::1] grp_ptr      # per-depth group boundaries
    cdef int[:, ::1] grp_nvar     # per-depth per-group unassigned var counts
    cdef int[:, ::1] bfs_stack
    cdef int[::1] cl_stamp
    cdef int[::1] var_stamp
    cdef int[::1] var_cnt
    cdef int[::1] units
    cdef int units_len
    cdef unsigned long long[::1] key_buf
    cdef int stamp

    def __init__(self, int n, int k, clause_vars, clause_j, occ_ptr, occ_cls,
                 occ_j, long long max_nodes, cache):
        cdef int m = clause_vars.shape[0] // k if k else 0
        self.cache = cache
        # packed keys need one byte per literal, 0xFF reserved as padding
        self.use_cache = n <= 126 and k <= 8
        self.use_ie = n <= 120
        self.n = n
        self.k = k
        self.m = m
        self.max_nodes = max_nodes
        self.nodes = 0
        self.clause_vars = clause_vars
        self.clause_j = clause_j
        self.occ_ptr = occ_ptr
        self.occ_cls = occ_cls
        self.occ_j = occ_j
        self.assign = np.full(n, -1, dtype=np.int8)
        self.sat_cnt = np.zeros(m, dtype=np.int32)
        self.nfree = np.full(m, k, dtype=np.int32)
        self.trail = np.empty(n, dtype=np.int32)
        self.trail_len = 0
        cdef int levels = n + 3
        self.grp_cls = np.empty((levels, max(m, 1)), dtype=np.int32)
        self.grp_ptr = np.empty((levels, m + 2), dtype=np.int32)
        self.grp_nvar = np.empty((levels, m + 1), dtype=np.int32)
        self.bfs_stack = np.empty((levels, max(m, 1)), dtype=np.int32)
        self.cl_stamp = np.zeros(m, dtype=np.int32)
        self.var_stamp = np.zeros(n, dtype=np.int32)
        self.var_cnt = np.zeros(n, dtype=np.int32)
        self.units = np.empty(m * k + n * k + 8, dtype=np.int32)
        self.units_len = 0
        self.key_buf = np.empty(max(m, 1), dtype=np.uint64)
        self.stamp = 0

    cdef void set_var(self, int v, int val):
        cdef int t, c
        self.assign[v] = val
        self.trail[self.trail_len] = v
        self.trail_len += 1
        for t in range(self.occ_ptr[v], self.occ_ptr[v + 1]):
            c = self.occ_cls[t]
            self.nfree[c] -= 1
            if val != self.occ_j[t]:
                self.sat_cnt[c] += 1
            elif self.sat_cnt[c] == 0 and self.nfree[c] <= 1:
                self.units[self.units_len] = c
                self.units_len += 1

    cdef void undo_to(self, int mark):
        cdef int v, val, t, c
        while self.trail_len > mark:
            self.trail_len -= 1
            v = self.trail[self.trail_len]
            val = self.assign[v]
            self.assign[v] = -1
            for t in range(self.occ_ptr[v], self.occ_ptr[v + 1]):
                c = self.occ_cls[t]
                self.nfree[c] += 1
                if val != self.occ_j[t]:
                    self.sat_cnt[c] -= 1

    cdef int propagate(self, int depth, int begin, int length):
        """Queue-driven unit propagation within a clause slice; 1 on conflict."""
        cdef int i, c, base, s, v
        self.units_len = 0
        for i in range(length):
            c = self.grp_cls[depth, begin + i]
            if self.sat_cnt[c] == 0 and self.nfree[c] <= 1:
                self.units[self.units_len] = c
                self.units_len += 1
        while self.units_len > 0:
            self.units_len -= 1
            c = self.units[self.units_len]
            if self.sat_cnt[c] != 0:
                continue
            if self.nfree[c] == 0:
                return 1
            if self.nfree[c] != 1:
                continue
            base = c * self.k
            for s in range(self.k):
                v = self.clause_vars[base + s]
                if self.assign[v] == -1:
                    self.set_var(v, 1 - self.clause_j[base + s])
                    break
        return 0

    cdef object component_key(self, int child, int gb, int gl):
        """Sorted uint64 codes of the residual clauses, packed to bytes."""
        cdef int i, c, base, s, v, cnt, t
        cdef unsigned long long code
        cdef unsigned char lit
        cdef unsigned char[8] lits
        for i in range(gl):
            c = self.grp_cls[child, gb + i]
            base = c * self.k
            cnt = 0
            for s in range(self.k):
                v = self.clause_vars[base + s]
                if self.assign[v] == -1:
                    lits[cnt] = <unsigned char>((v << 1)
                                                | self.clause_j[base + s])
                    cnt += 1
            for s in range(1, cnt):
                lit = lits[s]
                t = s - 1
                while t >= 0 and lits[t] > lit:
                    lits[t + 1] = lits[t]
                    t -= 1
                lits[t + 1] = lit
            code = 0xFFFFFFFFFFFFFFFFULL
            for s in range(cnt):
                code &= ~((<unsigned long long>0xFF) << (8 * s))
                code |= (<unsigned long long>lits[s]) << (8 * s)
            self.key_buf[i] = code
        qsort(<void*>&self.key_buf[0] if gl else NULL, gl,
              sizeof(unsigned long long), _cmp_u64)
        return PyBytes_FromStringAndSize(<char*>&self.key_buf[0], gl * 8)

    cdef object inclusion_exclusion(self, int child, int gb, int gl, int nv):
        """Closed-form count of one small component over its nv variables.

        Subset DP: every subset extends (subset minus its lowest clause) by
        one clause, so consistency and mask merging are O(1) per subset.
        """
        cdef unsigned long long mlo[IE_MAX_CLAUSES]
        cdef unsigned long long mhi[IE_MAX_CLAUSES]
        cdef unsigned long long plo[IE_MAX_CLAUSES]
        cdef unsigned long long phi[IE_MAX_CLAUSES]
        cdef unsigned long long sm_lo[1 << IE_MAX_CLAUSES]
        cdef unsigned long long sm_hi[1 << IE_MAX_CLAUSES]
        cdef unsigned long long sp_lo[1 << IE_MAX_CLAUSES]
        cdef unsigned long long sp_hi[1 << IE_MAX_CLAUSES]
        cdef signed char alive[1 << IE_MAX_CLAUSES]
        cdef long long coeff[130]
        cdef int i, c, base, s, v, sub, rest, b
        cdef unsigned long long inter, m_lo, m_hi
        memset(coeff, 0, sizeof(coeff))
        for i in range(gl):
            c = self.grp_cls[child, gb + i]
            base = c * self.k
            mlo[i] = 0
            mhi[i] = 0
            plo[i] = 0
            phi[i] = 0
            for s in range(self.k):
                v = self.clause_vars[base + s]
                if self.assign[v] != -1:
                    continue
                if v < 64:
                    mlo[i] |= (<unsigned long long>1) << v
                    if self.clause_j[base + s]:
                        plo[i] |= (<unsigned long long>1) << v
                else:
                    mhi[i] |= (<unsigned long long>1) << (v - 64)
                    if self.clause_j[base + s]:
                        phi[i] |= (<unsigned long long>1) << (v - 64)
        sm_lo[0] = 0
        sm_hi[0] = 0
        sp_lo[0] = 0
        sp_hi[0] = 0
        alive[0] = 1
        coeff[0] = 1
        for sub in range(1, 1 << gl):
            rest = sub & (sub - 1)   # subset minus its lowest set bit
            if not alive[rest]:
                alive[sub] = 0
                continue
            i = __builtin_popcountll((sub & (-sub)) - 1)  # lowest bit index
            inter = sm_lo[rest] & mlo[i]
            if (sp_lo[rest] & inter) != (plo[i] & inter):
                alive[sub] = 0
                continue
            inter = sm_hi[rest] & mhi[i]
            if (sp_hi[rest] & inter) != (phi[i] & inter):
                alive[sub] = 0
                continue
            alive[sub] = 1
            m_lo = sm_lo[rest] | mlo[i]
            m_hi = sm_hi[rest] | mhi[i]
            sm_lo[sub] = m_lo
            sm_hi[sub] = m_hi
            sp_lo[sub] = sp_lo[rest] | plo[i]
            sp_hi[sub] = sp_hi[rest] | phi[i]
            b = __builtin_popcountll(m_lo) + __builtin_popcountll(m_hi)
            if __builtin_popcountll(<unsigned long long>sub) & 1:
                coeff[b] -= 1
            else:
                coeff[b] += 1
        # counts fit a signed 128-bit integer for n <= 120 (the use_ie
        # guard), so the assembly stays in C and converts to Python once
        cdef int128_t acc = 0
        cdef unsigned long long lo, hi
        for b in range(nv + 1):
            if coeff[b]:
                acc += (<int128_t>coeff[b]) << (nv - b)
        lo = <unsigned long long>acc
        hi = <unsigned long long>(acc >> 64)
        if hi == 0:
            return lo
        return ((<object>hi) << 64) | lo

    cdef object count(self, int depth, int begin, int length, int var_count):
        cdef int mark, i, c, cc, pos, n_groups, covered, g_covered
        cdef int top, base, s, v, t, c2, free, assigned_here
        cdef int child = depth + 1
        cdef int best_len, best_v, best_n, x, val, m2, nv, g, gb, gl, cnt
        cdef object total, sub, key
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise _Budget()
        mark = self.trail_len
        if self.propagate(depth, begin, length):
            self.undo_to(mark)
            return 0
        # group the still-active clauses into connected components
        self.stamp += 1
        pos = 0
        n_groups = 0
        covered = 0
        self.grp_ptr[child, 0] = 0
        for i in range(length):
            c = self.grp_cls[depth, begin + i]
            if self.sat_cnt[c] != 0 or self.cl_stamp[c] == self.stamp:
                continue
            g_covered = 0
            self.bfs_stack[child, 0] = c
            top = 1
            self.cl_stamp[c] = self.stamp
            while top > 0:
                top -= 1
                cc = self.bfs_stack[child, top]
                self.grp_cls[child, pos] = cc
                pos += 1
                base = cc * self.k
                for s in range(self.k):
                    v = self.clause_vars[base + s]
                    if self.assign[v] != -1 or self.var_stamp[v] == self.stamp:
                        continue
                    self.var_stamp[v] = self.stamp
                    g_covered += 1
                    for t in range(self.occ_ptr[v], self.occ_ptr[v + 1]):
                        c2 = self.occ_cls[t]
                        if self.sat_cnt[c2] == 0 and self.cl_stamp[c2] != self.stamp:
                            self.cl_stamp[c2] = self.stamp
                            self.bfs_stack[child, top] = c2
                            top += 1
            self.grp_ptr[child, n_groups + 1] = pos
            self.grp_nvar[child, n_groups] = g_covered
            covered += g_covered
            n_groups += 1
        assigned_here = self.trail_len - mark
        free = var_count - assigned_here - covered
        total = (<object>1) << free
        for g in range(n_groups):
            gb = self.grp_ptr[child, g]
            gl = self.grp_ptr[child, g + 1] - gb
            nv = self.grp_nvar[child, g]
            if self.use_ie and gl <= IE_MAX_CLAUSES:
                # nv is determined by the key (all component vars appear in
                # its clauses), so these memoize like branched components
                if self.use_cache and gl >= 4:
                    key = self.component_key(child, gb, gl)
                    sub = self.cache.get(key)
                    if sub is None:
                        sub = self.inclusion_exclusion(child, gb, gl, nv)
                        if len(self.cache) >= 500_000:
                            self.cache.clear()
                        self.cache[key] = sub
                    total = total * sub
                else:
                    total = total * self.inclusion_exclusion(child, gb, gl, nv)
                if total == 0:
                    break
                continue
            key = self.component_key(child, gb, gl) if self.use_cache else None
            sub = self.cache.get(key) if self.use_cache else None
            if sub is None:
                # branch on the most frequent variable among active clauses
                self.stamp += 1
                top = 0
                for i in range(gl):
                    c = self.grp_cls[child, gb + i]
                    base = c * self.k
                    for s in range(self.k):
                        v = self.clause_vars[base + s]
                        if self.assign[v] != -1:
                            continue
                        if self.var_stamp[v] != self.stamp:
                            self.var_stamp[v] = self.stamp
                            self.var_cnt[v] = 0
                            self.bfs_stack[child, top] = v
                            top += 1
                        self.var_cnt[v] += 1
                best_v = -1
                best_n = -1
                for i in range(top):
                    v = self.bfs_stack[child, i]
                    cnt = self.var_cnt[v]
                    if cnt > best_n or (cnt == best_n and v < best_v):
                        best_v = v
                        best_n = cnt
                x = best_v
                sub = 0
                for val in range(2):
                    m2 = self.trail_len
                    self.set_var(x, val)
                    sub = sub + self.count(child, gb, gl, nv - 1)
                    self.undo_to(m2)
                if self.use_cache:
                    if len(self.cache) >= 500_000:
                        self.cache.clear()
                    self.cache[key] = sub
            total = total * sub
            if total == 0:
                break
        self.undo_to(mark)
        return total


def count_kernel(int n_vars, int k, const int[::1] clause_vars,
                 const signed char[::1] clause_j, const int[::1] occ_ptr,
                 const int[::1] occ_cls, const signed char[::1] occ_j,
                 long long max_nodes, cache=None):
    cdef int m = clause_vars.shape[0] // k if k else 0
    if cache is None:
        cache = {}
    cdef _Counter ctr = _Counter(n_vars, k, clause_vars, clause_j,
                                 occ_ptr, occ_cls, occ_j, max_nodes, cache)
    cdef int i, outside
    cdef int in_formula = 0
    seen = np.zeros(n_vars, dtype=np.int8)
    cdef signed char[::1] seen_mv = seen
    for i in range(clause_vars.shape[0]):
        if not seen_mv[clause_vars[i]]:
            seen_mv[clause_vars[i]] = 1
            in_formula += 1
    outside = n_vars - in_formula
    for i in range(m):
        ctr.grp_cls[0, i] = i
    try:
        result = ctr.count(0, 0, m, in_formula) << outside
        return result, int(ctr.nodes), True
    except _Budget:
        return None, int(ctr.nodes), False


# ---------------------------------------------------------------------------
# population dynamics helpers
# ---------------------------------------------------------------------------

cdef int _resample(double[::1] logw, int n_cand, int p_out, double u,
                   int[::1] sel):
    cdef int i, jj
    cdef double wmax = -INFINITY
    cdef double wsum, cum, pos
    for i in range(n_cand):
        if logw[i] > wmax:
            wmax = logw[i]
    if wmax == -INFINITY:
        for i in range(p_out):
            sel[i] = i % n_cand
        return 0
    wsum = 0.0
    for i in range(n_cand):
        logw[i] = exp(logw[i] - wmax)
        wsum += logw[i]
    jj = 0
    cum = logw[0]
    for i in range(p_out):
        pos = (i + u) / p_out * wsum
        while cum <= pos and jj < n_cand - 1:
            jj += 1
            cum += logw[jj]
        sel[i] = jj
    return 1


cdef inline int _bal_count(double[::1] ucnt, long long cpos, int d, int tgt,
                           int[::1] r0_cav, int[::1] r1_cav,
                           double[::1] pfirst_cav):
    cdef int rr0 = r0_cav[d * 2 + tgt]
    cdef int rr1 = r1_cav[d * 2 + tgt]
    if rr1 >= 0 and ucnt[cpos] >= pfirst_cav[d * 2 + tgt]:
        return rr1
    return rr0


# ---------------------------------------------------------------------------
# population dynamics, BP base
# ---------------------------------------------------------------------------

def popdyn_bp_sweep_a(int k, int p, int n_cand, double x,
                      double[:, :, ::1] s_pop, double[:, :, ::1] shat_new,
                      double[::1] uj, int[::1] midx, double[::1] res_u):
    cdef int n_edges = s_pop.shape[0]
    cdef int e, a, base, c, t, et, jb, i
    cdef long long pos = 0
    cdef double pi, mm, v
    cand_arr = np.empty(n_cand, dtype=np.float64)
    logw_arr = np.empty(n_cand, dtype=np.float64)
    sel_arr = np.empty(p, dtype=np.int32)
    cdef double[::1] cand = cand_arr
    cdef double[::1] logw = logw_arr
    cdef int[::1] sel = sel_arr
    for e in range(n_edges):
        a = e / k
        base = a * k
        for c in range(n_cand):
            pi = 1.0
            for t in range(k):
                et = base + t
                if et == e:
                    continue
                jb = 0 if uj[pos] < 0.5 else 1
                mm = s_pop[et, jb, midx[pos]]
                pos += 1
                pi *= mm if jb == 0 else 1.0 - mm
            cand[c] = (1.0 - pi) / (2.0 - pi)
            logw[c] = x * log(2.0 - pi)
        _resample(logw, n_cand, p, res_u[e], sel)
        for i in range(p):
            v = cand[sel[i]]
            shat_new[e, 0, i] = v
            shat_new[e, 1, i] = 1.0 - v
    return 0


def popdyn_bp_sweep_b(int p, int n_cand, double x, int balanced,
                      double[:, :, ::1] shat_pop, double[:, :, ::1] s_new,
                      int[::1] others, long long[::1] off, int[::1] deg_edge,
                      int[::1] r0_cav, int[::1] r1_cav, double[::1] pfirst_cav,
                      double[::1] uj, int[::1] midx, double[::1] ucnt,
                      double[::1] res_u):
    cdef int n_edges = s_new.shape[0]
    cdef int n_tgt = 2 if balanced else 1
    cdef int e, d1, tgt, c, b, eb, jb, i, d, r, k_rem, n_rem
    cdef long long lo, pos = 0, cpos = 0
    cdef double a0, a1, z, h
    cand_arr = np.empty(n_cand, dtype=np.float64)
    logw_arr = np.empty(n_cand, dtype=np.float64)
    sel_arr = np.empty(p, dtype=np.int32)
    bits_arr = np.empty(64, dtype=np.int8)
    cdef double[::1] cand = cand_arr
    cdef double[::1] logw = logw_arr
    cdef int[::1] sel = sel_arr
    cdef signed char[::1] bits = bits_arr
    for e in range(n_edges):
        d1 = deg_edge[e] - 1
        if d1 + 1 > 64:
            raise ValueError("degree exceeds the balanced-draw buffer")
        lo = off[e]
        for tgt in range(n_tgt):
            for c in range(n_cand):
                if balanced:
                    d = d1 + 1
                    r = _bal_count(ucnt, cpos, d, tgt, r0_cav, r1_cav,
                                   pfirst_cav)
                    cpos += 1
                    k_rem = r
                    n_rem = d1
                    for b in range(d1):
                        if uj[pos + b] * n_rem < k_rem:
                            bits[b] = 1
                            k_rem -= 1
                        else:
                            bits[b] = 0
                        n_rem -= 1
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
                    logw[c] = -INFINITY
                else:
                    cand[c] = a0 / z
                    logw[c] = x * log(z)
            _resample(logw, n_cand, p, res_u[e * n_tgt + tgt], sel)
            for i in range(p):
                s_new[e, tgt, i] = cand[sel[i]]
        if not balanced:
            for i in range(p):
                s_new[e, 1, i] = s_new[e, 0, i]
    return 0


cdef void _lme_stats(double[::1] vals, double[::1] xw, int ns,
                     double* out) nogil:
    """out = (log mean exp, tilted mean, ess fraction)."""
    cdef int i
    cdef double wmax = -INFINITY
    cdef double w, sw = 0.0, sw2 = 0.0, sv = 0.0
    for i in range(ns):
        if xw[i] > wmax:
            wmax = xw[i]
    if wmax == -INFINITY:
        out[0] = -INFINITY
        out[1] = 0.0
        out[2] = 0.0
        return
    for i in range(ns):
        w = exp(xw[i] - wmax)
        sw += w
        sw2 += w * w
        sv += w * vals[i]
    out[0] = wmax + log(sw / ns)
    out[1] = sv / sw
    out[2] = (sw * sw / sw2) / ns


def popdyn_bp_measure(int k, int p, int ns, double x, int balanced,
                      double[:, :, ::1] s_pop, double[:, :, ::1] shat_pop,
                      const int[::1] clause_vars, const int[::1] var_ptr,
                      const int[::1] var_eids,
                      int[::1] t0_full, int[::1] t1_full,
                      double[::1] pfirst_full, double[::1] logb_full,
                      double[::1] uj_a, int[::1] midx_a,
                      double[::1] uj_i, int[::1] midx_i, double[::1] ucnt_i,
                      double[::1] uj_e, int[::1] midx_e1, int[::1] midx_e2):
    cdef int n_edges = s_pop.shape[0]
    cdef int m = n_edges / k
    cdef int n_vars = var_ptr.shape[0] - 1
    cdef int a, base, c, s, jb, i, d, b, eb, e, t_ones, k_rem, n_rem
    cdef long long pos, cpos, lo
    cdef double pi, mm, v, a0, a1, h, hh
    cdef double fa = 0.0, ta = 0.0, ess_a = 0.0
    cdef double fi = 0.0, ti = 0.0, ess_i = 0.0
    cdef double fe = 0.0, te = 0.0, ess_e = 0.0
    cdef double log_half = log(0.5)
    cdef double log2 = log(2.0)
    cdef double[3] st
    vals_arr = np.empty(ns, dtype=np.float64)
    xw_arr = np.empty(ns, dtype=np.float64)
    bits_arr = np.empty(64, dtype=np.int8)
    cdef double[::1] vals = vals_arr
    cdef double[::1] xw = xw_arr
    cdef signed char[::1] bits = bits_arr

    pos = 0
    for a in range(m):
        base = a * k
        for c in range(ns):
            pi = 1.0
            for s in range(k):
                jb = 0 if uj_a[pos] < 0.5 else 1
                mm = s_pop[base + s, jb, midx_a[pos]]
                pos += 1
                pi *= mm if jb == 0 else 1.0 - mm
            v = log(max(1.0 - pi, _TINY))
            vals[c] = v
            xw[c] = x * v
        _lme_stats(vals, xw, ns, st)
        fa += st[0]
        ta += st[1]
        ess_a += st[2]

    pos = 0
    cpos = 0
    for i in range(n_vars):
        d = var_ptr[i + 1] - var_ptr[i]
        if d > 64:
            raise ValueError("degree exceeds the balanced-draw buffer")
        lo = var_ptr[i]
        for c in range(ns):
            if balanced and d > 0:
                if t1_full[d] >= 0 and ucnt_i[cpos] >= pfirst_full[d]:
                    t_ones = t1_full[d]
                else:
                    t_ones = t0_full[d]
                cpos += 1
                k_rem = t_ones
                n_rem = d
                for b in range(d):
                    if uj_i[pos + b] * n_rem < k_rem:
                        bits[b] = 1
                        k_rem -= 1
                    else:
                        bits[b] = 0
                    n_rem -= 1
            a0 = 1.0
            a1 = 1.0
            for b in range(d):
                eb = var_eids[lo + b]
                if balanced:
                    jb = bits[b]
                else:
                    jb = 0 if uj_i[pos + b] < 0.5 else 1
                h = shat_pop[eb, jb, midx_i[pos + b]]
                a0 *= h
                a1 *= 1.0 - h
            pos += d
            v = log(max(a0 + a1, _TINY))
            vals[c] = v
            xw[c] = x * v
        _lme_stats(vals, xw, ns, st)
        fi += st[0] + ((logb_full[d] - d * log2) if balanced else 0.0)
        ti += st[1]
        ess_i += st[2]

    pos = 0
    for e in range(n_edges):
        for c in range(ns):
            jb = 0 if uj_e[pos] < 0.5 else 1
            mm = s_pop[e, jb, midx_e1[pos]]
            hh = shat_pop[e, jb, midx_e2[pos]]
            pos += 1
            v = log(max(mm * hh + (1.0 - mm) * (1.0 - hh), _TINY))
            vals[c] = v
            xw[c] = x * v
        _lme_stats(vals, xw, ns, st)
        fe += st[0] + log_half
        te += st[1]
        ess_e += st[2]

    cdef double min_ess = ess_a / max(m, 1)
    if ess_i / max(n_vars, 1) < min_ess:
        min_ess = ess_i / max(n_vars, 1)
    if ess_e / max(n_edges, 1) < min_ess:
        min_ess = ess_e / max(n_edges, 1)
    return fa, fi, fe, ta, ti, te, min_ess


# ---------------------------------------------------------------------------
# population dynamics, SP base
# ---------------------------------------------------------------------------

def popdyn_sp_sweep_a(int k, int p, int n_cand, double x,
                      double[:, :, :, ::1] s2_pop, double[:, :, ::1] shat_new,
                      double[::1] uj, int[::1] midx, double[::1] res_u):
    cdef int n_edges = s2_pop.shape[0]
    cdef int e, a, base, c, t, et, jb, i
    cdef long long pos = 0
    cdef double prod, v
    cand_arr = np.empty(n_cand, dtype=np.float64)
    logw_arr = np.empty(n_cand, dtype=np.float64)
    sel_arr = np.empty(p, dtype=np.int32)
    cdef double[::1] cand = cand_arr
    cdef double[::1] logw = logw_arr
    cdef int[::1] sel = sel_arr
    for e in range(n_edges):
        a = e / k
        base = a * k
        for c in range(n_cand):
            prod = 1.0
            for t in range(k):
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


def popdyn_sp_sweep_b(int p, int n_cand, double x, int balanced,
                      double[:, :, ::1] shat_pop, double[:, :, :, ::1] s2_new,
                      int[::1] others, long long[::1] off, int[::1] deg_edge,
                      int[::1] r0_cav, int[::1] r1_cav, double[::1] pfirst_cav,
                      double[::1] uj, int[::1] midx, double[::1] ucnt,
                      double[::1] res_u):
    cdef int n_edges = s2_new.shape[0]
    cdef int n_tgt = 2 if balanced else 1
    cdef int e, d1, tgt, c, b, eb, jb, i, d, r, k_rem, n_rem
    cdef long long lo, pos = 0, cpos = 0
    cdef double p_same, p_opp, z, f
    cand_s_arr = np.empty(n_cand, dtype=np.float64)
    cand_u_arr = np.empty(n_cand, dtype=np.float64)
    logw_arr = np.empty(n_cand, dtype=np.float64)
    sel_arr = np.empty(p, dtype=np.int32)
    bits_arr = np.empty(64, dtype=np.int8)
    cdef double[::1] cand_s = cand_s_arr
    cdef double[::1] cand_u = cand_u_arr
    cdef double[::1] logw = logw_arr
    cdef int[::1] sel = sel_arr
    cdef signed char[::1] bits = bits_arr
    for e in range(n_edges):
        d1 = deg_edge[e] - 1
        if d1 + 1 > 64:
            raise ValueError("degree exceeds the balanced-draw buffer")
        lo = off[e]
        for tgt in range(n_tgt):
            for c in range(n_cand):
                if balanced:
                    d = d1 + 1
                    r = _bal_count(ucnt, cpos, d, tgt, r0_cav, r1_cav,
                                   pfirst_cav)
                    cpos += 1
                    k_rem = r
                    n_rem = d1
                    for b in range(d1):
                        if uj[pos + b] * n_rem < k_rem:
                            bits[b] = 1
                            k_rem -= 1
                        else:
                            bits[b] = 0
                        n_rem -= 1
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
                    logw[c] = -INFINITY
                else:
                    cand_s[c] = p_opp * (1.0 - p_same) / z
                    cand_u[c] = p_same * (1.0 - p_opp) / z
                    logw[c] = x * log(z)
            _resample(logw, n_cand, p, res_u[e * n_tgt + tgt], sel)
            for i in range(p):
                s2_new[e, tgt, i, 0] = cand_s[sel[i]]
                s2_new[e, tgt, i, 1] = cand_u[sel[i]]
        if not balanced:
            for i in range(p):
                s2_new[e, 1, i, 0] = s2_new[e, 0, i, 0]
                s2_new[e, 1, i, 1] = s2_new[e, 0, i, 1]
    return 0


def popdyn_sp_measure(int k, int p, int ns, double x, int balanced,
                      double[:, :, :, ::1] s2_pop, double[:, :, ::1] shat_pop,
                      const int[::1] clause_vars, const int[::1] var_ptr,
                      const int[::1] var_eids,
                      int[::1] t0_full, int[::1] t1_full,
                      double[::1] pfirst_full, double[::1] logb_full,
                      double[::1] uj_a, int[::1] midx_a,
                      double[::1] uj_i, int[::1] midx_i, double[::1] ucnt_i,
                      double[::1] uj_e, int[::1] midx_e1, int[::1] midx_e2):
    cdef int n_edges = s2_pop.shape[0]
    cdef int m = n_edges / k
    cdef int n_vars = var_ptr.shape[0] - 1
    cdef int a, base, c, s, jb, i, d, b, eb, e, t_ones, k_rem, n_rem
    cdef long long pos, cpos, lo
    cdef double prod, v, p0, p1, f, qu, qh
    cdef double fa = 0.0, ta = 0.0, ess_a = 0.0
    cdef double fi = 0.0, ti = 0.0, ess_i = 0.0
    cdef double fe = 0.0, te = 0.0, ess_e = 0.0
    cdef double log_half = log(0.5)
    cdef double log2 = log(2.0)
    cdef double[3] st
    vals_arr = np.empty(ns, dtype=np.float64)
    xw_arr = np.empty(ns, dtype=np.float64)
    bits_arr = np.empty(64, dtype=np.int8)
    cdef double[::1] vals = vals_arr
    cdef double[::1] xw = xw_arr
    cdef signed char[::1] bits = bits_arr

    pos = 0
    for a in range(m):
        base = a * k
        for c in range(ns):
            prod = 1.0
            for s in range(k):
                jb = 0 if uj_a[pos] < 0.5 else 1
                prod *= s2_pop[base + s, jb, midx_a[pos], 1]
                pos += 1
            v = log(max(1.0 - prod, _TINY))
            vals[c] = v
            xw[c] = x * v
        _lme_stats(vals, xw, ns, st)
        fa += st[0]
        ta += st[1]
        ess_a += st[2]

    pos = 0
    cpos = 0
    for i in range(n_vars):
        d = var_ptr[i + 1] - var_ptr[i]
        if d > 64:
            raise ValueError("degree exceeds the balanced-draw buffer")
        lo = var_ptr[i]
        for c in range(ns):
            if balanced and d > 0:
                if t1_full[d] >= 0 and ucnt_i[cpos] >= pfirst_full[d]:
                    t_ones = t1_full[d]
                else:
                    t_ones = t0_full[d]
                cpos += 1
                k_rem = t_ones
                n_rem = d
                for b in range(d):
                    if uj_i[pos + b] * n_rem < k_rem:
                        bits[b] = 1
                        k_rem -= 1
                    else:
                        bits[b] = 0
                    n_rem -= 1
            p0 = 1.0
            p1 = 1.0
            for b in range(d):
                eb = var_eids[lo + b]
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
            v = log(max(p0 + p1 - p0 * p1, _TINY))
            vals[c] = v
            xw[c] = x * v
        _lme_stats(vals, xw, ns, st)
        fi += st[0] + ((logb_full[d] - d * log2) if balanced else 0.0)
        ti += st[1]
        ess_i += st[2]

    pos = 0
    for e in range(n_edges):
        for c in range(ns):
            jb = 0 if uj_e[pos] < 0.5 else 1
            qu = s2_pop[e, jb, midx_e1[pos], 1]
            qh = shat_pop[e, jb, midx_e2[pos]]
            pos += 1
            v = log(max(1.0 - qu * qh, _TINY))
            vals[c] = v
            xw[c] = x * v
        _lme_stats(vals, xw, ns, st)
        fe += st[0] + log_half
        te += st[1]
        ess_e += st[2]

    cdef double min_ess = ess_a / max(m, 1)
    if ess_i / max(n_vars, 1) < min_ess:
        min_ess = ess_i / max(n_vars, 1)
    if ess_e / max(n_edges, 1) < min_ess:
        min_ess = ess_e / max(n_edges, 1)
    return fa, fi, fe, ta, ti, te, min_ess
