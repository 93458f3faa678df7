"""Exact model counting and empirical entropy histograms.

Counts are exact arbitrary-precision integers; entropies are
``log(count)/n``.  The counter is a DPLL search with unit propagation and
connected-component factorization, fast enough for the small instances the
adversary experiments need (n up to ~80 with decomposition).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import formula
from ._kernels import impl as _impl
from ._kernels import get_impl

__all__ = [
    "ModelCount",
    "CountBudgetExceeded",
    "count_models",
    "brute_force_count",
    "LdfHistogram",
    "empirical_ldf",
    "crossover_size",
]

DEFAULT_MAX_NODES = 50_000_000
BRUTE_FORCE_LIMIT = 25


@dataclass
class ModelCount:
    """Exact count of satisfying assignments and its entropy density."""

    count: int
    n_vars: int
    nodes: int = 0

    @property
    def entropy(self):
        """log(count)/n; undefined (None) for an unsatisfiable formula."""
        if self.count == 0:
            return None
        # big ints overflow float conversion past ~2**1024; go via log2
        return _log_bigint(self.count) / self.n_vars


def _log_bigint(value):
    bits = value.bit_length()
    if bits <= 53:
        return math.log(value)
    top = value >> (bits - 53)
    return math.log(top) + (bits - 53) * math.log(2.0)


class CountBudgetExceeded(RuntimeError):
    """Search node budget exhausted; carries the partial work done."""

    def __init__(self, nodes, budget):
        self.nodes = nodes
        self.budget = budget
        super().__init__(f"counting aborted after {nodes} nodes (budget {budget})")


def _occurrence_arrays(graph, negations):
    occ_cls = (graph.var_eids // graph.k).astype(np.int32)
    occ_j = negations.j[graph.var_eids].astype(np.int8)
    return occ_cls, occ_j


def count_models(graph, negations, max_nodes=DEFAULT_MAX_NODES, backend=None,
                 cache=None):
    """Exact model count by component-decomposed DPLL.

    ``cache`` memoizes component counts keyed by residual clause structure;
    pass one dict across many counts of near-identical formulas (the
    annealing adversary does) to reuse unchanged components.
    """
    if graph.n_clauses == 0:
        return ModelCount(count=1 << graph.n_vars, n_vars=graph.n_vars)
    kern = get_impl(backend) if backend else _impl
    occ_cls, occ_j = _occurrence_arrays(graph, negations)
    count, nodes, done = kern.count_kernel(
        graph.n_vars, graph.k, graph.clause_vars, negations.j,
        graph.var_ptr, occ_cls, occ_j, max_nodes, cache)
    if not done:
        raise CountBudgetExceeded(nodes, max_nodes)
    return ModelCount(count=count, n_vars=graph.n_vars, nodes=nodes)


def brute_force_count(graph, negations):
    """Reference count by full enumeration of all 2^n assignments.

    Independent of the DPLL path: every clause is a (mask, pattern) pair and
    an assignment is a model iff no clause matches its pattern exactly.
    """
    n = graph.n_vars
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_LIMIT}")
    masks = []
    pats = []
    k = graph.k
    for a in range(graph.n_clauses):
        mask = 0
        pat = 0
        for s in range(k):
            e = a * k + s
            v = int(graph.clause_vars[e])
            mask |= 1 << v
            if negations.j[e]:
                pat |= 1 << v
        masks.append(mask)
        pats.append(pat)
    total = 0
    chunk = 1 << 16
    xs = np.arange(chunk, dtype=np.uint64)
    for start in range(0, 1 << n, chunk):
        block = xs[:min(chunk, (1 << n) - start)] + np.uint64(start)
        ok = np.ones(len(block), dtype=bool)
        for mask, pat in zip(masks, pats):
            ok &= (block & np.uint64(mask)) != np.uint64(pat)
        total += int(np.count_nonzero(ok))
    return ModelCount(count=total, n_vars=n)


@dataclass
class LdfHistogram:
    """Log-density of sampled negation-configurations over entropy bins.

    ``l_n[b] = (log count_b - log max_b count) / n``; the modal bin sits at
    zero by construction.
    """

    bin_width: float
    n_vars: int
    counts: dict = field(default_factory=dict)  # bin index -> samples
    n_samples: int = 0
    n_unsat: int = 0
    n_skipped: int = 0

    @property
    def l_n(self):
        if not self.counts:
            return {}
        cmax = max(self.counts.values())
        return {b: (math.log(c) - math.log(cmax)) / self.n_vars
                for b, c in sorted(self.counts.items())}

    def bin_center(self, b):
        return (b + 0.5) * self.bin_width

    @property
    def mode_entropy(self):
        if not self.counts:
            return None
        b = max(self.counts, key=lambda b: (self.counts[b], -b))
        return self.bin_center(b)

    def entropy_mean_var(self):
        """Mean and variance of the binned entropy samples."""
        tot = sum(self.counts.values())
        mean = sum(self.bin_center(b) * c for b, c in self.counts.items()) / tot
        var = sum((self.bin_center(b) - mean) ** 2 * c
                  for b, c in self.counts.items()) / tot
        return mean, var


def empirical_ldf(graph, n_samples, bin_width, seed, mode="random",
                  max_nodes=DEFAULT_MAX_NODES):
    """Sample negation-configurations, count each exactly, bin the entropies.

    ``mode`` selects the sampling law over configurations ('random' or
    'balanced').  Unsatisfiable samples and budget-exceeded samples are
    recorded separately, never silently dropped.  Identical seeds reproduce
    identical histograms.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    hist = LdfHistogram(bin_width=bin_width, n_vars=graph.n_vars)
    seeds = np.random.SeedSequence(seed).spawn(n_samples)
    for ss in seeds:
        neg = formula.assign_negations(graph, mode, ss)
        try:
            mc = count_models(graph, neg, max_nodes=max_nodes)
        except CountBudgetExceeded:
            hist.n_skipped += 1
            continue
        hist.n_samples += 1
        if mc.count == 0:
            hist.n_unsat += 1
            continue
        b = int(math.floor(mc.entropy / bin_width))
        hist.counts[b] = hist.counts.get(b, 0) + 1
    return hist


def crossover_size(l_prime, c1):
    """System size above which exponentially rare events dominate factorially
    many graph realizations: exp(l_prime / c1)."""
    if c1 <= 0:
        raise ValueError("c1 must be positive")
    return math.exp(l_prime / c1)
