"""K-SAT factor graphs decorated with per-edge negation bits.

Conventions used everywhere in this package:

* A formula has ``n`` Boolean variables and ``m`` clauses of fixed width
  ``k``.  Clause ``a`` is wired to ``k`` distinct variables.
* The negation bit of the edge (variable ``i``, clause ``a``) is ``J = 1``
  when the literal is negated.  A clause is violated exactly when every one
  of its variables takes ``x_i == J``, so ``x_i == J`` is the "bad" value.
* Edge ids are dense integers ``a * k + slot`` assigned in generation
  order; all downstream per-edge state (messages, populations) is keyed by
  edge id.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FactorGraph",
    "Negations",
    "GenerationError",
    "DimacsParseError",
    "generate_regular",
    "generate_poisson",
    "assign_negations",
    "to_dimacs",
    "from_dimacs",
    "save_instance",
    "load_instance",
    "instance_to_dict",
    "instance_from_dict",
]

NEGATION_MODES = ("random", "balanced", "polarized", "all_zero")


class GenerationError(RuntimeError):
    """Raised when the configuration model cannot resolve stub collisions."""


class DimacsParseError(ValueError):
    """Malformed DIMACS input; the message carries the offending line number."""

    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


@dataclass(eq=False)
class FactorGraph:
    """Bipartite variable/clause incidence in flat CSR-style arrays.

    ``clause_vars[a*k + s]`` is the variable sitting in slot ``s`` of clause
    ``a``; the edge id of that slot is ``a*k + s``.  ``var_eids`` lists the
    edge ids incident to each variable, delimited by ``var_ptr``.
    """

    n_vars: int
    n_clauses: int
    k: int
    clause_vars: np.ndarray  # int32, shape (m*k,)
    var_ptr: np.ndarray      # int32, shape (n+1,)
    var_eids: np.ndarray     # int32, shape (m*k,)

    @property
    def n_edges(self):
        return self.n_clauses * self.k

    @property
    def degrees(self):
        """Number of clauses each variable belongs to (with multiplicity)."""
        return np.diff(self.var_ptr)

    def vars_of(self, a):
        """Variables of clause ``a``, in slot order."""
        return self.clause_vars[a * self.k:(a + 1) * self.k]

    def edges_of_var(self, i):
        """Edge ids incident to variable ``i``."""
        return self.var_eids[self.var_ptr[i]:self.var_ptr[i + 1]]

    def clauses_of(self, i):
        """Clause ids incident to variable ``i``."""
        return self.edges_of_var(i) // self.k

    @classmethod
    def from_clauses(cls, n_vars, clauses):
        """Build a graph from an ``(m, k)`` array of variable ids."""
        clauses = np.asarray(clauses, dtype=np.int32)
        if clauses.ndim != 2:
            raise ValueError("clauses must be a 2-d array of variable ids")
        m, k = clauses.shape
        flat = clauses.reshape(-1)
        if m and (flat.min() < 0 or flat.max() >= n_vars):
            raise ValueError("variable id out of range")
        order = np.argsort(flat, kind="stable").astype(np.int32)
        var_ptr = np.zeros(n_vars + 1, dtype=np.int32)
        np.cumsum(np.bincount(flat, minlength=n_vars), out=var_ptr[1:])
        g = cls(n_vars=n_vars, n_clauses=m, k=k,
                clause_vars=flat, var_ptr=var_ptr, var_eids=order)
        for arr in (g.clause_vars, g.var_ptr, g.var_eids):
            arr.flags.writeable = False
        return g

    def validate(self):
        """Check structural invariants; raises AssertionError on violation."""
        assert self.clause_vars.shape == (self.n_edges,)
        assert self.var_ptr.shape == (self.n_vars + 1,)
        assert self.var_eids.shape == (self.n_edges,)
        for a in range(self.n_clauses):
            vs = self.vars_of(a)
            assert len(set(vs.tolist())) == self.k, f"repeated variable in clause {a}"
        # the two adjacency views must describe the same edge set
        assert np.array_equal(np.sort(self.var_eids), np.arange(self.n_edges))
        for i in range(self.n_vars):
            for e in self.edges_of_var(i):
                assert self.clause_vars[e] == i


@dataclass(eq=False)
class Negations:
    """Per-edge negation bits, indexed by edge id."""

    j: np.ndarray  # int8, shape (n_edges,)

    def copy(self):
        return Negations(self.j.copy())

    def ones_per_var(self, graph):
        """For each variable, how many of its edges carry J = 1."""
        counts = np.zeros(graph.n_vars, dtype=np.int64)
        np.add.at(counts, graph.clause_vars, self.j)
        return counts

    def imbalance(self, graph):
        """Per-variable |#negated - #plain| over incident edges."""
        ones = self.ones_per_var(graph)
        return np.abs(2 * ones - graph.degrees)


def generate_regular(n_vars, degree, clause_size, seed,
                     max_repairs=10_000, max_restarts=50):
    """Sample an L-regular k-uniform formula from the configuration model.

    Each variable receives exactly ``degree`` stubs; stubs are shuffled and
    chunked into clauses.  Clauses with a repeated variable are repaired by
    swapping one of their stubs with a uniformly random stub elsewhere; after
    ``max_repairs`` failed swaps the whole matching is reshuffled.
    """
    n, L, k = int(n_vars), int(degree), int(clause_size)
    if k < 2:
        raise ValueError("clause size must be at least 2")
    if L < 1:
        raise ValueError("degree must be at least 1")
    if (n * L) % k != 0:
        raise ValueError(f"n*L = {n * L} is not divisible by k = {k}")
    if k > n:
        raise ValueError(f"cannot place {k} distinct variables among {n}")
    m = (n * L) // k
    rng = np.random.default_rng(seed)

    base = np.repeat(np.arange(n, dtype=np.int32), L)
    for _ in range(max_restarts):
        stubs = rng.permutation(base)
        bad = _colliding_clauses(stubs, m, k)
        repairs = 0
        while bad and repairs < max_repairs:
            a = next(iter(bad))
            s = int(rng.integers(k))
            t = int(rng.integers(m * k))
            stubs[a * k + s], stubs[t] = stubs[t], stubs[a * k + s]
            repairs += 1
            for c in (a, t // k):
                if _clause_has_collision(stubs, c, k):
                    bad.add(c)
                else:
                    bad.discard(c)
        if not bad:
            return FactorGraph.from_clauses(n, stubs.reshape(m, k))
    raise GenerationError(
        f"could not resolve stub collisions after {max_restarts} restarts "
        f"(n={n}, L={L}, k={k})")


def _clause_has_collision(stubs, a, k):
    return len(set(stubs[a * k:(a + 1) * k].tolist())) < k


def _colliding_clauses(stubs, m, k):
    return {a for a in range(m) if _clause_has_collision(stubs, a, k)}


def generate_poisson(n_vars, alpha, clause_size, seed):
    """Sample ``round(alpha*n)`` clauses, each on k distinct uniform variables.

    Repeated clauses across the formula are allowed; repetition inside a
    clause is not.
    """
    n, k = int(n_vars), int(clause_size)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if k > n:
        raise ValueError(f"cannot place {k} distinct variables among {n}")
    m = int(round(alpha * n))
    rng = np.random.default_rng(seed)
    clauses = np.empty((m, k), dtype=np.int32)
    for a in range(m):
        clauses[a] = rng.choice(n, size=k, replace=False)
    return FactorGraph.from_clauses(n, clauses)


def assign_negations(graph, mode, seed):
    """Draw a negation-configuration for ``graph``.

    Modes: ``random`` (i.i.d. fair bits per edge), ``balanced`` (each
    variable negated in half its clauses, odd surplus side by fair coin),
    ``polarized`` (per variable, all edges share one fair coin),
    ``all_zero``.
    """
    if mode not in NEGATION_MODES:
        raise ValueError(f"unknown negation mode {mode!r}")
    rng = np.random.default_rng(seed)
    j = np.zeros(graph.n_edges, dtype=np.int8)
    if mode == "random":
        j[:] = rng.integers(0, 2, size=graph.n_edges, dtype=np.int8)
    elif mode == "balanced":
        for i in range(graph.n_vars):
            eids = graph.edges_of_var(i)
            d = len(eids)
            ones = d // 2 if d % 2 == 0 else (d // 2) + int(rng.integers(2))
            pick = rng.permutation(d)[:ones]
            j[eids[pick]] = 1
    elif mode == "polarized":
        coins = rng.integers(0, 2, size=graph.n_vars, dtype=np.int8)
        j[:] = coins[graph.clause_vars]
    return Negations(j)


def to_dimacs(graph, negations):
    """Serialize to DIMACS CNF.  J = 0 -> positive literal, J = 1 -> negated."""
    lines = [f"p cnf {graph.n_vars} {graph.n_clauses}"]
    k = graph.k
    j = negations.j
    for a in range(graph.n_clauses):
        lits = []
        for s in range(k):
            e = a * k + s
            v = int(graph.clause_vars[e]) + 1
            lits.append(str(-v if j[e] else v))
        lits.append("0")
        lines.append(" ".join(lits))
    return "\n".join(lines) + "\n"


def from_dimacs(text):
    """Parse DIMACS CNF text into ``(FactorGraph, Negations)``.

    Enforces the dialect written by :func:`to_dimacs`: a single header,
    fixed clause width, distinct variables inside each clause, clause count
    matching the header.
    """
    n_vars = n_clauses = None
    clauses, js = [], []
    current, current_j = [], []
    clause_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if n_vars is not None:
                raise DimacsParseError(lineno, "duplicate problem line")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsParseError(lineno, f"bad problem line {line!r}")
            try:
                n_vars, n_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsParseError(lineno, f"bad problem line {line!r}") from None
            continue
        if n_vars is None:
            raise DimacsParseError(lineno, "clause before problem line")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsParseError(lineno, f"bad literal {tok!r}") from None
            if lit == 0:
                if not current:
                    raise DimacsParseError(lineno, "empty clause")
                clauses.append(current)
                js.append(current_j)
                current, current_j = [], []
                clause_line = None
            else:
                v = abs(lit) - 1
                if v >= n_vars:
                    raise DimacsParseError(
                        lineno, f"literal {lit} out of range (n={n_vars})")
                if v in current:
                    raise DimacsParseError(lineno, f"repeated variable {abs(lit)}")
                if not current:
                    clause_line = lineno
                current.append(v)
                current_j.append(1 if lit < 0 else 0)
    if current:
        raise DimacsParseError(clause_line, "unterminated clause")
    if n_vars is None:
        raise DimacsParseError(1, "missing problem line")
    if len(clauses) != n_clauses:
        raise DimacsParseError(
            1, f"header declares {n_clauses} clauses, body has {len(clauses)}")
    widths = {len(c) for c in clauses}
    if len(widths) > 1:
        raise DimacsParseError(1, f"mixed clause widths {sorted(widths)}")
    k = widths.pop() if widths else 0
    if n_clauses == 0:
        raise DimacsParseError(1, "formula with zero clauses is not representable")
    graph = FactorGraph.from_clauses(n_vars, np.asarray(clauses, dtype=np.int32))
    neg = Negations(np.asarray(js, dtype=np.int8).reshape(-1))
    return graph, neg


def instance_to_dict(graph, negations, generator=None):
    """Self-describing JSON document for (graph, negations, provenance)."""
    k = graph.k
    doc = {
        "format": "adsat/instance",
        "version": 1,
        "indexing": "0-based",
        "n_vars": graph.n_vars,
        "n_clauses": graph.n_clauses,
        "k": k,
        "clauses": [graph.vars_of(a).tolist() for a in range(graph.n_clauses)],
        "negations": [negations.j[a * k:(a + 1) * k].tolist()
                      for a in range(graph.n_clauses)],
    }
    if generator is not None:
        doc["generator"] = generator
    return doc


def instance_from_dict(doc):
    if doc.get("format") != "adsat/instance":
        raise ValueError("not an adsat instance document")
    graph = FactorGraph.from_clauses(
        doc["n_vars"], np.asarray(doc["clauses"], dtype=np.int32))
    neg = Negations(np.asarray(doc["negations"], dtype=np.int8).reshape(-1))
    if neg.j.shape != (graph.n_edges,):
        raise ValueError("negation table does not match the clause table")
    return graph, neg


def save_instance(path, graph, negations, generator=None):
    with open(path, "w") as fh:
        json.dump(instance_to_dict(graph, negations, generator), fh)
        fh.write("\n")


def load_instance(path):
    with open(path) as fh:
        return instance_from_dict(json.load(fh))
