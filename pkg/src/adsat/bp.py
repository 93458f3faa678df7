"""Belief propagation for K-SAT instances with explicit negation bits.

Messages are probability pairs over a variable's value; only the
0-component is stored (``nu0``), the 1-component is its complement.  The
clause-to-variable update is

    nuhat^r = (1 - delta_{r,J} * Pi) / (2 - Pi),   Pi = prod nu_j^{J_j}

over the other members of the clause, and the variable-to-clause update is
the normalized product of incoming nuhat components.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._kernels import impl as _impl
from ._kernels import get_impl

__all__ = [
    "Status",
    "BpState",
    "ContradictionError",
    "bp_clause_update",
    "bp_var_update",
    "run_bp",
    "bethe_entropy",
    "factorized_regular_bp",
]

DEFAULT_DAMPING = 0.2
DEFAULT_TOL = 1e-10
DEFAULT_MAX_SWEEPS = 10_000


class Status(enum.Enum):
    CONVERGED = "converged"
    NOT_CONVERGED = "not_converged"
    CONTRADICTION = "contradiction"


class ContradictionError(RuntimeError):
    """Entropy/complexity requested on a contradictory message state."""


@dataclass
class BpState:
    """Per-edge clause-to-variable messages plus run diagnostics."""

    nuhat0: np.ndarray
    status: Status
    sweeps: int
    max_delta: float
    entropy_avg: float | None = None  # time average over the last window, if requested


def bp_clause_update(incoming_nu, incoming_j, j_target):
    """Message a clause sends to one member, given the other members.

    ``incoming_nu`` are (nu0, nu1) pairs for the other k-1 members,
    ``incoming_j`` their negation bits, ``j_target`` the bit on the updated
    edge.  Returns the normalized (nuhat0, nuhat1).
    """
    pi = 1.0
    for (nu0, nu1), jb in zip(incoming_nu, incoming_j):
        pi *= nu0 if jb == 0 else nu1
    z = 2.0 - pi
    good = 1.0 / z
    bad = (1.0 - pi) / z
    return (bad, good) if j_target == 0 else (good, bad)


def bp_var_update(incoming_nuhat):
    """Normalized product of incoming clause messages; empty -> (1/2, 1/2)."""
    p0 = 1.0
    p1 = 1.0
    for h0, h1 in incoming_nuhat:
        p0 *= h0
        p1 *= h1
    z = p0 + p1
    if z <= 0.0:
        raise ContradictionError("both message components vanished")
    return p0 / z, p1 / z


def run_bp(graph, negations, damping=DEFAULT_DAMPING, tol=DEFAULT_TOL,
           max_sweeps=DEFAULT_MAX_SWEEPS, seed=0, average_window=0,
           backend=None):
    """Iterate BP with random-order asynchronous sweeps until convergence.

    Messages start from seeded uniform noise; a sweep visits clauses in a
    freshly shuffled order and damps the clause-to-variable updates.  If
    ``average_window`` is positive and the run does not converge, the Bethe
    entropy is additionally averaged over the final window of sweeps and
    reported in ``entropy_avg``.
    """
    kern = get_impl(backend) if backend else _impl
    rng = np.random.default_rng(seed)
    nuhat0 = rng.uniform(0.0, 1.0, size=graph.n_edges)
    state = BpState(nuhat0=nuhat0, status=Status.NOT_CONVERGED, sweeps=0,
                    max_delta=math.inf)
    if graph.n_clauses == 0:
        state.status = Status.CONVERGED
        state.max_delta = 0.0
        return state
    window = []
    for sweep in range(1, max_sweeps + 1):
        order = rng.permutation(graph.n_clauses).astype(np.int32)
        delta, contra = kern.bp_sweep(
            graph.k, graph.clause_vars, graph.var_ptr, graph.var_eids,
            negations.j, nuhat0, order, damping)
        state.sweeps = sweep
        state.max_delta = delta
        if contra:
            state.status = Status.CONTRADICTION
            return state
        if delta < tol:
            state.status = Status.CONVERGED
            return state
        if average_window and sweep > max_sweeps - average_window:
            sa, si, sai, ok = kern.bp_entropy_terms(
                graph.k, graph.clause_vars, graph.var_ptr, graph.var_eids,
                negations.j, nuhat0)
            if ok:
                window.append((sa + si - sai) / graph.n_vars)
    state.status = Status.NOT_CONVERGED
    if window:
        state.entropy_avg = float(np.mean(window))
    return state


def bethe_entropy(graph, negations, state, backend=None):
    """Bethe entropy per variable of a converged BP fixed point."""
    if state.status is Status.CONTRADICTION:
        raise ContradictionError("entropy undefined: BP hit a contradiction")
    kern = get_impl(backend) if backend else _impl
    sa, si, sai, ok = kern.bp_entropy_terms(
        graph.k, graph.clause_vars, graph.var_ptr, graph.var_eids,
        negations.j, state.nuhat0)
    if not ok:
        raise ContradictionError("entropy undefined: zero normalizer in a term")
    return (sa + si - sai) / graph.n_vars


# ---------------------------------------------------------------------------
# factorized solution on regular graphs
# ---------------------------------------------------------------------------

def _entropy_uniform(u, L, K):
    """Entropy density at the edge-independent fixed point with all J = 0."""
    pi = u ** (K - 1)
    q_bad = (1.0 - pi) / (2.0 - pi)
    q_good = 1.0 / (2.0 - pi)
    s_a = math.log(1.0 - u ** K)
    s_i = math.log(q_bad ** L + q_good ** L)
    s_ai = math.log(u * q_bad + (1.0 - u) * q_good)
    return (L / K) * s_a + s_i - L * s_ai


def _entropy_balanced(p, L, K):
    """Entropy density when every variable is negated in exactly L/2 clauses.

    ``p`` is the probability the cavity message puts on the edge's bad
    value; by the flip symmetry it is the same on J=0 and J=1 edges.
    """
    pi = p ** (K - 1)
    q_bad = (1.0 - pi) / (2.0 - pi)
    q_good = 1.0 / (2.0 - pi)
    s_a = math.log(1.0 - p ** K)
    s_i = math.log(2.0) + (L / 2) * math.log(q_bad * q_good)
    s_ai = math.log(p * q_bad + (1.0 - p) * q_good)
    return (L / K) * s_a + s_i - L * s_ai


def factorized_regular_bp(L, K=3, pattern="uniform", damping=0.5, tol=1e-14,
                          max_iters=100_000):
    """Edge-independent BP fixed point on the L-regular ensemble.

    ``pattern='uniform'`` solves the all-J=0 (equivalently polarized) scalar
    system; ``pattern='balanced_even'`` (even L only) the half-negated one.
    Returns ``(messages, entropy)`` where ``messages`` is a dict holding the
    fixed-point scalars.
    """
    if pattern not in ("uniform", "balanced_even"):
        raise ValueError(f"unknown pattern {pattern!r}")
    if pattern == "balanced_even" and L % 2 != 0:
        raise ValueError("balanced_even requires an even degree")
    u = 0.5
    for it in range(max_iters):
        pi = u ** (K - 1)
        q_bad = (1.0 - pi) / (2.0 - pi)
        q_good = 1.0 / (2.0 - pi)
        if pattern == "uniform":
            a = q_bad ** (L - 1)
            b = q_good ** (L - 1)
            new = a / (a + b)
        else:
            half = L // 2
            a = q_bad ** (half - 1) * q_good ** half
            b = q_good ** (half - 1) * q_bad ** half
            new = a / (a + b)
        new = (1.0 - damping) * new + damping * u
        if abs(new - u) < tol:
            u = new
            break
        u = new
    else:
        raise RuntimeError(
            f"factorized fixed point did not converge (last iterate {u!r})")
    pi = u ** (K - 1)
    messages = {"nu_bad": u, "nuhat_bad": (1.0 - pi) / (2.0 - pi),
                "nuhat_good": 1.0 / (2.0 - pi)}
    if pattern == "uniform":
        return messages, _entropy_uniform(u, L, K)
    return messages, _entropy_balanced(u, L, K)
