"""Survey propagation and the complexity of clustered solutions.

A variable-to-clause survey is the triple (q_satisfy, q_unsatisfy, q_star);
a clause-to-variable survey is the single warning probability qhat.  The
all-zero qhat configuration is always a fixed point; a run that stays away
from it signals a clustered phase with positive complexity.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import formula
from .bp import ContradictionError, Status
from ._kernels import impl as _impl
from ._kernels import get_impl

__all__ = [
    "SpState",
    "sp_clause_update",
    "sp_var_update",
    "run_sp",
    "complexity",
    "threshold_scan_balanced",
    "NoCrossingError",
    "TRIVIAL_QHAT",
]

DEFAULT_DAMPING = 0.2
DEFAULT_TOL = 1e-10
DEFAULT_MAX_SWEEPS = 10_000

# a converged state with every survey below this is the trivial fixed point
TRIVIAL_QHAT = 1e-6


class NoCrossingError(RuntimeError):
    """The scanned grid contains no sign change of the complexity."""


@dataclass
class SpState:
    """Per-edge clause surveys plus run diagnostics."""

    qhat: np.ndarray
    status: Status
    sweeps: int
    max_delta: float
    complexity_avg: float | None = None

    @property
    def max_qhat(self):
        return float(np.max(self.qhat)) if len(self.qhat) else 0.0

    @property
    def trivial(self):
        return self.max_qhat < TRIVIAL_QHAT


def sp_clause_update(incoming_qu):
    """Warning a clause sends to one member: product of the others' q_u."""
    out = 1.0
    for qu in incoming_qu:
        out *= qu
    return out


def sp_var_update(qhat_same, qhat_opposite):
    """Survey triple of a variable toward a clause.

    ``qhat_same`` are warnings from clauses whose negation bit matches the
    target edge, excluding it; ``qhat_opposite`` from the rest.  Returns
    (q_satisfy, q_unsatisfy, q_star) normalized.
    """
    p_same = 1.0
    for q in qhat_same:
        p_same *= 1.0 - q
    p_opp = 1.0
    for q in qhat_opposite:
        p_opp *= 1.0 - q
    z = p_same + p_opp - p_same * p_opp
    if z <= 0.0:
        raise ContradictionError("all survey components vanished")
    return (p_opp * (1.0 - p_same) / z,
            p_same * (1.0 - p_opp) / z,
            p_same * p_opp / z)


def run_sp(graph, negations, damping=DEFAULT_DAMPING, tol=DEFAULT_TOL,
           max_sweeps=DEFAULT_MAX_SWEEPS, seed=0, init="random",
           average_window=0, backend=None):
    """Iterate SP with random-order asynchronous damped sweeps.

    ``init='random'`` starts from uniform qhat in (0,1) to leave the trivial
    basin; ``init='zero'`` starts at the all-zero fixed point (useful to
    verify its exact idempotence).  With ``average_window`` set, a
    non-convergent run reports a time-averaged complexity.
    """
    if init not in ("random", "zero"):
        raise ValueError(f"unknown init {init!r}")
    kern = get_impl(backend) if backend else _impl
    rng = np.random.default_rng(seed)
    if init == "random":
        qhat = rng.uniform(0.0, 1.0, size=graph.n_edges)
    else:
        qhat = np.zeros(graph.n_edges)
    state = SpState(qhat=qhat, status=Status.NOT_CONVERGED, sweeps=0,
                    max_delta=math.inf)
    if graph.n_clauses == 0:
        state.status = Status.CONVERGED
        state.max_delta = 0.0
        return state
    window = []
    for sweep in range(1, max_sweeps + 1):
        order = rng.permutation(graph.n_clauses).astype(np.int32)
        delta, contra = kern.sp_sweep(
            graph.k, graph.clause_vars, graph.var_ptr, graph.var_eids,
            negations.j, qhat, order, damping)
        state.sweeps = sweep
        state.max_delta = delta
        if contra:
            state.status = Status.CONTRADICTION
            return state
        if delta < tol:
            state.status = Status.CONVERGED
            return state
        if average_window and sweep > max_sweeps - average_window:
            sa, si, sai, ok = kern.sp_complexity_terms(
                graph.k, graph.clause_vars, graph.var_ptr, graph.var_eids,
                negations.j, qhat)
            if ok:
                window.append((sa + si - sai) / graph.n_vars)
    state.status = Status.NOT_CONVERGED
    if window:
        state.complexity_avg = float(np.mean(window))
    return state


def complexity(graph, negations, state, backend=None):
    """Complexity (log clusters per variable) of a converged survey state."""
    if state.status is Status.CONTRADICTION:
        raise ContradictionError("complexity undefined: SP hit a contradiction")
    kern = get_impl(backend) if backend else _impl
    sa, si, sai, ok = kern.sp_complexity_terms(
        graph.k, graph.clause_vars, graph.var_ptr, graph.var_eids,
        negations.j, state.qhat)
    if not ok:
        raise ContradictionError("complexity undefined: zero normalizer in a term")
    return (sa + si - sai) / graph.n_vars


@dataclass
class ScanPoint:
    alpha: float
    sigma: float | None
    trivial: bool
    status: Status


@dataclass
class ScanResult:
    alpha_cross: float
    points: list = field(default_factory=list)


def threshold_scan_balanced(alphas, n_vars, k=3, seed=0,
                            damping=DEFAULT_DAMPING, tol=1e-8,
                            max_sweeps=DEFAULT_MAX_SWEEPS,
                            average_window=100, progress=None):
    """Locate where the complexity of balanced Poisson formulas crosses zero.

    For each alpha a single instance of size ``n_vars`` is drawn, balanced
    negations assigned, SP run from a random start; the crossing is linearly
    interpolated between the last positive and first negative complexity.
    Non-convergent points fall back to the time-averaged complexity and are
    flagged.  Raises :class:`NoCrossingError` if no sign change is bracketed.
    """
    alphas = list(alphas)
    points = []
    rng_seeds = np.random.SeedSequence(seed).spawn(len(alphas))
    for idx, alpha in enumerate(alphas):
        sub = rng_seeds[idx].generate_state(2)
        graph = formula.generate_poisson(n_vars, alpha, k, int(sub[0]))
        neg = formula.assign_negations(graph, "balanced", int(sub[1]))
        state = run_sp(graph, neg, damping=damping, tol=tol,
                       max_sweeps=max_sweeps, seed=int(sub[1]) ^ 0x5eed,
                       average_window=average_window)
        if state.status is Status.CONVERGED:
            sigma = 0.0 if state.trivial else complexity(graph, neg, state)
            pt = ScanPoint(alpha, sigma, state.trivial, state.status)
        elif state.complexity_avg is not None:
            pt = ScanPoint(alpha, state.complexity_avg, False, state.status)
        else:
            pt = ScanPoint(alpha, None, False, state.status)
        points.append(pt)
        if progress:
            progress(pt)
    cross = None
    for left, right in zip(points, points[1:]):
        if left.sigma is None or right.sigma is None:
            continue
        if left.sigma > 0.0 and not left.trivial and right.sigma <= 0.0:
            frac = left.sigma / (left.sigma - right.sigma)
            cross = left.alpha + frac * (right.alpha - left.alpha)
            break
    if cross is None:
        raise NoCrossingError(
            "no positive-to-negative complexity crossing on the grid; "
            f"sigmas = {[(p.alpha, p.sigma, p.trivial) for p in points]}")
    return ScanResult(alpha_cross=cross, points=points)
