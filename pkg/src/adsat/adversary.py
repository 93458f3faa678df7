"""Simulated-annealing adversary searching for unsatisfiable negations.

The move set is single-edge negation flips; the cost is the exact entropy
of solutions, recounted after every flip.  One Monte-Carlo step attempts n
flips (n = number of variables); the inverse temperature starts at 1 and is
multiplied by the rate every 10 steps.  The run stops as soon as a
configuration with zero models is hit, or when the running minimum has not
improved for 9*n0 + 50 steps, n0 being the step at which it was first
reached.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import exact, formula

__all__ = ["AnnealResult", "PsResult", "anneal", "ps_experiment"]

ANNEAL_VAR_LIMIT = 80


@dataclass
class AnnealResult:
    negations: formula.Negations
    s_min: float                 # -inf when an unsatisfiable configuration was found
    found_unsat: bool
    n0: int                      # MC step at which s_min was first attained
    mc_steps_total: int
    trace: list = field(default_factory=list)  # (step, beta, s, s_min)
    aborted: bool = False        # counter budget hit; partial result


@dataclass
class PsResult:
    L: int
    n_vars: int
    n_instances: int
    rate: float
    p_s: float                   # fraction of instances never made unsatisfiable
    stderr: float
    n_unsat_found: int
    n_aborted: int
    results: list = field(default_factory=list)


def _accept(delta_s, beta, u, literal_rule):
    """Metropolis decision for one proposed flip.

    The minimizing rule accepts with min{1, exp(-beta*delta)}; a flip that
    lowers the entropy is therefore always taken.  ``literal_rule`` switches
    to max{1, exp(beta*delta)} clamped to a probability, which accepts every
    proposal (kept for comparison; it turns the search into a random walk).
    """
    if literal_rule:
        return True
    if delta_s <= 0.0:
        return True
    return u < math.exp(-beta * delta_s)


def anneal(graph, rate=1.1, seed=0, init_mode="random", literal_rule=False,
           max_nodes=exact.DEFAULT_MAX_NODES, max_mc_steps=1_000_000):
    """Minimize the solution entropy over negation-configurations.

    Returns an :class:`AnnealResult`; ``found_unsat`` is set as soon as any
    visited configuration has no models.  A counter budget overrun aborts
    with the partial result flagged.
    """
    if graph.n_vars > ANNEAL_VAR_LIMIT:
        raise ValueError(
            f"exact counting per flip is limited to n <= {ANNEAL_VAR_LIMIT}")
    rng = np.random.default_rng(seed)
    neg = formula.assign_negations(graph, init_mode, rng.integers(1 << 63))
    j = neg.j.copy()
    neg = formula.Negations(j)
    cache = {}  # component counts survive across flips; only one clause moves
    seen = {}   # full-configuration entropies; repeat proposals are lookups

    def entropy_of(nn):
        key = nn.j.tobytes()
        if key in seen:
            return seen[key]
        mc = exact.count_models(graph, nn, max_nodes=max_nodes, cache=cache)
        if len(seen) >= 100_000:
            seen.clear()
        seen[key] = mc.entropy  # None when count == 0
        return seen[key]

    try:
        s = entropy_of(neg)
    except exact.CountBudgetExceeded:
        return AnnealResult(negations=neg, s_min=math.inf, found_unsat=False,
                            n0=0, mc_steps_total=0, aborted=True)
    if s is None:
        return AnnealResult(negations=neg, s_min=-math.inf, found_unsat=True,
                            n0=0, mc_steps_total=0,
                            trace=[(0, 1.0, -math.inf, -math.inf)])
    beta = 1.0
    s_min = s
    best = formula.Negations(j.copy())
    n0 = 0
    trace = []
    n = graph.n_vars
    n_edges = graph.n_edges
    for step in range(1, max_mc_steps + 1):
        for _ in range(n):
            e = int(rng.integers(n_edges))
            u = float(rng.random())
            j[e] = 1 - j[e]
            try:
                s_new = entropy_of(neg)
            except exact.CountBudgetExceeded:
                j[e] = 1 - j[e]
                return AnnealResult(negations=best, s_min=s_min,
                                    found_unsat=False, n0=n0,
                                    mc_steps_total=step, trace=trace,
                                    aborted=True)
            if s_new is None:
                # no models left: the adversary is done
                best = formula.Negations(j.copy())
                trace.append((step, beta, -math.inf, -math.inf))
                return AnnealResult(negations=best, s_min=-math.inf,
                                    found_unsat=True, n0=step,
                                    mc_steps_total=step, trace=trace)
            if _accept(s_new - s, beta, u, literal_rule):
                s = s_new
                if s < s_min:
                    s_min = s
                    best = formula.Negations(j.copy())
                    n0 = step
            else:
                j[e] = 1 - j[e]
        trace.append((step, beta, s, s_min))
        if step % 10 == 0:
            beta *= rate
        if step - n0 >= 9 * n0 + 50:
            break
    return AnnealResult(negations=best, s_min=s_min, found_unsat=False,
                        n0=n0, mc_steps_total=step, trace=trace)


def _one_ps_instance(args):
    L, n_vars, k, rate, graph_seed, anneal_seed, literal_rule, max_nodes = args
    graph = formula.generate_regular(n_vars, L, k, graph_seed)
    return anneal(graph, rate=rate, seed=anneal_seed,
                  literal_rule=literal_rule, max_nodes=max_nodes)


def ps_experiment(L, n_vars, n_instances, rate=1.1, seed=0, k=3,
                  literal_rule=False, max_nodes=exact.DEFAULT_MAX_NODES,
                  threads=1, progress=None):
    """Fraction of random regular instances the adversary cannot break.

    Each instance gets its own graph and annealing seed derived from the
    master seed; instances run independently (optionally in parallel) and
    aborted runs are excluded from the fraction but reported.
    """
    seeds = np.random.SeedSequence(seed).spawn(n_instances)
    tasks = []
    for ss in seeds:
        gs, as_ = ss.generate_state(2)
        tasks.append((L, n_vars, k, rate, int(gs), int(as_), literal_rule,
                      max_nodes))
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_one_ps_instance, tasks))
    else:
        results = []
        for t in tasks:
            r = _one_ps_instance(t)
            results.append(r)
            if progress:
                progress(r)
    ok = [r for r in results if not r.aborted]
    n_unsat = sum(r.found_unsat for r in ok)
    denom = max(len(ok), 1)
    p_s = (len(ok) - n_unsat) / denom
    stderr = math.sqrt(max(p_s * (1.0 - p_s), 0.0) / denom)
    return PsResult(L=L, n_vars=n_vars, n_instances=n_instances, rate=rate,
                    p_s=p_s, stderr=stderr, n_unsat_found=n_unsat,
                    n_aborted=len(results) - len(ok), results=results)
