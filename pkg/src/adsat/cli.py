"""Command-line entry point.

Every subcommand writes machine-readable artifacts (JSON for structured
results, CSV for curves and tables) and embeds the resolved configuration
and package version, so identical invocations reproduce identical bytes.
Exit codes: 0 ok, 2 configuration error, 3 numerical degeneracy under
--strict, 1 other runtime failures.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__, adversary, bp, exact, formula, ldev, sp

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3

OUTDIR_ENV = "ADSAT_OUTDIR"


class ConfigError(ValueError):
    pass


def _out_path(args, default_name):
    if args.out:
        return args.out
    return os.path.join(os.environ.get(OUTDIR_ENV, "."), default_name)


def _meta(args):
    cfg = {k: v for k, v in sorted(vars(args).items())
           if k not in ("func",) and not k.startswith("_")}
    return {"version": f"adsat {__version__}", "config": cfg}


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(c) for c in row) + "\n")


def _csv_cell(c):
    if isinstance(c, float):
        return repr(c)
    return str(c)


def _parse_int_range(text):
    """'2..9' -> [2..9]; '2,4,6' -> [2,4,6]; '5' -> [5]."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in text.split(",") if t]


def _parse_float_list(text):
    return [float(t) for t in text.split(",") if t]


def _parse_alpha_grid(text):
    """'3.30:3.50:0.02' -> inclusive arithmetic grid; or a comma list."""
    if ":" in text:
        lo, hi, step = (float(t) for t in text.split(":"))
        n = int(round((hi - lo) / step))
        return [round(lo + i * step, 10) for i in range(n + 1)]
    return _parse_float_list(text)


def _load_instance_arg(args):
    if not args.instance:
        raise ConfigError("--instance is required")
    return formula.load_instance(args.instance)


def _finish(args, degeneracies):
    if degeneracies:
        sys.stderr.write("degeneracies: " + "; ".join(degeneracies) + "\n")
        if args.strict:
            return EXIT_DEGENERATE
    return EXIT_OK


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen(args):
    if (args.regular is None) == (args.poisson is None):
        raise ConfigError("specify exactly one of --regular K L / --poisson ALPHA")
    seeds = np.random.SeedSequence(args.seed).spawn(2)
    if args.regular is not None:
        k, L = args.regular
        graph = formula.generate_regular(args.n, L, k, seeds[0])
        gen = {"kind": "regular", "k": k, "degree": L, "n": args.n,
               "seed": args.seed, "neg_mode": args.neg_mode}
    else:
        k = args.k
        graph = formula.generate_poisson(args.n, args.poisson, k, seeds[0])
        gen = {"kind": "poisson", "k": k, "alpha": args.poisson, "n": args.n,
               "seed": args.seed, "neg_mode": args.neg_mode}
    neg = formula.assign_negations(graph, args.neg_mode, seeds[1])
    path = _out_path(args, "instance.json")
    doc = formula.instance_to_dict(graph, neg, generator=gen)
    doc["meta"] = _meta(args)
    _write_json(path, doc)
    print(f"wrote {path}: n={graph.n_vars} m={graph.n_clauses} k={graph.k}")
    return EXIT_OK


def cmd_bp(args):
    graph, neg = _load_instance_arg(args)
    state = bp.run_bp(graph, neg, damping=args.damping, tol=args.tol,
                      max_sweeps=args.max_sweeps, seed=args.seed,
                      average_window=args.average_window)
    payload = dict(_meta(args), status=state.status.value, sweeps=state.sweeps,
                   max_delta=state.max_delta, entropy=None,
                   entropy_avg=state.entropy_avg)
    degeneracies = []
    if state.status is bp.Status.CONVERGED:
        payload["entropy"] = bp.bethe_entropy(graph, neg, state)
    else:
        degeneracies.append(f"bp status {state.status.value}")
    path = _out_path(args, "bp.json")
    _write_json(path, payload)
    print(f"wrote {path}: status={state.status.value} sweeps={state.sweeps} "
          f"entropy={payload['entropy']}")
    return _finish(args, degeneracies)


def cmd_sp(args):
    graph, neg = _load_instance_arg(args)
    state = sp.run_sp(graph, neg, damping=args.damping, tol=args.tol,
                      max_sweeps=args.max_sweeps, seed=args.seed,
                      init="random", average_window=args.average_window)
    zero_state = sp.run_sp(graph, neg, damping=args.damping, tol=args.tol,
                           max_sweeps=1, seed=args.seed, init="zero")
    payload = dict(_meta(args), status=state.status.value, sweeps=state.sweeps,
                   max_qhat=state.max_qhat, trivial=state.trivial,
                   complexity=None, complexity_avg=state.complexity_avg,
                   zero_start_is_fixed_point=bool(zero_state.max_delta == 0.0))
    degeneracies = []
    if state.status is sp.Status.CONVERGED:
        payload["complexity"] = sp.complexity(graph, neg, state)
    else:
        degeneracies.append(f"sp status {state.status.value}")
    path = _out_path(args, "sp.json")
    _write_json(path, payload)
    print(f"wrote {path}: status={state.status.value} trivial={state.trivial} "
          f"complexity={payload['complexity']}")
    return _finish(args, degeneracies)


def cmd_sp_scan(args):
    alphas = _parse_alpha_grid(args.alphas)
    degeneracies = []

    def progress(pt):
        print(f"alpha={pt.alpha:.4f} sigma={pt.sigma} trivial={pt.trivial} "
              f"status={pt.status.value}", flush=True)

    try:
        result = sp.threshold_scan_balanced(
            alphas, args.n, k=args.k, seed=args.seed, damping=args.damping,
            tol=args.tol, max_sweeps=args.max_sweeps, progress=progress)
    except sp.NoCrossingError as err:
        sys.stderr.write(f"{err}\n")
        return EXIT_RUNTIME
    rows = [(p.alpha, "" if p.sigma is None else p.sigma, int(p.trivial),
             p.status.value) for p in result.points]
    path = _out_path(args, "sp_scan.csv")
    _write_csv(path, ["alpha", "sigma", "trivial", "status"], rows)
    meta = dict(_meta(args), alpha_cross=result.alpha_cross)
    _write_json(path + ".meta.json", meta)
    for p in result.points:
        if p.status is not sp.Status.CONVERGED:
            degeneracies.append(f"alpha={p.alpha}: {p.status.value}")
    print(f"wrote {path}: crossing at alpha = {result.alpha_cross:.4f}")
    return _finish(args, degeneracies)


def cmd_ldev(args):
    n_spec = sum(x is not None for x in
                 (args.regular_ensemble, args.poisson, args.instance))
    if n_spec != 1:
        raise ConfigError(
            "specify exactly one of --regular-ensemble / --poisson / --instance")
    if args.regular_ensemble is not None:
        spec = ldev.RegularEnsemble(args.regular_ensemble, args.k)
    elif args.poisson is not None:
        spec = ldev.PoissonEnsemble(args.poisson, args.k, args.n)
    else:
        spec = formula.load_instance(args.instance)[0]
    xs = _parse_float_list(args.x) if args.x else ldev.DEFAULT_X_GRID

    def progress(pt):
        print(f"x={pt.x:+.1f} phi={pt.phi:.5f} s={pt.s:.5f} l={pt.l:.5f} "
              f"ess={pt.ess:.3f}", flush=True)

    curve = ldev.ldf_curve(
        spec, base=args.base, xs=xs, pop_size=args.pop_size,
        burn_sweeps=args.burn, measure_sweeps=args.measure,
        n_samples=args.n_samples, seed=args.seed,
        restrict_balanced=args.balanced, n_per_slot=args.n_per_slot,
        threads=args.threads, progress=progress)
    path = _out_path(args, "ldev.csv")
    _write_csv(path, ["x", "phi", "s", "l", "physical"], curve.rows())
    meta = dict(_meta(args),
                degenerate_points=[p.x for p in curve.points if p.degenerate])
    _write_json(path + ".meta.json", meta)
    degeneracies = [f"x={p.x}: ESS fraction below threshold"
                    for p in curve.points if p.degenerate]
    print(f"wrote {path} ({len(curve.points)} points)")
    return _finish(args, degeneracies)


def cmd_count(args):
    graph, neg = _load_instance_arg(args)
    try:
        mc = exact.count_models(graph, neg, max_nodes=args.max_nodes)
    except exact.CountBudgetExceeded as err:
        sys.stderr.write(f"{err}\n")
        return EXIT_RUNTIME
    payload = dict(_meta(args), count=str(mc.count), entropy=mc.entropy,
                   nodes=mc.nodes)
    path = _out_path(args, "count.json")
    _write_json(path, payload)
    print(f"wrote {path}: count={mc.count} entropy={mc.entropy}")
    return EXIT_OK


def cmd_eldf(args):
    graph, _ = _load_instance_arg(args)
    hist = exact.empirical_ldf(graph, args.samples, args.bin_width,
                               args.seed, mode=args.mode,
                               max_nodes=args.max_nodes)
    l_n = hist.l_n
    rows = [(hist.bin_center(b), hist.counts[b], l_n[b])
            for b in sorted(hist.counts)]
    path = _out_path(args, "eldf.csv")
    _write_csv(path, ["s_bin", "count", "l_n"], rows)
    meta = dict(_meta(args), n_samples=hist.n_samples, n_unsat=hist.n_unsat,
                n_skipped=hist.n_skipped)
    _write_json(path + ".meta.json", meta)
    degeneracies = []
    if hist.n_skipped:
        degeneracies.append(f"{hist.n_skipped} samples skipped on budget")
    mode_s = hist.mode_entropy
    print(f"wrote {path}: mode s={mode_s if mode_s is None else round(mode_s, 4)} "
          f"over {hist.n_samples} samples")
    return _finish(args, degeneracies)


def cmd_anneal(args):
    graph, _ = _load_instance_arg(args)
    res = adversary.anneal(graph, rate=args.rate, seed=args.seed,
                           init_mode=args.init, literal_rule=args.literal_rule,
                           max_nodes=args.max_nodes)
    payload = dict(_meta(args),
                   s_min=None if math.isinf(res.s_min) else res.s_min,
                   found_unsat=res.found_unsat, n0=res.n0,
                   mc_steps_total=res.mc_steps_total, aborted=res.aborted,
                   trace=[(t, b, None if math.isinf(s) else s,
                           None if math.isinf(sm) else sm)
                          for t, b, s, sm in res.trace],
                   dimacs=formula.to_dimacs(graph, res.negations))
    path = _out_path(args, "anneal.json")
    _write_json(path, payload)
    print(f"wrote {path}: found_unsat={res.found_unsat} s_min={payload['s_min']} "
          f"steps={res.mc_steps_total}")
    return _finish(args, ["anneal aborted on counter budget"] if res.aborted else [])


def cmd_ps(args):
    res = adversary.ps_experiment(args.L, args.n, args.instances,
                                  rate=args.rate, seed=args.seed, k=args.k,
                                  threads=args.threads,
                                  max_nodes=args.max_nodes,
                                  progress=lambda r: print(
                                      f"instance done: found_unsat={r.found_unsat} "
                                      f"steps={r.mc_steps_total}", flush=True))
    path = _out_path(args, "ps.csv")
    _write_csv(path, ["L", "N", "I", "p_s", "stderr"],
               [(res.L, res.n_vars, res.n_instances, res.p_s, res.stderr)])
    meta = dict(_meta(args), n_unsat_found=res.n_unsat_found,
                n_aborted=res.n_aborted)
    _write_json(path + ".meta.json", meta)
    degeneracies = ([f"{res.n_aborted} instances aborted"]
                    if res.n_aborted else [])
    print(f"wrote {path}: p_s={res.p_s:.3f} +- {res.stderr:.3f}")
    return _finish(args, degeneracies)


def cmd_table1(args):
    Ls = _parse_int_range(args.L)
    rows = []
    for L in Ls:
        _, s_r = bp.factorized_regular_bp(L, args.k, "uniform")
        if L % 2 == 0:
            _, s_b = bp.factorized_regular_bp(L, args.k, "balanced_even")
            rows.append((L, s_r, s_b))
        else:
            rows.append((L, s_r, ""))
    path = _out_path(args, "table1.csv")
    _write_csv(path, ["L", "s_R", "s_B"], rows)
    _write_json(path + ".meta.json", _meta(args))
    print(f"wrote {path} ({len(rows)} rows)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", default=None, help="output path")
    p.add_argument("--strict", action="store_true",
                   help="exit 3 on any flagged numerical degeneracy")
    p.add_argument("--threads", type=int, default=1)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="adsat",
        description="adversarial K-SAT toolkit: message passing, large "
                    "deviations, exact counting, annealing adversary")
    ap.add_argument("--version", action="version",
                    version=f"adsat {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an instance file")
    p.add_argument("--regular", nargs=2, type=int, metavar=("K", "L"))
    p.add_argument("--poisson", type=float, metavar="ALPHA")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--neg-mode", default="random",
                   choices=formula.NEGATION_MODES)
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bp", help="belief propagation on an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--damping", type=float, default=bp.DEFAULT_DAMPING)
    p.add_argument("--tol", type=float, default=bp.DEFAULT_TOL)
    p.add_argument("--max-sweeps", type=int, default=bp.DEFAULT_MAX_SWEEPS)
    p.add_argument("--average-window", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_bp)

    p = sub.add_parser("sp", help="survey propagation on an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--damping", type=float, default=sp.DEFAULT_DAMPING)
    p.add_argument("--tol", type=float, default=sp.DEFAULT_TOL)
    p.add_argument("--max-sweeps", type=int, default=sp.DEFAULT_MAX_SWEEPS)
    p.add_argument("--average-window", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_sp)

    p = sub.add_parser("sp-scan",
                       help="complexity zero-crossing over an alpha grid")
    p.add_argument("--alphas", required=True,
                   help="'lo:hi:step' or comma-separated list")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--damping", type=float, default=sp.DEFAULT_DAMPING)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-sweeps", type=int, default=sp.DEFAULT_MAX_SWEEPS)
    _add_common(p)
    p.set_defaults(func=cmd_sp_scan)

    p = sub.add_parser("ldev", help="tilted rate curve l(s)")
    p.add_argument("--regular-ensemble", type=int, metavar="L")
    p.add_argument("--poisson", type=float, metavar="ALPHA")
    p.add_argument("--instance")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--n", type=int, default=300,
                   help="instance size for --poisson")
    p.add_argument("--base", choices=("bp", "sp"), default="bp")
    p.add_argument("--x", default=None, help="comma-separated tilt values")
    p.add_argument("--pop-size", type=int, default=1000)
    p.add_argument("--burn", type=int, default=ldev.DEFAULT_BURN_SWEEPS)
    p.add_argument("--measure", type=int, default=ldev.DEFAULT_MEASURE_SWEEPS)
    p.add_argument("--n-samples", type=int, default=100)
    p.add_argument("--n-per-slot", type=int, default=1)
    p.add_argument("--balanced", action="store_true",
                   help="restrict to balanced negation-configurations")
    _add_common(p)
    p.set_defaults(func=cmd_ldev)

    p = sub.add_parser("count", help="exact model count of an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--max-nodes", type=int, default=exact.DEFAULT_MAX_NODES)
    _add_common(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("eldf", help="empirical entropy histogram")
    p.add_argument("--instance", required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--bin-width", type=float, default=0.01)
    p.add_argument("--mode", default="random", choices=("random", "balanced"))
    p.add_argument("--max-nodes", type=int, default=exact.DEFAULT_MAX_NODES)
    _add_common(p)
    p.set_defaults(func=cmd_eldf)

    p = sub.add_parser("anneal", help="annealing adversary on an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--rate", type=float, default=1.1)
    p.add_argument("--init", default="random",
                   choices=("random", "balanced"))
    p.add_argument("--literal-rule", action="store_true",
                   help="always-accept variant of the printed rule")
    p.add_argument("--max-nodes", type=int, default=exact.DEFAULT_MAX_NODES)
    _add_common(p)
    p.set_defaults(func=cmd_anneal)

    p = sub.add_parser("ps", help="adversary failure probability experiment")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--instances", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--rate", type=float, default=1.1)
    p.add_argument("--max-nodes", type=int, default=exact.DEFAULT_MAX_NODES)
    _add_common(p)
    p.set_defaults(func=cmd_ps)

    p = sub.add_parser("table1",
                       help="analytic regular-graph entropies s_R and s_B")
    p.add_argument("--L", required=True, help="range like '2..9'")
    p.add_argument("--k", type=int, default=3)
    _add_common(p)
    p.set_defaults(func=cmd_table1)
    return ap


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    argv = _merge_value_flags(list(argv))
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as err:
        sys.stderr.write(f"config error: {err}\n")
        return EXIT_CONFIG
    except OSError as err:
        sys.stderr.write(f"config error: {err}\n")
        return EXIT_CONFIG


def _merge_value_flags(argv):
    """Join flags whose values may start with '-' (e.g. --x -100,0,100)."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("--x", "--alphas") and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


if __name__ == "__main__":
    sys.exit(main())
