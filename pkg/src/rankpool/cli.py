"""Command-line surface: instance generation and validation, model building
and solving, cut loops, hull verification, and batch experiments emitting gap
tables (CSV)."""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import os
import sys
import time

from . import pooling
from .cutloop import run_cut_loop
from .formulate import (FORMULATION_TAGS, LIGHT_TAGS, MEDIUM_TAGS,
                        SizeGuardExceeded, build_formulation, normalize_tag)
from .solver import SolverConfig, export_lp_text, export_mps, solve_lp, solve_milp
from . import verify

GAP_EPS = 1e-10

METHOD_SETS = {
    "light-lp": list(LIGHT_TAGS),
    "medium-lp": list(MEDIUM_TAGS),
    "heavy-lp": ["F1ST"],
    "milp-H": ["M1S", "M2S", "M3S", "M1T", "M2T", "M3T"],
    "primal-H": ["G1S", "G2S", "G1T", "G2T"],
}

EXPERIMENT_HEADER = "instance,method,dual_bound,primal_bound,gap_pct,wall_time,status"


def _config(args) -> SolverConfig:
    return SolverConfig(time_limit=getattr(args, "time_limit", None))


def cmd_gen(args) -> int:
    params = pooling.GenParams(
        nS=args.nS, nI=args.nI, nT=args.nT, K=args.K,
        density_si=args.density_si, density_ii=args.density_ii,
        density_it=args.density_it, density_st=args.density_st,
        arc_lower_prob=args.arc_lower_prob,
        u_arc=(args.u_arc_lo, args.u_arc_hi),
        mu_width=(args.mu_width_lo, args.mu_width_hi))
    inst = pooling.generate_random(params, args.seed)
    text = pooling.dumps(inst) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_validate(args) -> int:
    try:
        inst = pooling.load(args.instance)
    except (pooling.SchemaError, pooling.ValidationError) as e:
        print(f"INVALID: {e}")
        return 1
    warnings = inst.validate()
    for w in warnings:
        print(f"warning: {w}")
    print(f"OK: {len(inst.S)} sources, {len(inst.I)} pools, "
          f"{len(inst.T)} terminals, {len(inst.arcs)} arcs")
    return 0


def cmd_build(args) -> int:
    inst = pooling.load(args.instance)
    model = build_formulation(inst, args.tag, args.H)
    export_mps(model, args.out)
    if args.lp_text:
        export_lp_text(model, args.lp_text)
    print(f"wrote {args.out} ({model.num_vars()} vars, "
          f"{model.num_constraints()} rows)")
    return 0


def cmd_solve(args) -> int:
    inst = pooling.load(args.instance)
    model = build_formulation(inst, args.tag, args.H)
    config = _config(args)
    res = solve_milp(model, config) if model.binary_names else solve_lp(model, config)
    doc = {"instance": args.instance, "tag": normalize_tag(args.tag),
           "status": res.status, "objective": res.objective,
           "dual_bound": res.dual_bound, "gap": res.gap,
           "iterations": res.iterations, "nodes": res.nodes,
           "wall_time": round(res.wall_time, 3)}
    if args.print_solution and res.primal:
        doc["primal"] = {k: v for k, v in sorted(res.primal.items())
                         if abs(v) > 1e-9}
    print(json.dumps(doc, indent=2))
    return 0 if res.status in ("Optimal", "Limit") else 1


def cmd_cuts(args) -> int:
    inst = pooling.load(args.instance)
    families = tuple(args.families.split(","))
    rep = run_cut_loop(inst, args.base, families, max_rounds=args.rounds,
                       config=_config(args))
    csv = rep.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv)
    else:
        sys.stdout.write(csv)
    print(f"# final={rep.final_value} target={rep.target_value} "
          f"converged={rep.converged}", file=sys.stderr)
    return 0 if rep.converged else 1


def cmd_verify_hull(args) -> int:
    results = verify.run_all(args.n1, args.n2, args.trials, args.seed)
    all_ok = True
    for name, ok, lines in results:
        for line in lines:
            print(f"  {line}")
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        all_ok &= ok
    return 0 if all_ok else 1


def _timed_solve(model, config):
    t0 = time.time()
    try:
        if model.binary_names:
            res = solve_milp(model, config)
        else:
            res = solve_lp(model, config)
        return res, time.time() - t0, None
    except Exception as e:                       # record, never abort the batch
        return None, time.time() - t0, str(e)


def _experiment_task(path, method, H, time_limit):
    inst = pooling.load(path)
    config = SolverConfig(time_limit=time_limit)
    name = os.path.splitext(os.path.basename(path))[0]
    try:
        model = build_formulation(inst, method, H)
    except SizeGuardExceeded as e:
        return (name, method, None, None, None, 0.0, f"Skipped({e})")
    res, wall, err = _timed_solve(model, config)
    if res is None:
        return (name, method, None, None, None, wall, f"Error({err})")
    if method.startswith("G"):
        primal = res.objective
        dual = res.dual_bound
    elif method.startswith("M"):
        dual = res.dual_bound if res.dual_bound is not None else res.objective
        primal = None
    else:
        dual = res.objective
        primal = None
    return (name, method, dual, primal, None, wall, res.status)


def _gap_pct(primal, dual):
    if primal is None or dual is None:
        return None
    return 100.0 * (primal - dual) / max(GAP_EPS, abs(primal))


def cmd_experiment(args) -> int:
    paths = sorted(os.path.join(args.instances, f)
                   for f in os.listdir(args.instances) if f.endswith(".json"))
    if not paths:
        print("no .json instances found", file=sys.stderr)
        return 1
    for p in paths:
        pooling.load(p)                          # every file must validate
    methods = METHOD_SETS[args.methods]
    tasks = [(p, m, args.H, args.time_limit) for p in paths for m in methods]
    primal_tasks = [(p, g, args.H, args.time_limit)
                    for p in paths for g in METHOD_SETS["primal-H"]]

    def run_tasks(ts):
        if args.workers > 1:
            with concurrent.futures.ProcessPoolExecutor(args.workers) as ex:
                return list(ex.map(_experiment_task_star, ts))
        return [_experiment_task(*t) for t in ts]

    rows = run_tasks(tasks)
    # primal bounds for gap computation come from the best inner restriction
    best_primal = {}
    if args.methods != "primal-H":
        for (name, method, dual, primal, _gap, wall, status) in run_tasks(primal_tasks):
            if primal is not None:
                cur = best_primal.get(name)
                best_primal[name] = primal if cur is None else min(cur, primal)
    else:
        for (name, method, dual, primal, _gap, wall, status) in rows:
            if primal is not None:
                cur = best_primal.get(name)
                best_primal[name] = primal if cur is None else min(cur, primal)

    out_lines = [EXPERIMENT_HEADER]
    agg = {}
    for (name, method, dual, primal, _gap, wall, status) in rows:
        p = primal if primal is not None else best_primal.get(name)
        gap = _gap_pct(p, dual)
        out_lines.append(",".join([
            name, method,
            "" if dual is None else repr(float(dual)),
            "" if p is None else repr(float(p)),
            "" if gap is None else f"{gap:.6f}",
            f"{wall:.3f}", status]))
        if gap is not None:
            agg.setdefault(method, []).append((gap, wall))
    for method in methods:
        vals = agg.get(method, [])
        if vals:
            g = sum(v[0] for v in vals) / len(vals)
            w = sum(v[1] for v in vals) / len(vals)
            out_lines.append(f"AVERAGE,{method},,,{g:.6f},{w:.3f},")
    text = "\n".join(out_lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _experiment_task_star(t):
    return _experiment_task(*t)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="rankpool",
        description="Rank-1 hull toolkit and pooling relaxation harness")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--nS", type=int, default=3)
    g.add_argument("--nI", type=int, default=2)
    g.add_argument("--nT", type=int, default=2)
    g.add_argument("--K", type=int, default=2)
    g.add_argument("--density-si", dest="density_si", type=float, default=0.6)
    g.add_argument("--density-ii", dest="density_ii", type=float, default=0.25)
    g.add_argument("--density-it", dest="density_it", type=float, default=0.6)
    g.add_argument("--density-st", dest="density_st", type=float, default=0.0)
    g.add_argument("--arc-lower-prob", dest="arc_lower_prob", type=float, default=0.0)
    g.add_argument("--u-arc-lo", dest="u_arc_lo", type=float, default=4.0)
    g.add_argument("--u-arc-hi", dest="u_arc_hi", type=float, default=15.0)
    g.add_argument("--mu-width-lo", dest="mu_width_lo", type=float, default=0.4)
    g.add_argument("--mu-width-hi", dest="mu_width_hi", type=float, default=1.5)
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("validate", help="validate an instance file")
    v.add_argument("instance")
    v.set_defaults(func=cmd_validate)

    b = sub.add_parser("build", help="build a formulation and export MPS")
    b.add_argument("instance")
    b.add_argument("--tag", required=True, choices=None)
    b.add_argument("--H", type=int, default=None)
    b.add_argument("--out", required=True)
    b.add_argument("--lp-text", dest="lp_text", default=None)
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("solve", help="build and solve a formulation")
    s.add_argument("instance")
    s.add_argument("--tag", required=True)
    s.add_argument("--H", type=int, default=None)
    s.add_argument("--time-limit", dest="time_limit", type=float, default=1800.0)
    s.add_argument("--print-solution", dest="print_solution", action="store_true")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("cuts", help="run the root cutting-plane loop")
    c.add_argument("instance")
    c.add_argument("--base", choices=("S", "T"), default="S")
    c.add_argument("--families", default="rowconv,rowplusconv,ratio")
    c.add_argument("--rounds", type=int, default=200)
    c.add_argument("--time-limit", dest="time_limit", type=float, default=None)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_cuts)

    vh = sub.add_parser("verify-hull", help="run the hull theorem suites")
    vh.add_argument("n1", type=int, nargs="?", default=3)
    vh.add_argument("n2", type=int, nargs="?", default=3)
    vh.add_argument("trials", type=int, nargs="?", default=20)
    vh.add_argument("seed", type=int, nargs="?", default=42)
    vh.set_defaults(func=cmd_verify_hull)

    e = sub.add_parser("experiment", help="batch relaxation experiments")
    e.add_argument("instances", help="directory of instance .json files")
    e.add_argument("--methods", choices=sorted(METHOD_SETS), required=True)
    e.add_argument("--H", type=int, default=3)
    e.add_argument("--time-limit", dest="time_limit", type=float, default=1800.0)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_experiment)

    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
