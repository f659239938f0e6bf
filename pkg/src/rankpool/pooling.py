"""Generalized pooling instances: network data, validation, reachability,
ghost-flow bounds, JSON I/O, and a seeded random generator.

Node layers: sources S, pools I, terminals T; arcs run source->(pool|terminal)
or pool->(pool|terminal), with the pool-to-pool subgraph acyclic. Every
iteration order is sorted so downstream model builders are deterministic.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

__all__ = ["PoolingInstance", "ReachSets", "GhostBounds", "GenParams",
           "SchemaError", "ValidationError",
           "load", "loads", "save", "dumps", "compute_reach",
           "default_ghost_bounds", "generate_random"]


class SchemaError(Exception):
    def __init__(self, path, msg):
        super().__init__(f"{path}: {msg}")
        self.path = path


class ValidationError(Exception):
    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


@dataclass
class PoolingInstance:
    sources: dict[str, dict]            # id -> {U, L, lambda: {k: v}, out_cost?}
    pools: dict[str, dict]              # id -> {U, L}
    terminals: dict[str, dict]          # id -> {U, L, mu_lo: {k}, mu_hi: {k}}
    arcs: dict[tuple[str, str], dict]   # (i, j) -> {l, u, cost}
    ghost_overrides: dict[tuple[str, str], dict] = field(default_factory=dict)
    objective: str = "min_cost"

    @property
    def S(self) -> list[str]:
        return sorted(self.sources)

    @property
    def I(self) -> list[str]:
        return sorted(self.pools)

    @property
    def T(self) -> list[str]:
        return sorted(self.terminals)

    @property
    def spec_keys(self) -> list[str]:
        for s in self.sources.values():
            return sorted(s["lambda"])
        return []

    def arc_list(self) -> list[tuple[str, str]]:
        return sorted(self.arcs)

    def node_bounds(self, n: str) -> tuple[float, float]:
        for group in (self.sources, self.pools, self.terminals):
            if n in group:
                return float(group[n].get("L", 0.0)), float(group[n]["U"])
        raise KeyError(n)

    def arc_cost(self, i: str, j: str) -> float:
        c = float(self.arcs[(i, j)].get("cost", 0.0))
        if i in self.sources:
            c += float(self.sources[i].get("out_cost", 0.0))
        return c

    def validate(self) -> list[str]:
        """Returns warnings; raises ValidationError on invariant violations."""
        problems, warnings = [], []
        ids = list(self.sources) + list(self.pools) + list(self.terminals)
        if len(set(ids)) != len(ids):
            problems.append("node ids not unique across layers")
        keys = None
        for s in self.S:
            lam = self.sources[s].get("lambda", {})
            if keys is None:
                keys = set(lam)
            elif set(lam) != keys:
                problems.append(f"source {s}: inconsistent specification keys")
        for t in self.T:
            rec = self.terminals[t]
            if keys is not None and (set(rec.get("mu_lo", {})) != keys
                                     or set(rec.get("mu_hi", {})) != keys):
                problems.append(f"terminal {t}: specification keys differ from sources")
            for k in rec.get("mu_lo", {}):
                if rec["mu_lo"][k] > rec["mu_hi"].get(k, float("inf")):
                    problems.append(f"terminal {t}: empty window for spec {k}")
        for n in ids:
            try:
                L, U = self.node_bounds(n)
            except KeyError:
                continue
            if not (0 <= L <= U):
                problems.append(f"node {n}: need 0 <= L <= U")
        for (i, j), rec in sorted(self.arcs.items()):
            if i == j:
                problems.append(f"arc ({i},{j}): self loop")
            tail_ok = i in self.sources or i in self.pools
            head_ok = j in self.pools or j in self.terminals
            if not (tail_ok and head_ok):
                problems.append(f"arc ({i},{j}): endpoints must be "
                                "source/pool -> pool/terminal")
            lo, hi = float(rec.get("l", 0.0)), float(rec["u"])
            if not (0 <= lo <= hi):
                problems.append(f"arc ({i},{j}): need 0 <= l <= u")
        # pool-to-pool acyclicity
        color = {}

        def dfs(v):
            color[v] = 1
            for (a, b) in self.arcs:
                if a == v and b in self.pools:
                    if color.get(b) == 1:
                        return False
                    if color.get(b, 0) == 0 and not dfs(b):
                        return False
            color[v] = 2
            return True

        for p in self.I:
            if color.get(p, 0) == 0 and not dfs(p):
                problems.append("pool-to-pool subgraph contains a cycle")
                break
        if problems:
            raise ValidationError(problems)
        reach = compute_reach(self)
        for t in self.T:
            if not any(t in reach.T_i[s] for s in self.S):
                warnings.append(f"terminal {t} unreachable from every source")
        for p in self.I:
            if not reach.S_i[p]:
                warnings.append(f"pool {p} has no source path")
            if not reach.T_i[p]:
                warnings.append(f"pool {p} has no terminal path")
        return warnings


@dataclass
class ReachSets:
    S_i: dict[str, list[str]]       # sources with a path to node
    T_i: dict[str, list[str]]       # terminals reachable from node
    N_plus: dict[str, list[str]]
    N_minus: dict[str, list[str]]


def compute_reach(inst: PoolingInstance) -> ReachSets:
    nodes = inst.S + inst.I + inst.T
    N_plus = {n: [] for n in nodes}
    N_minus = {n: [] for n in nodes}
    for (i, j) in inst.arc_list():
        N_plus[i].append(j)
        N_minus[j].append(i)
    S_i = {n: set() for n in nodes}
    for s in inst.S:
        S_i[s].add(s)
        stack = [s]
        seen = {s}
        while stack:
            v = stack.pop()
            for w in N_plus[v]:
                S_i[w].add(s)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
    T_i = {n: set() for n in nodes}
    for t in inst.T:
        T_i[t].add(t)
        stack = [t]
        seen = {t}
        while stack:
            v = stack.pop()
            for w in N_minus[v]:
                T_i[w].add(t)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
    return ReachSets({n: sorted(S_i[n]) for n in nodes},
                     {n: sorted(T_i[n]) for n in nodes},
                     N_plus, N_minus)


@dataclass
class GhostBounds:
    """Bounds for the per-source pool throughputs f_si and per-terminal pool
    outputs f_jt that have no physical arc. Defaults are the tightest
    always-valid choice min(U_tail, U_head) with zero lower bound."""

    source_side: dict[tuple[str, str], tuple[float, float]]
    terminal_side: dict[tuple[str, str], tuple[float, float]]

    def source_bound(self, inst: PoolingInstance, s: str, i: str):
        if (s, i) in inst.arcs:
            rec = inst.arcs[(s, i)]
            return float(rec.get("l", 0.0)), float(rec["u"])
        return self.source_side[(s, i)]

    def terminal_bound(self, inst: PoolingInstance, j: str, t: str):
        if (j, t) in inst.arcs:
            rec = inst.arcs[(j, t)]
            return float(rec.get("l", 0.0)), float(rec["u"])
        return self.terminal_side[(j, t)]


def default_ghost_bounds(inst: PoolingInstance,
                         reach: ReachSets | None = None) -> GhostBounds:
    reach = reach or compute_reach(inst)
    src_side = {}
    for i in inst.I:
        for s in reach.S_i[i]:
            if (s, i) in inst.arcs:
                continue
            pair = (s, i)
            if pair in inst.ghost_overrides:
                rec = inst.ghost_overrides[pair]
                src_side[pair] = (float(rec.get("l", 0.0)), float(rec["u"]))
            else:
                src_side[pair] = (0.0, min(inst.node_bounds(s)[1],
                                           inst.node_bounds(i)[1]))
    term_side = {}
    for j in inst.I:
        for t in reach.T_i[j]:
            if (j, t) in inst.arcs:
                continue
            pair = (j, t)
            if pair in inst.ghost_overrides:
                rec = inst.ghost_overrides[pair]
                term_side[pair] = (float(rec.get("l", 0.0)), float(rec["u"]))
            else:
                term_side[pair] = (0.0, min(inst.node_bounds(j)[1],
                                            inst.node_bounds(t)[1]))
    return GhostBounds(src_side, term_side)


# ---------------------------------------------------------------------------
# JSON I/O
# ---------------------------------------------------------------------------

def _req(obj, key, path, typ=None):
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing required key")
    v = obj[key]
    if typ is not None and not isinstance(v, typ):
        raise SchemaError(f"{path}.{key}", f"expected {typ}")
    return v


def loads(text: str) -> PoolingInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("$", f"invalid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise SchemaError("$", "top level must be an object")
    sources, pools, terminals, arcs, ghosts = {}, {}, {}, {}, {}
    for k, rec in enumerate(_req(doc, "sources", "$", list)):
        pth = f"$.sources[{k}]"
        sid = str(_req(rec, "id", pth))
        lam = {str(a): float(b) for a, b in _req(rec, "lambda", pth, dict).items()}
        sources[sid] = {"U": float(_req(rec, "U", pth)),
                        "L": float(rec.get("L", 0.0)), "lambda": lam}
        if "out_cost" in rec:
            sources[sid]["out_cost"] = float(rec["out_cost"])
    for k, rec in enumerate(_req(doc, "pools", "$", list)):
        pth = f"$.pools[{k}]"
        pools[str(_req(rec, "id", pth))] = {
            "U": float(_req(rec, "U", pth)), "L": float(rec.get("L", 0.0))}
    for k, rec in enumerate(_req(doc, "terminals", "$", list)):
        pth = f"$.terminals[{k}]"
        tid = str(_req(rec, "id", pth))
        terminals[tid] = {
            "U": float(_req(rec, "U", pth)), "L": float(rec.get("L", 0.0)),
            "mu_lo": {str(a): float(b) for a, b in _req(rec, "mu_lo", pth, dict).items()},
            "mu_hi": {str(a): float(b) for a, b in _req(rec, "mu_hi", pth, dict).items()}}
    for k, rec in enumerate(_req(doc, "arcs", "$", list)):
        pth = f"$.arcs[{k}]"
        key = (str(_req(rec, "from", pth)), str(_req(rec, "to", pth)))
        if key in arcs:
            raise SchemaError(pth, f"duplicate arc {key}")
        arcs[key] = {"l": float(rec.get("l", 0.0)), "u": float(_req(rec, "u", pth)),
                     "cost": float(rec.get("cost", 0.0))}
    for k, rec in enumerate(doc.get("ghost_overrides", [])):
        pth = f"$.ghost_overrides[{k}]"
        key = (str(_req(rec, "from", pth)), str(_req(rec, "to", pth)))
        ghosts[key] = {"l": float(rec.get("l", 0.0)), "u": float(_req(rec, "u", pth))}
    inst = PoolingInstance(sources, pools, terminals, arcs, ghosts,
                           doc.get("objective", "min_cost"))
    inst.validate()
    return inst


def load(path: str) -> PoolingInstance:
    with open(path) as fh:
        return loads(fh.read())


def dumps(inst: PoolingInstance) -> str:
    doc = {
        "sources": [{"id": s, "U": inst.sources[s]["U"], "L": inst.sources[s]["L"],
                     "lambda": dict(sorted(inst.sources[s]["lambda"].items())),
                     **({"out_cost": inst.sources[s]["out_cost"]}
                        if "out_cost" in inst.sources[s] else {})}
                    for s in inst.S],
        "pools": [{"id": p, "U": inst.pools[p]["U"], "L": inst.pools[p]["L"]}
                  for p in inst.I],
        "terminals": [{"id": t, "U": inst.terminals[t]["U"], "L": inst.terminals[t]["L"],
                       "mu_lo": dict(sorted(inst.terminals[t]["mu_lo"].items())),
                       "mu_hi": dict(sorted(inst.terminals[t]["mu_hi"].items()))}
                      for t in inst.T],
        "arcs": [{"from": i, "to": j, "l": rec["l"], "u": rec["u"], "cost": rec["cost"]}
                 for (i, j), rec in sorted(inst.arcs.items())],
        "ghost_overrides": [{"from": i, "to": j, "l": rec["l"], "u": rec["u"]}
                            for (i, j), rec in sorted(inst.ghost_overrides.items())],
        "objective": inst.objective,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def save(inst: PoolingInstance, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(inst) + "\n")


# ---------------------------------------------------------------------------
# random generator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenParams:
    nS: int = 3
    nI: int = 2
    nT: int = 2
    K: int = 2
    density_si: float = 0.6     # source -> pool
    density_ii: float = 0.25    # pool -> pool (lower to higher index only)
    density_it: float = 0.6     # pool -> terminal
    density_st: float = 0.0     # source -> terminal
    u_arc: tuple = (4.0, 15.0)
    U_node: tuple = (8.0, 30.0)
    lambda_range: tuple = (0.5, 3.0)
    mu_width: tuple = (0.4, 1.5)
    cost_source: tuple = (1.0, 6.0)
    cost_inner: tuple = (0.0, 2.0)
    cost_terminal: tuple = (-12.0, -4.0)
    arc_lower_prob: float = 0.0
    seedless_ok: bool = False

    def check(self):
        if min(self.nS, self.nI, self.nT, self.K) < 1:
            raise ValueError("node and spec counts must be positive")
        for d in (self.density_si, self.density_ii, self.density_it):
            if not (0 < d <= 1):
                raise ValueError("layer densities must lie in (0, 1]")
        if not (0 <= self.density_st <= 1):
            raise ValueError("density_st must lie in [0, 1]")


def _rnd(rng, lo, hi, digits=2):
    return round(rng.uniform(lo, hi), digits)


def generate_random(params: GenParams, seed: int) -> PoolingInstance:
    """Seeded layered random instance; every pool gets at least one in-arc
    reaching back to a source and one out-arc reaching a terminal, and
    pool-to-pool arcs run from lower to higher index only (acyclic by
    construction). Objective: minimize total arc cost."""
    params.check()
    rng = random.Random(seed)
    S = [f"s{k+1}" for k in range(params.nS)]
    I = [f"p{k+1}" for k in range(params.nI)]
    T = [f"t{k+1}" for k in range(params.nT)]

    sources = {}
    for s in S:
        lam = {str(k + 1): _rnd(rng, *params.lambda_range)
               for k in range(params.K)}
        sources[s] = {"U": _rnd(rng, *params.U_node), "L": 0.0, "lambda": lam}
    pools = {p: {"U": _rnd(rng, *params.U_node), "L": 0.0} for p in I}
    terminals = {}
    for t in T:
        # center each window on an achievable blend so nonzero flow can meet
        # the specification while the window still binds
        weights = [rng.random() for _ in S]
        tot = sum(weights)
        mu_lo, mu_hi = {}, {}
        for k in range(params.K):
            key = str(k + 1)
            blend = sum(wg * sources[s]["lambda"][key]
                        for wg, s in zip(weights, S)) / tot
            w = _rnd(rng, *params.mu_width)
            mu_lo[key] = max(0.0, round(blend - w / 2, 2))
            mu_hi[key] = round(blend + w / 2, 2)
        terminals[t] = {"U": _rnd(rng, *params.U_node), "L": 0.0,
                        "mu_lo": mu_lo, "mu_hi": mu_hi}

    arcs = {}

    def add_arc(i, j, cost_range):
        lo = 0.0
        if params.arc_lower_prob > 0 and rng.random() < params.arc_lower_prob:
            lo = _rnd(rng, 0.1, 1.0)
        arcs[(i, j)] = {"l": lo, "u": _rnd(rng, *params.u_arc),
                        "cost": _rnd(rng, *cost_range)}

    for s in S:
        for p in I:
            if rng.random() < params.density_si:
                add_arc(s, p, params.cost_source)
    for a in range(params.nI):
        for b in range(a + 1, params.nI):
            if rng.random() < params.density_ii:
                add_arc(I[a], I[b], params.cost_inner)
    for p in I:
        for t in T:
            if rng.random() < params.density_it:
                add_arc(p, t, params.cost_terminal)
    for s in S:
        for t in T:
            if rng.random() < params.density_st:
                add_arc(s, t, params.cost_terminal)

    # repair pools without a source-reaching in-arc or terminal-reaching out-arc
    for k, p in enumerate(I):
        has_in = any((s, p) in arcs for s in S) or \
                 any((I[a], p) in arcs for a in range(k))
        if not has_in:
            add_arc(S[rng.randrange(len(S))], p, params.cost_source)
        has_out = any((p, t) in arcs for t in T) or \
                  any((p, I[b]) in arcs for b in range(k + 1, params.nI))
        if not has_out:
            add_arc(p, T[rng.randrange(len(T))], params.cost_terminal)
    # final guarantee: every pool reaches a terminal and is reached by a source
    inst = PoolingInstance(sources, pools, terminals, arcs)
    reach = compute_reach(inst)
    for p in I:
        if not reach.T_i[p]:
            add_arc(p, T[rng.randrange(len(T))], params.cost_terminal)
        if not reach.S_i[p]:
            add_arc(S[rng.randrange(len(S))], p, params.cost_source)
    inst = PoolingInstance(sources, pools, terminals, arcs)
    inst.validate()
    return inst
