"""Embedded LP/MILP solver and model exchange formats.

The LP engine is a dense bounded-variable simplex (phase 1 with artificials,
Dantzig pricing with a Bland's-rule fallback after stalling); the MILP engine
is branch-and-bound over binaries with most-fractional branching and
best-bound node selection. Both are deterministic: identical model and
config give identical pivot sequences.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .linmodel import INF, LinearModel

__all__ = ["SolverConfig", "SolveResult", "NumericalFailure", "IoError",
           "solve_lp", "solve_milp", "export_mps", "export_lp_text", "read_mps"]


class NumericalFailure(Exception):
    pass


class IoError(Exception):
    pass


@dataclass(frozen=True)
class SolverConfig:
    tol_feas: float = 1e-7
    tol_opt: float = 1e-7
    tol_int: float = 1e-6
    time_limit: float | None = None
    node_limit: int | None = None
    branching: str = "most-fractional"
    node_selection: str = "best-bound"


@dataclass
class SolveResult:
    status: str                      # Optimal | Infeasible | Unbounded | Limit
    objective: float | None = None
    primal: dict[str, float] = field(default_factory=dict)
    duals: dict[str, float] = field(default_factory=dict)
    dual_bound: float | None = None
    gap: float | None = None
    iterations: int = 0
    nodes: int = 0
    wall_time: float = 0.0


# ---------------------------------------------------------------------------
# LP: bounded-variable dense simplex
# ---------------------------------------------------------------------------

class _StandardForm:
    """min c.x, rows a.x (<=|=) b, lb <= x <= ub, prepared as numpy arrays.

    Structural variables are shifted to lower bound 0; free variables are
    split; >= rows are negated. Keeps the mappings needed to recover the
    original solution and row duals.
    """

    def __init__(self, model: LinearModel):
        self.model = model
        self.var_names = [v.name for v in model.vars]
        vidx = {n: k for k, n in enumerate(self.var_names)}
        n = len(self.var_names)
        m = len(model.constraints)
        self.m = m

        # column plan: per original var one or two columns
        self.cols = []          # (var_idx, kind) kind: 'shift'|'mirror'|'pos'|'neg'
        self.shift = []         # additive offset per column
        ubs = []
        for k, v in enumerate(model.vars):
            if v.lb > -INF:
                self.cols.append((k, "shift"))
                self.shift.append(v.lb)
                ubs.append(v.ub - v.lb)
            elif v.ub < INF:
                self.cols.append((k, "mirror"))
                self.shift.append(v.ub)
                ubs.append(INF)
            else:
                self.cols.append((k, "pos"))
                self.shift.append(0.0)
                ubs.append(INF)
                self.cols.append((k, "neg"))
                self.shift.append(0.0)
                ubs.append(INF)
        ns = len(self.cols)
        self.ns = ns

        A = np.zeros((m, ns))
        b = np.zeros(m)
        self.row_sign = np.ones(m)
        self.is_eq = np.zeros(m, bool)
        for i, con in enumerate(model.constraints):
            sgn = -1.0 if con.sense == ">=" else 1.0
            self.row_sign[i] = sgn
            self.is_eq[i] = con.sense == "="
            rhs = sgn * con.rhs
            for vn, c in con.coeffs.items():
                k = vidx[vn]
                for ci, (vk, kind) in enumerate(self.cols):
                    if vk != k:
                        continue
                    cc = sgn * c
                    if kind == "shift":
                        A[i, ci] = cc
                        rhs -= cc * self.shift[ci]
                    elif kind == "mirror":
                        A[i, ci] = -cc
                        rhs -= cc * self.shift[ci]
                    elif kind == "pos":
                        A[i, ci] = cc
                    else:
                        A[i, ci] = -cc
            b[i] = rhs
        self.A, self.b = A, b

        c = np.zeros(ns)
        self.c_shift = 0.0
        for vn, cv in model.objective.items():
            k = vidx[vn]
            for ci, (vk, kind) in enumerate(self.cols):
                if vk != k:
                    continue
                if kind == "shift":
                    c[ci] = cv
                    self.c_shift += cv * self.shift[ci]
                elif kind == "mirror":
                    c[ci] = -cv
                    self.c_shift += cv * self.shift[ci]
                elif kind == "pos":
                    c[ci] = cv
                else:
                    c[ci] = -cv
        self.c = c
        self.ub = np.array(ubs)

    def col_bounds(self, overrides: dict[str, tuple[float, float]] | None):
        """Column upper bounds (shifted space) plus per-column lower shifts
        after applying {var: (lb, ub)} overrides."""
        ub = self.ub.copy()
        shift = list(self.shift)
        extra_b = None
        if overrides:
            extra_b = np.zeros(self.m)
            for vn, (lo, hi) in overrides.items():
                k = self.var_names.index(vn)
                for ci, (vk, kind) in enumerate(self.cols):
                    if vk != k:
                        continue
                    if kind != "shift":
                        raise NumericalFailure(
                            f"bound override on non-shifted variable {vn!r}")
                    # re-shift the column to the new lower bound
                    delta = lo - shift[ci]
                    extra_b -= self.A[:, ci] * delta
                    shift[ci] = lo
                    ub[ci] = hi - lo
        return ub, shift, extra_b


class _SingularBasis(Exception):
    pass


def _simplex_arrays(A, b, ub, c, tol_feas, tol_opt, refactor_every=150):
    """Dense revised simplex with bounds on min c.x, A x = b, 0 <= x <= ub.

    Slacks are provided by the caller; one artificial per row forms the
    phase-1 basis. An explicit basis inverse is maintained by eta updates
    and refactorized periodically, after small-pivot updates, and before
    every termination claim. A numerically singular basis restarts the whole
    solve under a stricter refactorization regime."""
    total_iters = 0
    for attempt, period in enumerate((refactor_every, 25, 5)):
        try:
            st, x, iters, y = _simplex_once(A, b, ub.copy(), c, tol_feas,
                                            tol_opt, period,
                                            bland_all=(attempt == 2))
            return st, x, total_iters + iters, y
        except _SingularBasis as e:
            total_iters += getattr(e, "iters", 0)
            continue
    raise NumericalFailure("singular basis persisted across restarts")


def _simplex_once(A, b, ub, c, tol_feas, tol_opt, refactor_every, bland_all):
    m, ntot = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    A0 = np.hstack([A * sign.reshape(-1, 1), np.eye(m)])
    b0 = np.abs(b).astype(float)
    art0 = ntot
    N = ntot + m
    ubx = np.concatenate([ub, np.zeros(m)])      # artificials live in [0, inf)
    ubx[art0:] = INF
    basis = np.arange(art0, art0 + m)
    at_upper = np.zeros(N, bool)
    Binv = np.eye(m)
    iters = 0

    def nonbasic_rhs():
        rhs = b0.copy()
        for j in np.where(at_upper)[0]:
            rhs = rhs - A0[:, j] * ubx[j]
        return rhs

    def refactor():
        nonlocal Binv
        B = A0[:, basis]
        try:
            Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            err = _SingularBasis()
            err.iters = iters
            raise err from None
        return Binv @ nonbasic_rhs()

    beta = b0.copy()

    def run(cost, allow):
        nonlocal iters, beta, Binv
        stall = 0
        bland = bland_all
        best_obj = math.inf
        since_refactor = 0
        retry_refactors = 0
        ztol = 1e-7
        maxiter = 60000 + 300 * (m + N)
        while True:
            iters += 1
            since_refactor += 1
            if iters > maxiter:
                raise NumericalFailure("simplex iteration limit hit")
            if since_refactor >= refactor_every:
                beta = refactor()
                since_refactor = 0
            y = cost[basis] @ Binv
            red = cost - y @ A0
            in_basis = np.zeros(N, bool)
            in_basis[basis] = True
            elig = (~in_basis) & allow & (((~at_upper) & (red < -tol_opt))
                                          | (at_upper & (red > tol_opt)))
            cand = np.where(elig)[0]
            if cand.size == 0:
                # verify the claim against a fresh factorization
                if since_refactor > 0:
                    beta = refactor()
                    since_refactor = 0
                    y = cost[basis] @ Binv
                    red = cost - y @ A0
                    elig = (~in_basis) & allow & (((~at_upper) & (red < -tol_opt))
                                                  | (at_upper & (red > tol_opt)))
                    cand = np.where(elig)[0]
                if cand.size == 0:
                    return "optimal"
            if bland:
                e = int(cand[0])
            else:
                e = int(cand[np.argmax(np.abs(red[cand]))])
            down = bool(at_upper[e])
            d = Binv @ A0[:, e]
            col = -d if down else d              # change of basics per unit step
            limit = ubx[e]                       # step of a pure bound flip
            # two-pass ratio test: tightest step first, then among the rows
            # within tolerance prefer the largest pivot magnitude (Bland mode:
            # the smallest basis index)
            theta = INF
            for i in range(m):
                ci = col[i]
                if ci > ztol:
                    theta = min(theta, max(beta[i], 0.0) / ci)
                elif ci < -ztol and ubx[basis[i]] < INF:
                    theta = min(theta, max(ubx[basis[i]] - beta[i], 0.0) / (-ci))
            if theta == INF and limit == INF:
                return "unbounded"
            if limit <= theta:
                # bound flip without basis change
                beta = beta - col * limit
                at_upper[e] = not at_upper[e]
                retry_refactors = 0
            else:
                best = None
                for i in range(m):
                    ci = col[i]
                    if ci > ztol:
                        r, toup = max(beta[i], 0.0) / ci, False
                    elif ci < -ztol and ubx[basis[i]] < INF:
                        r, toup = max(ubx[basis[i]] - beta[i], 0.0) / (-ci), True
                    else:
                        continue
                    if r <= theta + 1e-9:
                        key = (basis[i],) if bland else (-abs(ci), basis[i])
                        if best is None or key < best[0]:
                            best = (key, i, toup)
                leave, leave_to_upper = best[1], best[2]
                if abs(d[leave]) < 1e-6 and retry_refactors < 5:
                    # marginal pivot: never trust it from a stale inverse
                    beta = refactor()
                    since_refactor = 0
                    retry_refactors += 1
                    continue
                retry_refactors = 0
                lv = basis[leave]
                beta = beta - col * theta
                beta[leave] = ubx[e] - theta if down else theta
                erow = Binv[leave] / d[leave]
                dd = d.copy()
                dd[leave] = 0.0
                Binv = Binv - np.outer(dd / d[leave], Binv[leave])
                Binv[leave] = erow
                basis[leave] = e
                at_upper[e] = False
                at_upper[lv] = leave_to_upper
                if abs(d[leave]) < 1e-3:
                    # small pivots poison the eta sequence; re-invert promptly
                    since_refactor = refactor_every
            obj = float(cost[basis] @ beta)
            if obj < best_obj - 1e-10 * (1.0 + abs(best_obj)):
                stall = 0
                bland = False
                best_obj = obj
            else:
                stall += 1
                if stall > 120:
                    bland = True

    cost1 = np.zeros(N)
    cost1[art0:] = 1.0
    allow = np.ones(N, bool)
    st = run(cost1, allow)
    beta = refactor()
    art_val = float(sum(max(beta[i], 0.0) for i in range(m) if basis[i] >= art0))
    scale = 1.0 + float(np.abs(b).max() if m else 0.0)
    if st != "optimal" or art_val > tol_feas * scale * 10:
        return "infeasible", None, iters, None
    allow[art0:] = False
    ubx[art0:] = 0.0
    cost2 = np.zeros(N)
    cost2[:ntot] = c
    st = run(cost2, allow)
    if st == "unbounded":
        return "unbounded", None, iters, None
    beta = refactor()
    x = np.zeros(N)
    sel = at_upper & (ubx < INF)
    x[sel] = ubx[sel]
    x[basis] = beta
    y = (cost2[basis] @ Binv) * sign
    return "optimal", x[:ntot], iters, y


def solve_lp(model: LinearModel, config: SolverConfig | None = None,
             bound_overrides: dict | None = None,
             _sf: _StandardForm | None = None) -> SolveResult:
    """Solve the LP (binaries relaxed to their bounds)."""
    config = config or SolverConfig()
    t0 = time.time()
    sf = _sf if _sf is not None else _StandardForm(model)
    ub, shift, extra_b = sf.col_bounds(bound_overrides)
    ns, m = sf.ns, sf.m
    b = sf.b + (extra_b if extra_b is not None else 0.0)
    # slacks on inequality rows
    ineq = np.where(~sf.is_eq)[0]
    S = np.zeros((m, len(ineq)))
    for k, i in enumerate(ineq):
        S[i, k] = 1.0
    A = np.hstack([sf.A, S])
    ubx = np.concatenate([ub, np.full(len(ineq), INF)])
    c = np.concatenate([sf.c, np.zeros(len(ineq))])

    status, x, iters, y = _simplex_arrays(A, b.copy(), ubx, c,
                                          config.tol_feas, config.tol_opt)
    res = SolveResult(status={"optimal": "Optimal", "infeasible": "Infeasible",
                              "unbounded": "Unbounded"}[status],
                      iterations=iters, wall_time=time.time() - t0)
    if status != "optimal":
        return res
    primal = {}
    for ci, (vk, kind) in enumerate(sf.cols):
        name = sf.var_names[vk]
        if kind == "shift":
            primal[name] = float(x[ci] + shift[ci])
        elif kind == "mirror":
            primal[name] = float(shift[ci] - x[ci])
        elif kind == "pos":
            primal[name] = primal.get(name, 0.0) + float(x[ci])
        else:
            primal[name] = primal.get(name, 0.0) - float(x[ci])
    obj = sum(model.objective.get(n, 0.0) * v for n, v in primal.items())
    res.objective = float(obj)
    res.primal = primal
    res.duals = {con.name: float(y[i] * sf.row_sign[i])
                 for i, con in enumerate(model.constraints)}
    _check_feasible(model, primal, config, bound_overrides)
    return res


def _check_feasible(model, primal, config, overrides=None):
    rhs_scale = 1.0 + max((abs(c.rhs) for c in model.constraints), default=0.0)
    tol = config.tol_feas * rhs_scale * 100
    for con in model.constraints:
        lhs = sum(c * primal[v] for v, c in con.coeffs.items())
        bad = ((con.sense == "<=" and lhs > con.rhs + tol)
               or (con.sense == ">=" and lhs < con.rhs - tol)
               or (con.sense == "=" and abs(lhs - con.rhs) > tol))
        if bad:
            raise NumericalFailure(
                f"row {con.name!r} violated by {lhs - con.rhs:.3e}")
    for v in model.vars:
        lo, hi = v.lb, v.ub
        if overrides and v.name in overrides:
            lo, hi = overrides[v.name]
        x = primal[v.name]
        if x < lo - tol or x > hi + tol:
            raise NumericalFailure(f"variable {v.name!r} out of bounds")


# ---------------------------------------------------------------------------
# MILP: branch and bound on binaries
# ---------------------------------------------------------------------------

def solve_milp(model: LinearModel, config: SolverConfig | None = None) -> SolveResult:
    """Best-bound branch and bound; branching on the most fractional binary
    (ties by name order). General integers are not supported."""
    config = config or SolverConfig()
    t0 = time.time()
    binaries = sorted(model.binary_names)
    if not binaries:
        res = solve_lp(model, config)
        res.dual_bound = res.objective
        res.gap = 0.0 if res.status == "Optimal" else None
        return res
    sf = _StandardForm(model)

    def node_lp(fixes):
        ov = {n: (float(v), float(v)) for n, v in fixes.items()}
        return solve_lp(model, config, bound_overrides=ov, _sf=sf)

    incumbent = None
    incumbent_obj = math.inf
    counter = 0
    heap = []
    nodes = 0
    total_iters = 0
    status = "Optimal"

    root = node_lp({})
    total_iters += root.iterations
    if root.status == "Infeasible":
        return SolveResult("Infeasible", nodes=1, iterations=total_iters,
                           wall_time=time.time() - t0)
    if root.status == "Unbounded":
        return SolveResult("Unbounded", nodes=1, iterations=total_iters,
                           wall_time=time.time() - t0)
    heapq.heappush(heap, (root.objective, counter, {}, root))
    counter += 1

    def frac_var(primal):
        best, bestf = None, config.tol_int
        for nme in binaries:
            f = abs(primal[nme] - round(primal[nme]))
            if f > bestf + 1e-15:
                best, bestf = nme, f
        return best

    hit_limit = False
    while heap:
        if config.time_limit is not None and time.time() - t0 > config.time_limit:
            hit_limit = True
            break
        if config.node_limit is not None and nodes >= config.node_limit:
            hit_limit = True
            break
        bound, _, fixes, res = heapq.heappop(heap)
        if bound >= incumbent_obj - 1e-9:
            continue
        nodes += 1
        branch = frac_var(res.primal)
        if branch is None:
            # integral: round the binaries exactly and accept
            if res.objective < incumbent_obj - 1e-9:
                incumbent_obj = res.objective
                incumbent = dict(res.primal)
                for nme in binaries:
                    incumbent[nme] = float(round(incumbent[nme]))
            continue
        for val in (0, 1):
            child_fixes = dict(fixes)
            child_fixes[branch] = val
            child = node_lp(child_fixes)
            total_iters += child.iterations
            if child.status != "Optimal":
                continue
            if child.objective < incumbent_obj - 1e-9:
                heapq.heappush(heap, (child.objective, counter, child_fixes, child))
                counter += 1

    dual_bound = incumbent_obj
    if heap:
        dual_bound = min(dual_bound, min(h[0] for h in heap))
    wall = time.time() - t0
    if incumbent is None:
        if hit_limit:
            return SolveResult("Limit", dual_bound=dual_bound if heap else None,
                               nodes=nodes, iterations=total_iters, wall_time=wall)
        return SolveResult("Infeasible", nodes=nodes, iterations=total_iters,
                           wall_time=wall)
    gap = (incumbent_obj - dual_bound) / max(1e-10, abs(incumbent_obj))
    return SolveResult("Limit" if hit_limit else "Optimal",
                       objective=incumbent_obj, primal=incumbent,
                       dual_bound=dual_bound, gap=gap, nodes=nodes,
                       iterations=total_iters, wall_time=wall)


# ---------------------------------------------------------------------------
# MPS / LP text exchange
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def export_mps(model: LinearModel, path: str) -> None:
    """Free-format MPS with INTORG/INTEND markers; rows and columns sorted by
    name so output is byte-stable."""
    lines = [f"NAME {model.name}", "ROWS", " N OBJ"]
    rows = sorted(model.constraints, key=lambda c: c.name)
    sense_tag = {"<=": "L", ">=": "G", "=": "E"}
    for con in rows:
        lines.append(f" {sense_tag[con.sense]} {con.name}")
    lines.append("COLUMNS")
    by_col: dict[str, list[tuple[str, float]]] = {v.name: [] for v in model.vars}
    for con in rows:
        for vn, c in sorted(con.coeffs.items()):
            by_col[vn].append((con.name, c))
    for vn, c in model.objective.items():
        by_col[vn].append(("OBJ", c))
    in_int = False
    marker = 0
    for v in sorted(model.vars, key=lambda v: v.name):
        if v.is_binary != in_int:
            tag = "INTORG" if v.is_binary else "INTEND"
            lines.append(f"    MARKER{marker:04d} 'MARKER' '{tag}'")
            marker += 1
            in_int = v.is_binary
        ent = sorted(by_col[v.name])
        if not ent:
            ent = [("OBJ", 0.0)]
        for rn, c in ent:
            lines.append(f"    {v.name} {rn} {_fmt(c)}")
    if in_int:
        lines.append(f"    MARKER{marker:04d} 'MARKER' 'INTEND'")
    lines.append("RHS")
    for con in rows:
        if con.rhs != 0.0:
            lines.append(f"    RHS {con.name} {_fmt(con.rhs)}")
    lines.append("BOUNDS")
    for v in sorted(model.vars, key=lambda v: v.name):
        if v.is_binary:
            lines.append(f" BV BND {v.name}")
            continue
        if v.lb == v.ub:
            lines.append(f" FX BND {v.name} {_fmt(v.lb)}")
            continue
        if v.lb == -INF:
            lines.append(f" MI BND {v.name}")
        elif v.lb != 0.0:
            lines.append(f" LO BND {v.name} {_fmt(v.lb)}")
        if v.ub < INF:
            lines.append(f" UP BND {v.name} {_fmt(v.ub)}")
    lines.append("ENDATA")
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as e:
        raise IoError(str(e)) from e


def read_mps(path: str) -> LinearModel:
    """Read the free-format MPS subset written by export_mps."""
    try:
        with open(path) as fh:
            raw = fh.read().splitlines()
    except OSError as e:
        raise IoError(str(e)) from e
    model = LinearModel()
    section = None
    senses: dict[str, str] = {}
    row_order: list[str] = []
    col_entries: dict[str, list[tuple[str, float]]] = {}
    col_order: list[str] = []
    integrality: dict[str, bool] = {}
    rhs: dict[str, float] = {}
    bounds: dict[str, list[tuple[str, float]]] = {}
    in_int = False
    for line in raw:
        s = line.strip()
        if not s or s.startswith("*"):
            continue
        head = s.split()[0].upper()
        is_header = not line[0].isspace() and head in (
            "NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA", "RANGES")
        if is_header:
            if head == "NAME":
                parts = s.split()
                model.name = parts[1] if len(parts) > 1 else "model"
            section = head
            if head == "RANGES":
                raise IoError("RANGES section not supported")
            continue
        parts = s.split()
        if section == "ROWS":
            tag, name = parts[0].upper(), parts[1]
            if tag == "N":
                continue
            senses[name] = {"L": "<=", "G": ">=", "E": "="}[tag]
            row_order.append(name)
        elif section == "COLUMNS":
            if len(parts) >= 3 and parts[1].strip("'").upper() == "MARKER":
                in_int = parts[2].strip("'").upper() == "INTORG"
                continue
            cn = parts[0]
            if cn not in col_entries:
                col_entries[cn] = []
                col_order.append(cn)
                integrality[cn] = in_int
            for k in range(1, len(parts) - 1, 2):
                col_entries[cn].append((parts[k], float(parts[k + 1])))
        elif section == "RHS":
            for k in range(1, len(parts) - 1, 2):
                rhs[parts[k]] = float(parts[k + 1])
        elif section == "BOUNDS":
            tag, vn = parts[0].upper(), parts[2]
            val = float(parts[3]) if len(parts) > 3 else 0.0
            bounds.setdefault(vn, []).append((tag, val))
    for cn in col_order:
        lb, ub, binary = 0.0, INF, integrality[cn]
        for tag, val in bounds.get(cn, []):
            if tag == "UP":
                ub = val
            elif tag == "LO":
                lb = val
            elif tag == "FX":
                lb = ub = val
            elif tag == "MI":
                lb = -INF
            elif tag == "PL":
                ub = INF
            elif tag == "BV":
                binary, lb, ub = True, 0.0, 1.0
        model.add_var(cn, lb, ub, binary)
    obj = {}
    conrows: dict[str, dict[str, float]] = {rn: {} for rn in row_order}
    for cn in col_order:
        for rn, c in col_entries[cn]:
            if rn == "OBJ":
                if c != 0.0:
                    obj[cn] = obj.get(cn, 0.0) + c
            else:
                conrows[rn][cn] = conrows[rn].get(cn, 0.0) + c
    for rn in row_order:
        model.add_constraint(rn, conrows[rn], senses[rn], rhs.get(rn, 0.0))
    model.set_objective(obj)
    return model


def export_lp_text(model: LinearModel, path: str) -> None:
    """CPLEX-style LP text (documented in the README); write-only."""
    def expr(coeffs):
        parts = []
        for vn, c in sorted(coeffs.items()):
            sgn = "+" if c >= 0 else "-"
            parts.append(f"{sgn} {_fmt(abs(c))} {vn}")
        return " ".join(parts) if parts else "0 ZERO_DUMMY"

    lines = ["Minimize", f" obj: {expr(model.objective)}", "Subject To"]
    for con in model.constraints:
        lines.append(f" {con.name}: {expr(con.coeffs)} {con.sense} {_fmt(con.rhs)}")
    lines.append("Bounds")
    for v in model.vars:
        lo = "-inf" if v.lb == -INF else _fmt(v.lb)
        hi = "+inf" if v.ub == INF else _fmt(v.ub)
        lines.append(f" {lo} <= {v.name} <= {hi}")
    bins = model.binary_names
    if bins:
        lines.append("Binaries")
        lines.append(" " + " ".join(bins))
    lines.append("End")
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as e:
        raise IoError(str(e)) from e
