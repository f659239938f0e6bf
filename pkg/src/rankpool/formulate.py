"""LP/MILP formulations of the generalized pooling problem.

Source-based, terminal-based, and source-terminal flow systems; hull blocks
via the compact extended formulations (ratio variables are the pq/tp
proportions); discretization relaxations M1-M3 and restrictions G1-G2 per
side. Variable naming is deterministic and normative for export diffs:

    f[i,j]  xs[s][i,j]  xt[t][i,j]  xst[s,t][i,j]
    q[i][s]  qt[j][t]  t[i][j]  tt[j][i]  tst[i,j][t]  qst[i,j][s,t]

All models are minimization over total arc cost; ghost flows carry no cost.
"""

from __future__ import annotations

from .linmodel import INF, LinearModel
from .pooling import (GhostBounds, PoolingInstance, ReachSets,
                      compute_reach, default_ghost_bounds)
from .rank1hull import RowColBounds
from . import discretize as disc

__all__ = ["FORMULATION_TAGS", "SizeGuardExceeded", "normalize_tag",
           "build_flow_source", "build_flow_terminal",
           "build_F1S", "build_F2S", "build_F1T", "build_F2T",
           "build_intersection", "build_F1ST", "build_M", "build_G",
           "build_rowplus_hull_lp", "build_formulation", "pool_matrix_source"]

LIGHT_TAGS = ("F1S", "F2S", "F1T", "F2T")
MEDIUM_TAGS = ("F1S_F1T", "F2S_F1T", "F1S_F2T", "F2S_F2T")
M_TAGS = ("M1S", "M2S", "M3S", "M1T", "M2T", "M3T")
G_TAGS = ("G1S", "G2S", "G1T", "G2T")
FORMULATION_TAGS = LIGHT_TAGS + MEDIUM_TAGS + ("F1ST",) + M_TAGS + G_TAGS


class SizeGuardExceeded(Exception):
    pass


def normalize_tag(tag: str) -> str:
    t = tag.replace("∩", "_").replace("&", "_").upper()
    if t not in FORMULATION_TAGS:
        raise ValueError(f"unknown formulation tag {tag!r}")
    return t


class _Ctx:
    def __init__(self, inst: PoolingInstance):
        self.inst = inst
        self.reach: ReachSets = compute_reach(inst)
        self.ghosts: GhostBounds = default_ghost_bounds(inst, self.reach)

    def src_rows(self, i: str) -> list[str]:
        return self.reach.S_i[i]

    def out_cols(self, i: str) -> list[str]:
        return sorted(self.reach.N_plus[i])

    def in_nodes(self, j: str) -> list[str]:
        return sorted(self.reach.N_minus[j])

    def term_cols(self, j: str) -> list[str]:
        return self.reach.T_i[j]


def _fname(i, j):
    return f"f[{i},{j}]"


def _xs(s, i, j):
    return f"xs[{s}][{i},{j}]"


def _xt(t, i, j):
    return f"xt[{t}][{i},{j}]"


def _xst(s, t, i, j):
    return f"xst[{s},{t}][{i},{j}]"


# ---------------------------------------------------------------------------
# flow systems
# ---------------------------------------------------------------------------

def _add_f_vars(model, ctx, side):
    inst = ctx.inst
    for (i, j) in inst.arc_list():
        if not model.has_var(_fname(i, j)):
            rec = inst.arcs[(i, j)]
            model.add_var(_fname(i, j), rec.get("l", 0.0), rec["u"])
    if side in ("S", "both"):
        for i in inst.I:
            for s in ctx.src_rows(i):
                if (s, i) not in inst.arcs and not model.has_var(_fname(s, i)):
                    lo, hi = ctx.ghosts.source_side[(s, i)]
                    model.add_var(_fname(s, i), lo, hi)
    if side in ("T", "both"):
        for j in inst.I:
            for t in ctx.term_cols(j):
                if (j, t) not in inst.arcs and not model.has_var(_fname(j, t)):
                    lo, hi = ctx.ghosts.terminal_side[(j, t)]
                    model.add_var(_fname(j, t), lo, hi)


def _add_node_capacity(model, ctx):
    inst = ctx.inst
    for n in inst.I + inst.T:
        ins = ctx.reach.N_minus[n]
        if ins or inst.node_bounds(n)[0] > 0:
            L, U = inst.node_bounds(n)
            model.add_range(f"nodecap[{n}]", {_fname(i, n): 1.0 for i in ins}, L, U)
    for s in inst.S:
        outs = ctx.reach.N_plus[s]
        if outs or inst.node_bounds(s)[0] > 0:
            L, U = inst.node_bounds(s)
            model.add_range(f"nodecap[{s}]", {_fname(s, j): 1.0 for j in outs}, L, U)


def _set_objective(model, ctx):
    inst = ctx.inst
    model.set_objective({_fname(i, j): inst.arc_cost(i, j)
                         for (i, j) in inst.arc_list()})


def build_flow_source(inst: PoolingInstance, ctx: _Ctx | None = None,
                      model: LinearModel | None = None) -> LinearModel:
    """Source-decomposed flow system: node/arc capacities (ghost pairs
    included), per-(pool, source) conservation, definitional rows tying the
    decomposition to f, and terminal specification windows."""
    ctx = ctx or _Ctx(inst)
    model = model or LinearModel("flowS")
    _add_f_vars(model, ctx, "S")
    _add_node_capacity(model, ctx)
    for (i, j) in inst.arc_list():
        for s in ctx.src_rows(i):
            model.add_var(_xs(s, i, j), 0.0, inst.arcs[(i, j)]["u"])
    for i in inst.I:
        for s in ctx.src_rows(i):
            cc = {}
            for jj in ctx.in_nodes(i):
                if s in ctx.src_rows(jj):
                    cc[_xs(s, jj, i)] = 1.0
            for j in ctx.out_cols(i):
                cc[_xs(s, i, j)] = cc.get(_xs(s, i, j), 0.0) - 1.0
            model.add_constraint(f"cons[{i}][{s}]", cc, "=", 0.0)
    for (i, j) in inst.arc_list():
        cc = {_xs(s, i, j): 1.0 for s in ctx.src_rows(i)}
        cc[_fname(i, j)] = -1.0
        model.add_constraint(f"fdef[{i},{j}]", cc, "=", 0.0)
    for i in inst.I:
        for s in ctx.src_rows(i):
            cc = {_xs(s, i, j): 1.0 for j in ctx.out_cols(i)}
            cc[_fname(s, i)] = cc.get(_fname(s, i), 0.0) - 1.0
            model.add_constraint(f"gdef[{s}][{i}]", cc, "=", 0.0)
    for t in inst.T:
        ins = ctx.in_nodes(t)
        for k in inst.spec_keys:
            mu_lo = inst.terminals[t]["mu_lo"][k]
            mu_hi = inst.terminals[t]["mu_hi"][k]
            for tagname, mu, sense in ((f"spec[{t}][{k}]_lo", mu_lo, ">="),
                                       (f"spec[{t}][{k}]_hi", mu_hi, "<=")):
                cc = {}
                for j in ins:
                    for s in ctx.src_rows(j):
                        lam = inst.sources[s]["lambda"][k]
                        cc[_xs(s, j, t)] = cc.get(_xs(s, j, t), 0.0) + lam
                    cc[_fname(j, t)] = cc.get(_fname(j, t), 0.0) - mu
                model.add_constraint(tagname, cc, sense, 0.0)
    _set_objective(model, ctx)
    return model


def build_flow_terminal(inst: PoolingInstance, ctx: _Ctx | None = None,
                        model: LinearModel | None = None) -> LinearModel:
    """Terminal-decomposed mirror of build_flow_source."""
    ctx = ctx or _Ctx(inst)
    model = model or LinearModel("flowT")
    _add_f_vars(model, ctx, "T")
    if not any(c.name.startswith("nodecap[") for c in model.constraints):
        _add_node_capacity(model, ctx)
    for (i, j) in inst.arc_list():
        for t in ctx.term_cols(j):
            model.add_var(_xt(t, i, j), 0.0, inst.arcs[(i, j)]["u"])
    for j in inst.I:
        for t in ctx.term_cols(j):
            cc = {}
            for i in ctx.in_nodes(j):
                cc[_xt(t, i, j)] = 1.0
            for jj in ctx.out_cols(j):
                if t in ctx.term_cols(jj):
                    cc[_xt(t, j, jj)] = cc.get(_xt(t, j, jj), 0.0) - 1.0
            model.add_constraint(f"cons_t[{j}][{t}]", cc, "=", 0.0)
    for (i, j) in inst.arc_list():
        cc = {_xt(t, i, j): 1.0 for t in ctx.term_cols(j)}
        cc[_fname(i, j)] = -1.0
        model.add_constraint(f"fdef_t[{i},{j}]", cc, "=", 0.0)
    for j in inst.I:
        for t in ctx.term_cols(j):
            cc = {_xt(t, i, j): 1.0 for i in ctx.in_nodes(j)}
            cc[_fname(j, t)] = cc.get(_fname(j, t), 0.0) - 1.0
            model.add_constraint(f"gdef_t[{j}][{t}]", cc, "=", 0.0)
    for t in inst.T:
        for k in inst.spec_keys:
            mu_lo = inst.terminals[t]["mu_lo"][k]
            mu_hi = inst.terminals[t]["mu_hi"][k]
            for tagname, mu, sense in ((f"spec_t[{t}][{k}]_lo", mu_lo, ">="),
                                       (f"spec_t[{t}][{k}]_hi", mu_hi, "<=")):
                cc = {}
                for (s, j) in inst.arc_list():
                    if s in inst.sources and t in ctx.term_cols(j):
                        lam = inst.sources[s]["lambda"][k]
                        cc[_xt(t, s, j)] = cc.get(_xt(t, s, j), 0.0) + lam
                for j in ctx.in_nodes(t):
                    cc[_fname(j, t)] = cc.get(_fname(j, t), 0.0) - mu
                model.add_constraint(tagname, cc, sense, 0.0)
    _set_objective(model, ctx)
    return model


# ---------------------------------------------------------------------------
# hull blocks (compact extended formulations, float rows)
# ---------------------------------------------------------------------------

def _ext_block(model, prefix, ratio_names, w_matrix, per_entry_bounds,
               agg, orientation):
    """Shared emitter for the row+/col+ extended-formulation blocks.

    orientation 'row': ratio variable per column, per-entry bounds indexed by
    rows; 'col': ratio per row, bounds indexed by columns. w_matrix is a
    rows x cols matrix of existing variable names."""
    nrows = len(w_matrix)
    ncols = len(w_matrix[0]) if nrows else 0
    for rn in ratio_names:
        model.add_var(rn, 0.0, 1.0)
    model.add_constraint(f"{prefix}_sum", {rn: 1.0 for rn in ratio_names}, "=", 1.0)
    L, U = agg
    if orientation == "row":
        for jc in range(ncols):
            rn = ratio_names[jc]
            for ir in range(nrows):
                lo, hi = per_entry_bounds[ir]
                w = w_matrix[ir][jc]
                if lo > 0:
                    model.add_constraint(f"{prefix}_lo[{w}]", {w: 1.0, rn: -lo}, ">=", 0.0)
                model.add_constraint(f"{prefix}_hi[{w}]", {w: 1.0, rn: -hi}, "<=", 0.0)
            colsum = {w_matrix[ir][jc]: 1.0 for ir in range(nrows)}
            if L > 0:
                cc = dict(colsum)
                cc[rn] = cc.get(rn, 0.0) - L
                model.add_constraint(f"{prefix}_agg_lo[{rn}]", cc, ">=", 0.0)
            cc = dict(colsum)
            cc[rn] = cc.get(rn, 0.0) - U
            model.add_constraint(f"{prefix}_agg_hi[{rn}]", cc, "<=", 0.0)
    else:
        for ir in range(nrows):
            rn = ratio_names[ir]
            for jc in range(ncols):
                lo, hi = per_entry_bounds[jc]
                w = w_matrix[ir][jc]
                if lo > 0:
                    model.add_constraint(f"{prefix}_lo[{w}]", {w: 1.0, rn: -lo}, ">=", 0.0)
                model.add_constraint(f"{prefix}_hi[{w}]", {w: 1.0, rn: -hi}, "<=", 0.0)
            rowsum = {w_matrix[ir][jc]: 1.0 for jc in range(ncols)}
            if L > 0:
                cc = dict(rowsum)
                cc[rn] = cc.get(rn, 0.0) - L
                model.add_constraint(f"{prefix}_agg_lo[{rn}]", cc, ">=", 0.0)
            cc = dict(rowsum)
            cc[rn] = cc.get(rn, 0.0) - U
            model.add_constraint(f"{prefix}_agg_hi[{rn}]", cc, "<=", 0.0)


def pool_matrix_source(inst, ctx, i):
    """The decomposed-flow matrix of pool i: rows = sources reaching i,
    cols = out-neighbors; plus row bounds (ghost f_si) and col bounds (arcs)."""
    rows = ctx.src_rows(i)
    cols = ctx.out_cols(i)
    w = [[_xs(s, i, j) for j in cols] for s in rows]
    row_bounds = [ctx.ghosts.source_bound(inst, s, i) for s in rows]
    col_bounds = [(inst.arcs[(i, j)].get("l", 0.0), inst.arcs[(i, j)]["u"])
                  for j in cols]
    return rows, cols, w, row_bounds, col_bounds


def _pool_matrix_terminal(inst, ctx, j):
    rows = ctx.in_nodes(j)
    cols = ctx.term_cols(j)
    w = [[_xt(t, i, j) for t in cols] for i in rows]
    row_bounds = [(inst.arcs[(i, j)].get("l", 0.0), inst.arcs[(i, j)]["u"])
                  for i in rows]
    col_bounds = [ctx.ghosts.terminal_bound(inst, j, t) for t in cols]
    return rows, cols, w, row_bounds, col_bounds


def _add_colplus_S(model, inst, ctx, i):
    rows, cols, w, _, col_bounds = pool_matrix_source(inst, ctx, i)
    agg = inst.node_bounds(i)
    _ext_block(model, f"q[{i}]", [f"q[{i}][{s}]" for s in rows],
               w, col_bounds, agg, "col")


def _add_rowplus_S(model, inst, ctx, i):
    rows, cols, w, row_bounds, _ = pool_matrix_source(inst, ctx, i)
    agg = inst.node_bounds(i)
    _ext_block(model, f"t[{i}]", [f"t[{i}][{j}]" for j in cols],
               w, row_bounds, agg, "row")


def _add_rowplus_T(model, inst, ctx, j):
    rows, cols, w, row_bounds, _ = _pool_matrix_terminal(inst, ctx, j)
    agg = inst.node_bounds(j)
    _ext_block(model, f"qt[{j}]", [f"qt[{j}][{t}]" for t in cols],
               w, row_bounds, agg, "row")


def _add_colplus_T(model, inst, ctx, j):
    rows, cols, w, _, col_bounds = _pool_matrix_terminal(inst, ctx, j)
    agg = inst.node_bounds(j)
    _ext_block(model, f"tt[{j}]", [f"tt[{j}][{i}]" for i in rows],
               w, col_bounds, agg, "col")


def build_F1S(inst, ctx=None) -> LinearModel:
    """Flow system plus the column-wise hull block per pool (q proportions);
    equivalent to the McCormick pq relaxation with its implied rows."""
    ctx = ctx or _Ctx(inst)
    model = build_flow_source(inst, ctx)
    model.name = "F1S"
    for i in inst.I:
        _add_colplus_S(model, inst, ctx, i)
    return model


def build_F2S(inst, ctx=None) -> LinearModel:
    ctx = ctx or _Ctx(inst)
    model = build_F1S(inst, ctx)
    model.name = "F2S"
    for i in inst.I:
        _add_rowplus_S(model, inst, ctx, i)
    return model


def build_F1T(inst, ctx=None) -> LinearModel:
    ctx = ctx or _Ctx(inst)
    model = build_flow_terminal(inst, ctx)
    model.name = "F1T"
    for j in inst.I:
        _add_rowplus_T(model, inst, ctx, j)
    return model


def build_F2T(inst, ctx=None) -> LinearModel:
    ctx = ctx or _Ctx(inst)
    model = build_F1T(inst, ctx)
    model.name = "F2T"
    for j in inst.I:
        _add_colplus_T(model, inst, ctx, j)
    return model


def build_intersection(inst, tagS: str, tagT: str, ctx=None) -> LinearModel:
    """Both decompositions in one model, coupled only through the shared f
    variables (their definitional rows)."""
    if tagS not in ("F1S", "F2S") or tagT not in ("F1T", "F2T"):
        raise ValueError("intersection needs tagS in {F1S,F2S}, tagT in {F1T,F2T}")
    ctx = ctx or _Ctx(inst)
    model = LinearModel(f"{tagS}_{tagT}")
    _add_f_vars(model, ctx, "both")
    build_flow_source(inst, ctx, model)
    build_flow_terminal(inst, ctx, model)
    for i in inst.I:
        _add_colplus_S(model, inst, ctx, i)
        if tagS == "F2S":
            _add_rowplus_S(model, inst, ctx, i)
        _add_rowplus_T(model, inst, ctx, i)
        if tagT == "F2T":
            _add_colplus_T(model, inst, ctx, i)
    model.name = f"{tagS}_{tagT}"
    return model


def build_F1ST(inst, ctx=None, size_guard: int = 50_000) -> LinearModel:
    """Source-terminal decomposition on top of F1S and F1T: x^{st} variables
    with their conservation/definitional rows, a hull block per arc, and the
    McCormick coupling of the proportion products."""
    ctx = ctx or _Ctx(inst)
    nxst = sum(len(ctx.src_rows(i)) * len(ctx.term_cols(j))
               for (i, j) in inst.arc_list())
    if nxst > size_guard:
        raise SizeGuardExceeded(f"{nxst} x^st variables exceed guard {size_guard}")
    model = LinearModel("F1ST")
    _add_f_vars(model, ctx, "both")
    build_flow_source(inst, ctx, model)
    build_flow_terminal(inst, ctx, model)
    for i in inst.I:
        _add_colplus_S(model, inst, ctx, i)
        _add_rowplus_T(model, inst, ctx, i)

    for (i, j) in inst.arc_list():
        for s in ctx.src_rows(i):
            for t in ctx.term_cols(j):
                model.add_var(_xst(s, t, i, j), 0.0, inst.arcs[(i, j)]["u"])
    # conservation per pool, source, terminal en route
    for i in inst.I:
        for s in ctx.src_rows(i):
            for t in ctx.term_cols(i):
                cc = {}
                for jj in ctx.in_nodes(i):
                    if s in ctx.src_rows(jj):
                        cc[_xst(s, t, jj, i)] = 1.0
                for jj in ctx.out_cols(i):
                    if t in ctx.term_cols(jj):
                        cc[_xst(s, t, i, jj)] = cc.get(_xst(s, t, i, jj), 0.0) - 1.0
                model.add_constraint(f"cons_st[{i}][{s},{t}]", cc, "=", 0.0)
    for (i, j) in inst.arc_list():
        cc = {_xst(s, t, i, j): 1.0
              for s in ctx.src_rows(i) for t in ctx.term_cols(j)}
        cc[_fname(i, j)] = -1.0
        model.add_constraint(f"fdef_st[{i},{j}]", cc, "=", 0.0)
    for i in inst.I:
        for s in ctx.src_rows(i):
            cc = {}
            for j in ctx.out_cols(i):
                for t in ctx.term_cols(j):
                    cc[_xst(s, t, i, j)] = cc.get(_xst(s, t, i, j), 0.0) + 1.0
            cc[_fname(s, i)] = cc.get(_fname(s, i), 0.0) - 1.0
            model.add_constraint(f"gdef_st[{s}][{i}]", cc, "=", 0.0)
    for j in inst.I:
        for t in ctx.term_cols(j):
            cc = {}
            for i in ctx.in_nodes(j):
                for s in ctx.src_rows(i):
                    cc[_xst(s, t, i, j)] = cc.get(_xst(s, t, i, j), 0.0) + 1.0
            cc[_fname(j, t)] = cc.get(_fname(j, t), 0.0) - 1.0
            model.add_constraint(f"gdef_st_t[{j}][{t}]", cc, "=", 0.0)
    for t in inst.T:
        for k in inst.spec_keys:
            mu_lo = inst.terminals[t]["mu_lo"][k]
            mu_hi = inst.terminals[t]["mu_hi"][k]
            for tagname, mu, sense in ((f"spec_st[{t}][{k}]_lo", mu_lo, ">="),
                                       (f"spec_st[{t}][{k}]_hi", mu_hi, "<=")):
                cc = {}
                for (s, j) in inst.arc_list():
                    if s in inst.sources and t in ctx.term_cols(j):
                        lam = inst.sources[s]["lambda"][k]
                        key = _xst(s, t, s, j)
                        cc[key] = cc.get(key, 0.0) + lam
                for j in ctx.in_nodes(t):
                    cc[_fname(j, t)] = cc.get(_fname(j, t), 0.0) - mu
                model.add_constraint(tagname, cc, sense, 0.0)
    # linking to the one-sided decompositions
    for (i, j) in inst.arc_list():
        for s in ctx.src_rows(i):
            cc = {_xst(s, t, i, j): 1.0 for t in ctx.term_cols(j)}
            cc[_xs(s, i, j)] = -1.0
            model.add_constraint(f"link_s[{i},{j}][{s}]", cc, "=", 0.0)
        for t in ctx.term_cols(j):
            cc = {_xst(s, t, i, j): 1.0 for s in ctx.src_rows(i)}
            cc[_xt(t, i, j)] = -1.0
            model.add_constraint(f"link_t[{i},{j}][{t}]", cc, "=", 0.0)
    # hull block per arc on the (source, terminal) matrix
    for (i, j) in inst.arc_list():
        rows = ctx.src_rows(i)
        cols = ctx.term_cols(j)
        w = [[_xst(s, t, i, j) for t in cols] for s in rows]
        if i in inst.pools:
            row_bounds = [ctx.ghosts.source_bound(inst, s, i) for s in rows]
        else:
            row_bounds = [(inst.arcs[(i, j)].get("l", 0.0), inst.arcs[(i, j)]["u"])
                          for s in rows]
        agg = (inst.arcs[(i, j)].get("l", 0.0), inst.arcs[(i, j)]["u"])
        _ext_block(model, f"tst[{i},{j}]", [f"tst[{i},{j}][{t}]" for t in cols],
                   w, row_bounds, agg, "row")
    # McCormick coupling qst = q * qt over [0,1]^2
    for (i, j) in inst.arc_list():
        for s in ctx.src_rows(i):
            for t in ctx.term_cols(j):
                qv = f"q[{i}][{s}]" if i in inst.pools else None
                qtv = f"qt[{j}][{t}]" if j in inst.pools else None
                name = f"qst[{i},{j}][{s},{t}]"
                model.add_var(name, 0.0, 1.0)
                # qst <= q, qst <= qt, qst >= q + qt - 1 (missing factors = 1)
                if qv is not None:
                    model.add_constraint(f"mc1[{name}]", {name: 1.0, qv: -1.0}, "<=", 0.0)
                if qtv is not None:
                    model.add_constraint(f"mc2[{name}]", {name: 1.0, qtv: -1.0}, "<=", 0.0)
                cc = {name: 1.0}
                rhs = -1.0
                if qv is not None:
                    cc[qv] = -1.0
                else:
                    rhs += 1.0
                if qtv is not None:
                    cc[qtv] = -1.0
                else:
                    rhs += 1.0
                model.add_constraint(f"mc3[{name}]", cc, ">=", rhs)
    model.name = "F1ST"
    return model


# ---------------------------------------------------------------------------
# discretizations
# ---------------------------------------------------------------------------

def _pool_rcb(bounds, n2):
    return RowColBounds.make(n2, [b[0] for b in bounds], [b[1] for b in bounds])


def _pool_rcb_agg(bounds, n2, agg):
    return RowColBounds.make(n2, [b[0] for b in bounds], [b[1] for b in bounds],
                             agg_L=agg[0], agg_U=agg[1])


def build_M(inst, variant: int, side: str, H: int, ctx=None) -> LinearModel:
    """Outer-discretization MILP relaxations M1-M3 per side: M1 over F1,
    M2/M3 over F2; M1/M2 discretize the proportion ratios (column-wise
    blocks on the source side, row-wise on the terminal side), M3 the
    per-arc ratios of the opposite orientation."""
    if H < 1:
        raise ValueError("discretization level H must be >= 1")
    if variant not in (1, 2, 3) or side not in ("S", "T"):
        raise ValueError("variant must be 1..3 and side 'S' or 'T'")
    ctx = ctx or _Ctx(inst)
    if side == "S":
        model = build_F1S(inst, ctx) if variant == 1 else build_F2S(inst, ctx)
        for i in inst.I:
            rows, cols, w, row_bounds, col_bounds = pool_matrix_source(inst, ctx, i)
            if variant in (1, 2):
                b = RowColBounds.make(len(rows), [c[0] for c in col_bounds],
                                      [c[1] for c in col_bounds])
                blk = disc.build_outer_col(b, H, w_names=w, tag=i,
                                           row_labels=rows, col_labels=cols)
            else:
                b = RowColBounds.make(len(cols), [r[0] for r in row_bounds],
                                      [r[1] for r in row_bounds])
                blk = disc.build_outer(b, H, w_names=w, tag=i,
                                       row_labels=rows, col_labels=cols)
            blk.add_to(model)
    else:
        model = build_F1T(inst, ctx) if variant == 1 else build_F2T(inst, ctx)
        for j in inst.I:
            rows, cols, w, row_bounds, col_bounds = _pool_matrix_terminal(inst, ctx, j)
            if variant in (1, 2):
                b = RowColBounds.make(len(cols), [r[0] for r in row_bounds],
                                      [r[1] for r in row_bounds])
                blk = disc.build_outer(b, H, w_names=w, tag=j,
                                       row_labels=rows, col_labels=cols)
            else:
                b = RowColBounds.make(len(rows), [c[0] for c in col_bounds],
                                      [c[1] for c in col_bounds])
                blk = disc.build_outer_col(b, H, w_names=w, tag=j,
                                           row_labels=rows, col_labels=cols)
            blk.add_to(model)
    model.name = f"M{variant}{side}(H={H})"
    return model


def build_G(inst, variant: int, side: str, H: int, ctx=None) -> LinearModel:
    """Inner-discretization MILP restrictions G1-G2 per side over the plain
    flow system; every feasible point is pooling-feasible."""
    if H < 1:
        raise ValueError("discretization level H must be >= 1")
    if variant not in (1, 2) or side not in ("S", "T"):
        raise ValueError("variant must be 1..2 and side 'S' or 'T'")
    ctx = ctx or _Ctx(inst)
    if side == "S":
        model = build_flow_source(inst, ctx)
        for i in inst.I:
            rows, cols, w, row_bounds, col_bounds = pool_matrix_source(inst, ctx, i)
            agg = inst.node_bounds(i)
            if variant == 1:
                b = _pool_rcb_agg(col_bounds, len(rows), agg)
                blk = disc.build_inner_col(b, H, w_names=w, tag=i,
                                           row_labels=rows, col_labels=cols)
            else:
                b = _pool_rcb_agg(row_bounds, len(cols), agg)
                blk = disc.build_inner(b, H, w_names=w, tag=i,
                                       row_labels=rows, col_labels=cols)
            blk.add_to(model)
    else:
        model = build_flow_terminal(inst, ctx)
        for j in inst.I:
            rows, cols, w, row_bounds, col_bounds = _pool_matrix_terminal(inst, ctx, j)
            agg = inst.node_bounds(j)
            if variant == 1:
                b = _pool_rcb_agg(row_bounds, len(cols), agg)
                blk = disc.build_inner(b, H, w_names=w, tag=j,
                                       row_labels=rows, col_labels=cols)
            else:
                b = _pool_rcb_agg(col_bounds, len(rows), agg)
                blk = disc.build_inner_col(b, H, w_names=w, tag=j,
                                           row_labels=rows, col_labels=cols)
            blk.add_to(model)
    model.name = f"G{variant}{side}(H={H})"
    return model


def build_rowplus_hull_lp(inst, side: str = "S", ctx=None) -> LinearModel:
    """Flow system plus only the row+ hull block per pool: the LP whose value
    the root cutting-plane loop converges to."""
    ctx = ctx or _Ctx(inst)
    if side == "S":
        model = build_flow_source(inst, ctx)
        for i in inst.I:
            _add_rowplus_S(model, inst, ctx, i)
    else:
        model = build_flow_terminal(inst, ctx)
        for j in inst.I:
            _add_rowplus_T(model, inst, ctx, j)
    model.name = f"rowplus_hull_{side}"
    return model


def build_formulation(inst, tag: str, H: int | None = None, ctx=None,
                      size_guard: int = 50_000) -> LinearModel:
    """Dispatch on a formulation tag (intersections written F1S_F1T)."""
    t = normalize_tag(tag)
    needs_h = t.startswith("M") or t.startswith("G")
    if needs_h and (H is None or H < 1):
        raise ValueError(f"tag {t} requires a discretization level H >= 1")
    if t == "F1S":
        return build_F1S(inst, ctx)
    if t == "F2S":
        return build_F2S(inst, ctx)
    if t == "F1T":
        return build_F1T(inst, ctx)
    if t == "F2T":
        return build_F2T(inst, ctx)
    if t == "F1ST":
        return build_F1ST(inst, ctx, size_guard=size_guard)
    if t in MEDIUM_TAGS:
        s, tt = t.split("_")
        return build_intersection(inst, s, tt, ctx)
    if t in M_TAGS:
        return build_M(inst, int(t[1]), t[2], H, ctx)
    return build_G(inst, int(t[1]), t[2], H, ctx)
