"""Inner and outer MILP approximations of row/column-sum bounded rank-1 sets
by binary expansion of the ratio variables.

Outer (relaxation): t_j = sum_h 2^-h z_jh + gamma_j with gamma_j in
[0, 2^-H]; inner (restriction): t_j = 2^H/(2^H - 1) * sum_h 2^-h z_jh, an
even grid of 2^H values covering [0, 1]. Products with the row sums are
McCormick-linearized through alpha (and beta for the outer remainder term).

The z variables are shared across rows of the matrix (one block per column),
which is the entire point of the construction: the ratio is independent of
the row index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .linmodel import Constraint, LinearModel, Var
from .rank1hull import RowColBounds

__all__ = ["DiscretizationSpec", "DiscretizedBlock",
           "build_outer", "build_inner", "build_outer_col", "build_inner_col"]


@dataclass(frozen=True)
class DiscretizationSpec:
    H: int
    mode: str           # "outer" | "inner"
    orientation: str    # "row" | "col"

    def __post_init__(self):
        if self.H < 1:
            raise ValueError("discretization level H must be >= 1")
        if self.mode not in ("outer", "inner"):
            raise ValueError("mode must be 'outer' or 'inner'")
        if self.orientation not in ("row", "col"):
            raise ValueError("orientation must be 'row' or 'col'")


@dataclass
class DiscretizedBlock:
    spec: DiscretizationSpec
    w_names: list[list[str]]            # matrix of W variable names
    new_vars: list[Var] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    z_names: list[list[str]] = field(default_factory=list)      # [col][h]
    grid_exprs: list[dict] = field(default_factory=list)        # t_j as linear expr

    def add_to(self, model: LinearModel, declare_w: bool = False,
               w_bound: float | None = None) -> None:
        if declare_w:
            for row in self.w_names:
                for n in row:
                    model.add_var(n, 0.0, float("inf") if w_bound is None else w_bound)
        for v in self.new_vars:
            model.add_var(v.name, v.lb, v.ub, v.is_binary)
        for c in self.constraints:
            model.add_constraint(c.name, dict(c.coeffs), c.sense, c.rhs)


def _names(tag: str):
    t = f"[{tag}]" if tag else ""
    return (lambda j, h: f"z{t}[{j},{h}]",
            lambda i, j, h: f"alpha{t}[{i},{j},{h}]",
            lambda i, j: f"beta{t}[{i},{j}]",
            lambda j: f"gamma{t}[{j}]",
            lambda kind, *ix: f"{kind}{t}[{','.join(str(k) for k in ix)}]"
            if ix else f"{kind}{t}")


def build_outer(b: RowColBounds, H: int, w_names=None, tag: str = "",
                row_labels=None, col_labels=None,
                unit_sum: bool = False) -> DiscretizedBlock:
    """Outer approximation block; `unit_sum` optionally adds the implied
    sum-of-ratios = 1 row (off by default to match the set definition)."""
    return _build(b, H, "outer", "row", w_names, tag, row_labels, col_labels,
                  unit_sum, agg=None)


def build_inner(b: RowColBounds, H: int, w_names=None, tag: str = "",
                row_labels=None, col_labels=None,
                unit_sum: bool = True) -> DiscretizedBlock:
    """Inner approximation block; `unit_sum` (default on) forces the grid
    ratios to sum to one, which the restriction needs for rank-1 validity.
    Aggregate bounds in `b`, when present, are emitted as linear rows
    L*t_j <= column sum <= U*t_j with t_j the grid expression."""
    agg = (b.agg_L or Fraction(0), b.agg_U) if b.has_agg else None
    return _build(b, H, "inner", "row", w_names, tag, row_labels, col_labels,
                  unit_sum, agg)


def build_outer_col(b: RowColBounds, H: int, w_names=None, tag: str = "",
                    row_labels=None, col_labels=None,
                    unit_sum: bool = False) -> DiscretizedBlock:
    """Column-oriented outer block: transpose wrapper, one z block per row."""
    return _transposed(build_outer, b, H, w_names, tag, row_labels, col_labels, unit_sum)


def build_inner_col(b: RowColBounds, H: int, w_names=None, tag: str = "",
                    row_labels=None, col_labels=None,
                    unit_sum: bool = True) -> DiscretizedBlock:
    return _transposed(build_inner, b, H, w_names, tag, row_labels, col_labels, unit_sum)


def _transposed(builder, b, H, w_names, tag, row_labels, col_labels, unit_sum):
    nm = w_names if w_names is not None else _default_wnames(
        b.n1 if row_labels is None else len(row_labels),
        b.n2 if col_labels is None else len(col_labels), row_labels, col_labels)
    wt = [list(col) for col in zip(*nm)]
    blk = builder(b, H, w_names=wt, tag=tag,
                  row_labels=col_labels, col_labels=row_labels, unit_sum=unit_sum)
    blk.spec = DiscretizationSpec(H, blk.spec.mode, "col")
    blk.w_names = nm
    return blk


def _default_wnames(n1, n2, row_labels, col_labels):
    rl = row_labels if row_labels is not None else list(range(1, n1 + 1))
    cl = col_labels if col_labels is not None else list(range(1, n2 + 1))
    return [[f"W[{r},{c}]" for c in cl] for r in rl]


def _build(b, H, mode, orientation, w_names, tag, row_labels, col_labels,
           unit_sum, agg):
    if H < 1:
        raise ValueError("discretization level H must be >= 1")
    n1, n2 = b.n1, b.n2
    rl = row_labels if row_labels is not None else list(range(1, n1 + 1))
    cl = col_labels if col_labels is not None else list(range(1, n2 + 1))
    if w_names is None:
        w_names = _default_wnames(n1, n2, rl, cl)
    zn, an, bn, gn, cn = _names(tag)
    spec = DiscretizationSpec(H, mode, orientation)
    blk = DiscretizedBlock(spec, w_names)
    lo = [float(x) for x in b.l]
    up = [float(x) for x in b.u]
    two = [2.0 ** -h for h in range(1, H + 1)]
    eps = 2.0 ** -H
    kappa = 2.0 ** H / (2.0 ** H - 1.0)

    for j, cj in enumerate(cl):
        for h in range(1, H + 1):
            blk.new_vars.append(Var(zn(cj, h), 0.0, 1.0, True))
        if mode == "outer":
            blk.new_vars.append(Var(gn(cj), 0.0, eps))
    blk.z_names = [[zn(cj, h) for h in range(1, H + 1)] for cj in cl]

    for i, ri in enumerate(rl):
        for j, cj in enumerate(cl):
            for h in range(1, H + 1):
                blk.new_vars.append(Var(an(ri, cj, h), 0.0, up[i]))
            if mode == "outer":
                blk.new_vars.append(Var(bn(ri, cj), 0.0, up[i]))

    for i, ri in enumerate(rl):
        rowsum = {w_names[i][jj]: 1.0 for jj in range(n2)}
        # row-sum bounds l_i <= sum_j W_ij <= u_i
        blk.constraints.append(Constraint(cn("rowsum_lo", ri), dict(rowsum), ">=", lo[i]))
        blk.constraints.append(Constraint(cn("rowsum_hi", ri), dict(rowsum), "<=", up[i]))
        for j, cj in enumerate(cl):
            for h in range(1, H + 1):
                a, z = an(ri, cj, h), zn(cj, h)
                blk.constraints.append(Constraint(
                    cn("mccA1", ri, cj, h), {a: 1.0, z: -lo[i]}, ">=", 0.0))
                blk.constraints.append(Constraint(
                    cn("mccA2", ri, cj, h), {a: 1.0, z: -up[i]}, "<=", 0.0))
                c3 = {a: 1.0, z: -up[i]}
                for w, c in rowsum.items():
                    c3[w] = c3.get(w, 0.0) - c
                blk.constraints.append(Constraint(
                    cn("mccA3", ri, cj, h), c3, ">=", -up[i]))
                c4 = {a: 1.0, z: -lo[i]}
                for w, c in rowsum.items():
                    c4[w] = c4.get(w, 0.0) - c
                blk.constraints.append(Constraint(
                    cn("mccA4", ri, cj, h), c4, "<=", -lo[i]))
            if mode == "outer":
                be, g = bn(ri, cj), gn(cj)
                blk.constraints.append(Constraint(
                    cn("mccB1", ri, cj), {be: 1.0, g: -lo[i]}, ">=", 0.0))
                blk.constraints.append(Constraint(
                    cn("mccB2", ri, cj), {be: 1.0, g: -up[i]}, "<=", 0.0))
                c3 = {be: 1.0, g: -up[i]}
                for w, c in rowsum.items():
                    c3[w] = c3.get(w, 0.0) - eps * c
                blk.constraints.append(Constraint(
                    cn("mccB3", ri, cj), c3, ">=", -eps * up[i]))
                c4 = {be: 1.0, g: -lo[i]}
                for w, c in rowsum.items():
                    c4[w] = c4.get(w, 0.0) - eps * c
                blk.constraints.append(Constraint(
                    cn("mccB4", ri, cj), c4, "<=", -eps * lo[i]))
            # linking W_ij to the discretized product terms
            link = {w_names[i][j]: 1.0}
            if mode == "outer":
                for h in range(1, H + 1):
                    link[an(ri, cj, h)] = -two[h - 1]
                link[bn(ri, cj)] = -1.0
            else:
                for h in range(1, H + 1):
                    link[an(ri, cj, h)] = -kappa * two[h - 1]
            blk.constraints.append(Constraint(cn("link", ri, cj), link, "=", 0.0))

    def grid_expr(j, cj):
        expr = {}
        for h in range(1, H + 1):
            expr[zn(cj, h)] = (kappa if mode == "inner" else 1.0) * two[h - 1]
        if mode == "outer":
            expr[gn(cj)] = 1.0
        return expr

    blk.grid_exprs = [grid_expr(j, cj) for j, cj in enumerate(cl)]

    if agg is not None:
        L, U = float(agg[0]), float(agg[1])
        for j, cj in enumerate(cl):
            colsum = {w_names[i][j]: 1.0 for i in range(n1)}
            lo_row = dict(colsum)
            for zv, c in blk.grid_exprs[j].items():
                lo_row[zv] = lo_row.get(zv, 0.0) - L * c
            blk.constraints.append(Constraint(cn("agg_lo", cj), lo_row, ">=", 0.0))
            hi_row = dict(colsum)
            for zv, c in blk.grid_exprs[j].items():
                hi_row[zv] = hi_row.get(zv, 0.0) - U * c
            blk.constraints.append(Constraint(cn("agg_hi", cj), hi_row, "<=", 0.0))

    if unit_sum:
        total = {}
        for expr in blk.grid_exprs:
            for v, c in expr.items():
                total[v] = total.get(v, 0.0) + c
        blk.constraints.append(Constraint(cn("unitsum"), total, "=", 1.0))
    return blk
