"""Root-node cutting-plane driver.

Solves the projected flow LP (no ratio variables), separates the partition
inequality families on every pool's decomposed-flow matrix, adds the most
violated cuts, and repeats. With all families enabled and aggregate bounds
supplied the loop converges to the LP value of the per-pool row+ hull, i.e.
the corresponding extended-formulation LP.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from fractions import Fraction

from .formulate import _Ctx, build_flow_source, build_flow_terminal, \
    build_rowplus_hull_lp, pool_matrix_source, _pool_matrix_terminal
from .linmodel import LinearModel
from .pooling import PoolingInstance
from .rank1hull import (NoLowerBounds, RowColBounds, brute_force_separate,
                        ratio_inequalities_row, separate_row, separate_rowplus)
from .solver import SolverConfig, solve_lp

__all__ = ["CutLoopReport", "run_cut_loop"]

FAMILIES = ("rowconv", "rowplusconv", "ratio")


@dataclass
class CutLoopReport:
    rounds: list[tuple[float, int, float]] = field(default_factory=list)
    final_value: float | None = None
    converged: bool = False
    target_value: float | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("round,value,cuts,max_violation\n")
        for k, (val, ncuts, viol) in enumerate(self.rounds):
            buf.write(f"{k},{float(val)!r},{ncuts},{float(viol)!r}\n")
        return buf.getvalue()


def _pool_data(inst, ctx, base, pool):
    if base == "S":
        rows, cols, w, row_bounds, _ = pool_matrix_source(inst, ctx, pool)
    else:
        rows, cols, w, row_bounds, _ = _pool_matrix_terminal(inst, ctx, pool)
    L, U = inst.node_bounds(pool)
    rcb = RowColBounds.make(len(cols), [b[0] for b in row_bounds],
                            [b[1] for b in row_bounds], agg_L=L, agg_U=U)
    return rows, cols, w, rcb


def run_cut_loop(inst: PoolingInstance, base: str = "S",
                 families=FAMILIES, max_rounds: int = 200,
                 tol_violation: float = 1e-6, per_round_cap: int = 50,
                 config: SolverConfig | None = None,
                 compute_target: bool = True,
                 debug_check: bool = False) -> CutLoopReport:
    if base not in ("S", "T"):
        raise ValueError("base must be 'S' or 'T'")
    families = tuple(families)
    for f in families:
        if f not in FAMILIES:
            raise ValueError(f"unknown family {f!r}")
    config = config or SolverConfig()
    ctx = _Ctx(inst)
    model = (build_flow_source if base == "S" else build_flow_terminal)(inst, ctx)
    model.name = f"cutloop_{base}"

    pool_info = {p: _pool_data(inst, ctx, base, p) for p in inst.I}
    if "ratio" in families:
        for p in inst.I:
            rows, cols, w, rcb = pool_info[p]
            for k, cut in enumerate(ratio_inequalities_row(rcb)):
                cc = {w[i - 1][j - 1]: float(c) for (i, j), c in cut.coeffs}
                model.add_constraint(f"ratio[{p}][{k}]", cc, cut.sense, float(cut.rhs))

    report = CutLoopReport()
    if compute_target:
        tgt = solve_lp(build_rowplus_hull_lp(inst, base, ctx), config)
        report.target_value = tgt.objective if tgt.status == "Optimal" else None

    cut_id = 0
    for rnd in range(max_rounds + 1):
        res = solve_lp(model, config)
        if res.status != "Optimal":
            report.final_value = None
            report.rounds.append((float("nan"), 0, 0.0))
            return report
        if rnd == max_rounds:
            report.rounds.append((res.objective, 0, 0.0))
            report.final_value = res.objective
            report.converged = False
            return report
        found = []
        for p in inst.I:
            rows, cols, w, rcb = pool_info[p]
            W = [[max(res.primal[w[i][j]], 0.0) for j in range(len(cols))]
                 for i in range(len(rows))]
            for side in ("upper", "lower"):
                got = None
                plus = "rowplusconv" in families
                try:
                    if plus:
                        got = separate_rowplus(W, rcb, side, exact=False)
                    elif "rowconv" in families:
                        got = separate_row(W, rcb, side, exact=False)
                except NoLowerBounds:
                    got = None
                if debug_check and rcb.n1 <= 4 and rcb.n2 <= 4:
                    bf = brute_force_separate(W, rcb, side,
                                              "rowplusconv" in families)
                    gv = 0.0 if got is None else float(got[1])
                    bv = 0.0 if bf is None else float(bf[1])
                    if abs(gv - bv) > 1e-9:
                        raise AssertionError(
                            f"separation mismatch pool {p} {side}: {gv} vs {bv}")
                if got is not None and float(got[1]) > tol_violation:
                    found.append((float(got[1]), p, got[0]))
        if not found:
            report.rounds.append((res.objective, 0, 0.0))
            report.final_value = res.objective
            report.converged = True
            return report
        found.sort(key=lambda t: (-t[0], t[1]))
        added = 0
        for viol, p, cut in found[:per_round_cap]:
            rows, cols, w, rcb = pool_info[p]
            cc = {w[i - 1][j - 1]: float(c) for (i, j), c in cut.coeffs}
            model.add_constraint(f"cut[{p}][{cut_id}]", cc, cut.sense,
                                 float(cut.rhs))
            cut_id += 1
            added += 1
        report.rounds.append((res.objective, added, found[0][0]))
    return report
