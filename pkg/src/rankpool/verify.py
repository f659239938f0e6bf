"""Machine verification of the hull theorems on small instances.

Each suite returns (passed, lines); everything that can be checked in exact
rational arithmetic is. These routines back both the `verify-hull` CLI
command and the acceptance tests.
"""

from __future__ import annotations

import itertools
import random
import time
from fractions import Fraction

from .polyhedra import Polyhedron, contains, fm_project, poly_equal, vertices
from .rank1hull import (MultRank1Data, NoLowerBounds, RowColBounds,
                        brute_force_separate, build_ext_multrank1,
                        build_ext_row, build_ext_rowplus, hull_system_row,
                        separate_row, separate_rowplus, thm4_witness_check,
                        wname)
from . import discretize as disc
from .linmodel import LinearModel
from .solver import SolverConfig, solve_milp

__all__ = ["random_bounds", "hull_equality_suite", "thm1_structure_suite",
           "separation_suite", "discretization_suite", "witness_suite",
           "run_all"]


def random_bounds(rng: random.Random, n1: int, n2: int, style: str,
                  agg: bool) -> RowColBounds:
    """Seeded rational bound vectors; styles steer the lower-bound support
    (empty, full, mixed) and zero-capacity rows."""
    u = []
    for _ in range(n1):
        if style == "zero_u" and len(u) == 0:
            u.append(Fraction(0))
        else:
            u.append(Fraction(rng.randint(1, 8), 4))
    rng.shuffle(u)
    l = []
    for ui in u:
        if style == "no_lower" or ui == 0:
            l.append(Fraction(0))
        elif style == "all_lower":
            l.append(Fraction(rng.randint(1, max(1, int(ui * 4))), 4))
        else:
            l.append(Fraction(rng.randint(0, int(ui * 4)), 4)
                     if rng.random() < 0.6 else Fraction(0))
    if not agg:
        return RowColBounds.make(n2, l, u)
    tot = sum(u, Fraction(0))
    hi = max(2, int(tot * 4))
    U = Fraction(rng.randint(2, hi), 4)
    L = Fraction(rng.randint(0, int(U * 4)), 4) if rng.random() < 0.6 else Fraction(0)
    # normalization clamps U to sum(u); keep L below the clamped value
    L = min(L, U, tot)
    return RowColBounds.make(n2, l, u, agg_L=L, agg_U=U)


def hull_equality_suite(shapes=((2, 2), (2, 3), (3, 2), (3, 3)), trials: int = 20,
                        seed: int = 42):
    """FM-projected extended formulation vs the original-space description,
    exact poly_equal, for the row and row+ sets."""
    rng = random.Random(seed)
    lines = []
    passed = True
    styles = ["no_lower", "all_lower", "zero_u", "mixed", "mixed"]
    t0 = time.time()
    for (n1, n2) in shapes:
        for k in range(trials):
            style = styles[k % len(styles)]
            for agg in (False, True):
                b = random_bounds(rng, n1, n2, style, agg)
                ext = build_ext_rowplus(b) if agg else build_ext_row(b)
                keep = [v for v in ext.vars if v.startswith("W[")]
                proj = fm_project(ext, keep)
                hs = Polyhedron(proj.vars, hull_system_row(b).rows)
                ok = poly_equal(proj, hs, row_cap=4096)
                if not ok:
                    passed = False
                    lines.append(f"FAIL hull_equality ({n1},{n2}) trial {k} "
                                 f"agg={agg} style={style} l={b.l} u={b.u} "
                                 f"L={b.agg_L} U={b.agg_U}")
    lines.append(f"hull_equality: shapes={list(shapes)} trials={trials} "
                 f"row and row+ checked exactly ({time.time() - t0:.1f}s)")
    return passed, lines


def _random_multrank1(rng: random.Random):
    while True:
        n1 = rng.randint(2, 3)
        n2 = rng.randint(2, 3)
        m = rng.randint(1, 3)
        alphas = [[Fraction(rng.randint(-2, 3), 2) for _ in range(n1)]
                  for _ in range(m)]
        # one strictly positive row guarantees the recession condition
        alphas[0] = [Fraction(rng.randint(1, 4), 2) for _ in range(n1)]
        beta = [Fraction(rng.randint(1, 4), 2) for _ in range(n2)]
        b = [Fraction(rng.randint(0, 8), 2) for _ in range(m)]
        try:
            return MultRank1Data.make(alphas, beta, b)
        except Exception:
            continue


def thm1_structure_suite(count: int = 30, seed: int = 7):
    """Every vertex of the projected extended formulation has at most one
    nonzero column and all 2x2 minors exactly zero."""
    rng = random.Random(seed)
    lines = []
    passed = True
    for k in range(count):
        d = _random_multrank1(rng)
        ext = build_ext_multrank1(d)
        keep = [v for v in ext.vars if v.startswith("W[")]
        proj = fm_project(ext, keep)
        vs = vertices(proj, row_cap=4096)
        n1, n2 = d.n1, d.n2
        for p in vs.points:
            W = [[p[i * n2 + j] for j in range(n2)] for i in range(n1)]
            nz_cols = sum(1 for j in range(n2) if any(W[i][j] for i in range(n1)))
            minors_zero = all(
                W[a][c] * W[b][e] - W[a][e] * W[b][c] == 0
                for a in range(n1) for b in range(a + 1, n1)
                for c in range(n2) for e in range(c + 1, n2))
            if nz_cols > 1 or not minors_zero:
                passed = False
                lines.append(f"FAIL thm1_structure case {k}: vertex {p}")
    lines.append(f"thm1_structure: {count} random systems, all vertices rank-1 "
                 "with a single nonzero column")
    return passed, lines


def separation_suite(nmax: int = 4, points: int = 100, seed: int = 3):
    """Greedy separation vs exhaustive partition enumeration, exact rational
    mode, plus the O(n1*n2) comparison-count bound."""
    rng = random.Random(seed)
    lines = []
    passed = True
    checks = 0
    for n1 in range(1, nmax + 1):
        for n2 in range(1, nmax + 1):
            for _ in range(points):
                b = random_bounds(rng, n1, n2, "mixed", rng.random() < 0.5)
                W = [[Fraction(rng.randint(0, 10), 4) for _ in range(n2)]
                     for _ in range(n1)]
                plus = b.has_agg
                for side in ("upper", "lower"):
                    try:
                        if plus:
                            got, ops = separate_rowplus(W, b, side,
                                                        count_comparisons=True)
                        else:
                            got, ops = separate_row(W, b, side,
                                                    count_comparisons=True)
                    except NoLowerBounds:
                        continue
                    if ops > 2 * n1 * n2:
                        passed = False
                        lines.append(f"FAIL separation ops {ops} > 2*{n1}*{n2}")
                    bf = brute_force_separate(W, b, side, plus)
                    gv = None if got is None else got[1]
                    bv = None if bf is None else bf[1]
                    if gv != bv:
                        passed = False
                        lines.append(f"FAIL separation ({n1},{n2}) {side} "
                                     f"plus={plus}: greedy={gv} brute={bv}")
                    checks += 1
    lines.append(f"separation_vs_bruteforce: {checks} exact comparisons, "
                 f"comparison count <= 2*n1*n2 throughout")
    return passed, lines


def _dyadic(rng, den=256):
    return Fraction(rng.randint(0, den), den)


def outer_witness_check(rng: random.Random, H: int) -> bool:
    """Sample a rank-1 member of the row set and extend it constructively to
    an outer-block witness via the truncated binary expansion; verify every
    emitted row exactly (dyadic data is exact in binary64)."""
    n1 = rng.randint(1, 3)
    n2 = rng.randint(1, 3)
    u = [Fraction(rng.randint(1, 8), 4) for _ in range(n1)]
    l = [Fraction(rng.randint(0, int(ui * 4)), 4) if rng.random() < 0.5 else Fraction(0)
         for ui in u]
    b = RowColBounds.make(n2, l, u)
    r = [li + (ui - li) * _dyadic(rng) for li, ui in zip(l, u)]
    raw = [_dyadic(rng) for _ in range(n2 - 1)] + [Fraction(1)]
    t = []
    rem = Fraction(1)
    for j in range(n2 - 1):
        t.append(raw[j] * rem)
        rem -= t[-1]
    t.append(rem)
    W = [[ri * tj for tj in t] for ri in r]

    blk = disc.build_outer(b, H)
    assign = {}
    for i in range(n1):
        for j in range(n2):
            assign[f"W[{i+1},{j+1}]"] = W[i][j]
    for j in range(n2):
        frac = t[j]
        # H-bit prefix clamped below 1, remainder lands in [0, 2^-H]
        mbits = min(int(frac * 2 ** H), 2 ** H - 1)
        digits = [(mbits >> (H - h)) & 1 for h in range(1, H + 1)]
        tail = frac - Fraction(mbits, 2 ** H)
        assign[f"gamma[{j+1}]"] = tail
        for h, d in zip(range(1, H + 1), digits):
            assign[f"z[{j+1},{h}]"] = Fraction(d)
        for i in range(n1):
            for h, d in zip(range(1, H + 1), digits):
                assign[f"alpha[{i+1},{j+1},{h}]"] = r[i] * d
            assign[f"beta[{i+1},{j+1}]"] = r[i] * tail
    import math
    for v in blk.new_vars:
        val = assign[v.name]
        if val < Fraction(v.lb):
            return False
        if math.isfinite(v.ub) and val > Fraction(v.ub):
            return False
    for con in blk.constraints:
        lhs = sum(Fraction(c) * assign[vn] for vn, c in con.coeffs.items())
        rhs = Fraction(con.rhs)
        if con.sense == "<=" and lhs > rhs:
            return False
        if con.sense == ">=" and lhs < rhs:
            return False
        if con.sense == "=" and lhs != rhs:
            return False
    return True


def inner_sample_check(rng: random.Random, H: int, tol: float = 1e-9) -> bool:
    """Solve the inner block alone with a random objective and test that the
    feasible point lies in the row set: bounds hold and all 2x2 minors
    vanish within tol."""
    n1 = rng.randint(1, 3)
    n2 = rng.randint(1, 3)
    u = [Fraction(rng.randint(2, 8), 4) for _ in range(n1)]
    l = [Fraction(rng.randint(0, int(ui * 2)), 4) if rng.random() < 0.4 else Fraction(0)
         for ui in u]
    b = RowColBounds.make(n2, l, u)
    blk = disc.build_inner(b, H)
    model = LinearModel("inner_sample")
    blk.add_to(model, declare_w=True, w_bound=float(max(u)))
    model.set_objective({f"W[{i+1},{j+1}]": rng.uniform(-1, 1)
                         for i in range(n1) for j in range(n2)})
    res = solve_milp(model, SolverConfig(time_limit=30))
    if res.status != "Optimal":
        return True      # infeasible inner blocks are fine (l may forbid grid)
    W = [[res.primal[f"W[{i+1},{j+1}]"] for j in range(n2)] for i in range(n1)]
    for i in range(n1):
        s = sum(W[i])
        if s < float(l[i]) - 1e-7 or s > float(u[i]) + 1e-7:
            return False
    for a in range(n1):
        for bb in range(a + 1, n1):
            for c in range(n2):
                for e in range(c + 1, n2):
                    if abs(W[a][c] * W[bb][e] - W[a][e] * W[bb][c]) > tol:
                        return False
    return True


def discretization_suite(n_outer: int = 200, n_inner: int = 50, seed: int = 11):
    rng = random.Random(seed)
    lines = []
    passed = True
    for k in range(n_outer):
        H = rng.randint(1, 3)
        if not outer_witness_check(rng, H):
            passed = False
            lines.append(f"FAIL outer witness {k}")
    for k in range(n_inner):
        H = rng.randint(1, 2)
        if not inner_sample_check(rng, H):
            passed = False
            lines.append(f"FAIL inner sample {k}")
    lines.append(f"discretization: {n_outer} constructive outer witnesses and "
                 f"{n_inner} solver-sampled inner points verified")
    return passed, lines


def witness_suite(avalues=(0, Fraction(1, 4), Fraction(1, 3), Fraction(1, 2),
                           Fraction(2, 3), Fraction(9, 10))):
    lines = []
    passed = True
    for a in avalues:
        if not thm4_witness_check(a):
            passed = False
            lines.append(f"FAIL witness a={a}")
    # the rank-2 identity point must violate the row-hull inequalities
    b = RowColBounds.make(2, [0, 0], [1, 1])
    hs = hull_system_row(b)
    pt = {wname(1, 1): 1, wname(2, 2): 1, wname(1, 2): 0, wname(2, 1): 0}
    if contains(hs, pt):
        passed = False
        lines.append("FAIL rank-2 point [[1,0],[0,1]] not rejected")
    lines.append(f"witness_family: parameters {[str(a) for a in avalues]} and "
                 "rank-2 rejection verified exactly")
    return passed, lines


def run_all(n1: int = 3, n2: int = 3, trials: int = 20, seed: int = 42):
    """The full verification battery used by `verify-hull`."""
    shapes = sorted({(a, b) for a in (2, n1) for b in (2, n2)})
    results = []
    results.append(("hull_equality",
                    *hull_equality_suite(shapes, trials, seed)))
    results.append(("thm1_structure", *thm1_structure_suite(30, seed + 1)))
    results.append(("separation", *separation_suite(4, 50, seed + 2)))
    results.append(("discretization", *discretization_suite(60, 15, seed + 3)))
    results.append(("witness", *witness_suite()))
    return results
