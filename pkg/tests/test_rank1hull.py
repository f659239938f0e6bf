import itertools
import random
from fractions import Fraction as F

import pytest

from rankpool.polyhedra import (GE, LE, Polyhedron, contains, exact_lp,
                                fm_project, poly_equal, vertices)
from rankpool.rank1hull import (CutInequality, FamilyCapExceeded,
                                GeneralRank1Set, Infeasible, MultRank1Data,
                                NoLowerBounds, NotBounded, OutOfRange,
                                RecessionConditionViolated, RowColBounds,
                                StructureMismatch, Thm3Structure,
                                brute_force_separate, build_ext_col,
                                build_ext_colplus, build_ext_multrank1,
                                build_ext_row, build_ext_rowplus,
                                hull_inequalities_col, hull_inequalities_row,
                                hull_single_constraint, hull_system_col,
                                hull_system_row, optimize_rank1_small_support,
                                separate_col, separate_row, separate_rowplus,
                                thm4_witness_check, witness_matrix, wname)


def wvars(n1, n2):
    return [wname(i, j) for i in range(1, n1 + 1) for j in range(1, n2 + 1)]


def project_w(ext):
    return fm_project(ext, [v for v in ext.vars if v.startswith("W[")])


# -- single constraint hull --------------------------------------------------

def test_single_constraint_1x1():
    s = GeneralRank1Set.make([([[2]], 4)])
    h = hull_single_constraint(s)
    assert contains(h, [F(2)]) and not contains(h, [F(5, 2)])


def test_single_constraint_simplex_vertices_rank1():
    s = GeneralRank1Set.make([([[1, 1], [1, 1]], 1)])
    vs = vertices(hull_single_constraint(s))
    assert len(vs.points) == 5
    for p in vs.points:
        W = [[p[0], p[1]], [p[2], p[3]]]
        assert W[0][0] * W[1][1] - W[0][1] * W[1][0] == 0


def test_single_constraint_needs_positive_matrix():
    with pytest.raises(NotBounded):
        hull_single_constraint(GeneralRank1Set.make([([[1, 0], [1, 1]], 1)]))


# -- extended formulations ---------------------------------------------------

def test_row_specialization_matches_multrank1():
    b = RowColBounds.make(2, [F(1, 2), 0], [1, 1])
    d = MultRank1Data.make(
        [[1, 0], [0, 1], [-1, 0], [0, -1]], [1, 1], [1, 1, F(-1, 2), 0])
    assert build_ext_row(b).rows == build_ext_multrank1(d).rows


def test_multrank1_projection_vertices_single_column():
    d = MultRank1Data.make([[1, 1]], [1, 2], [2])
    proj = project_w(build_ext_multrank1(d))
    vs = vertices(proj)
    cols = {(F(2), F(0), F(0), F(0)), (F(0), F(0), F(2), F(0)),
            (F(0), F(1), F(0), F(0)), (F(0), F(0), F(0), F(1)),
            (F(0), F(0), F(0), F(0))}
    assert set(vs.points) == cols


def test_multrank1_infeasible_rhs():
    d = MultRank1Data.make([[1, 1]], [1, 1], [-1])
    proj = project_w(build_ext_multrank1(d))
    assert vertices(proj).is_empty


def test_recession_condition_rejected():
    with pytest.raises(RecessionConditionViolated):
        MultRank1Data.make([[1, -1]], [1, 1], [1])


def test_ext_row_projection_examples():
    b = RowColBounds.make(2, [0], [1])
    proj = project_w(build_ext_row(b))
    expect = Polyhedron.make(proj.vars, [({proj.vars[0]: 1}, GE, 0),
                                         ({proj.vars[1]: 1}, GE, 0),
                                         ({proj.vars[0]: 1, proj.vars[1]: 1}, LE, 1)])
    assert poly_equal(proj, expect)
    # single column: box with degenerate ratio structure
    b = RowColBounds.make(1, [F(1, 4), 0], [1, F(1, 2)])
    proj = project_w(build_ext_row(b))
    assert poly_equal(proj, Polyhedron(proj.vars, hull_system_row(b).rows))


def test_ext_row_zero_bounds():
    b = RowColBounds.make(2, [0, 0], [0, 0])
    proj = project_w(build_ext_row(b))
    assert vertices(proj).points == ((F(0),) * 4,)


def test_ext_rowplus_redundant_aggregate_matches_row():
    b0 = RowColBounds.make(2, [0, 0], [1, 1])
    b1 = RowColBounds.make(2, [0, 0], [1, 1], agg_L=0, agg_U=2)
    p0 = project_w(build_ext_row(b0))
    p1 = project_w(build_ext_rowplus(b1))
    assert poly_equal(p0, Polyhedron(p0.vars, p1.rows))


def test_ext_rowplus_infeasible_aggregate():
    b = RowColBounds.make(2, [0, 0], [1, 1], agg_L=3, agg_U=3)
    with pytest.raises(ValueError):
        build_ext_rowplus(b)


def test_ext_col_is_transpose():
    b = RowColBounds.make(3, [F(1, 2), 0], [1, 1])
    pr = project_w(build_ext_row(b))
    pc = project_w(build_ext_col(b))
    ren = pr.rename({wname(i, j): wname(j, i) for i in (1, 2) for j in (1, 2, 3)})
    assert poly_equal(Polyhedron(pc.vars, ren.rows), pc)


# -- inequality families -----------------------------------------------------

def test_hull_inequalities_2x2_no_lower():
    b = RowColBounds.make(2, [0, 0], [1, 1])
    cuts = hull_inequalities_row(b)
    texts = {c.canonical_text() for c in cuts if c.family == "rowconv1"}
    assert texts == {
        "rowconv1: 1*W[1,1] + 1*W[1,2] <= 1",
        "rowconv1: 1*W[1,1] + 1*W[2,2] <= 1",
        "rowconv1: 1*W[1,2] + 1*W[2,1] <= 1",
        "rowconv1: 1*W[2,1] + 1*W[2,2] <= 1"}
    assert sum(1 for c in cuts if c.family == "nonneg") == 4
    assert sum(1 for c in cuts if c.family == "rowconv2") == 0


def test_hull_inequalities_single_lower_row():
    b = RowColBounds.make(2, [1, 0], [1, 1])
    cuts = hull_inequalities_row(b)
    lowers = [c for c in cuts if c.family == "rowconv2"]
    assert len(lowers) == 1
    assert lowers[0].canonical_text() == "rowconv2: 1*W[1,1] + 1*W[1,2] >= 1"
    ratios = [c for c in cuts if c.family == "rowconv3"]
    assert len(ratios) == 2     # 1*W[2,j] <= 1*W[1,j]


def test_hull_inequalities_zero_u_fixes():
    b = RowColBounds.make(2, [0, 0], [0, 0])
    cuts = hull_inequalities_row(b)
    assert {c.family for c in cuts} == {"fix", "nonneg"}


def test_family_cap():
    b = RowColBounds.make(8, [0] * 6, [1] * 6)
    with pytest.raises(FamilyCapExceeded):
        hull_inequalities_row(b, cap=1000)


def test_hull_equality_row_small():
    rng = random.Random(1)
    for _ in range(5):
        n1, n2 = rng.randint(1, 3), rng.randint(1, 3)
        u = [F(rng.randint(1, 6), 3) for _ in range(n1)]
        l = [F(rng.randint(0, int(x * 3)), 3) for x in u]
        b = RowColBounds.make(n2, l, u)
        proj = project_w(build_ext_row(b))
        assert poly_equal(proj, Polyhedron(proj.vars, hull_system_row(b).rows),
                          row_cap=2048)


def test_hull_description_missing_member_differs():
    b = RowColBounds.make(2, [0, 0], [F(1, 2), 1])
    cuts = hull_inequalities_row(b)
    partial = [c for c in cuts if c.family != "rowconv1"] + \
              [c for c in cuts if c.family == "rowconv1"][1:]
    full = hull_system_row(b)
    sub = Polyhedron.make(full.vars, [c.as_row() for c in partial])
    assert not poly_equal(full, sub)


def test_hull_col_is_transposed_row():
    b = RowColBounds.make(2, [F(1, 2), 0], [1, F(3, 4)])
    hr = hull_system_row(b)
    hc = hull_system_col(b)
    ren = hr.rename({wname(i, j): wname(j, i) for i in (1, 2) for j in (1, 2)})
    assert poly_equal(Polyhedron(hc.vars, ren.rows), hc)


def test_rank2_point_cut_off():
    b = RowColBounds.make(2, [0, 0], [1, 1])
    hs = hull_system_row(b)
    assert not contains(hs, {wname(1, 1): 1, wname(2, 2): 1})


def test_rank1_points_satisfy_all_cuts():
    rng = random.Random(9)
    b = RowColBounds.make(3, [F(1, 4), 0], [1, F(1, 2)],
                          agg_L=F(1, 4), agg_U=F(5, 4))
    cuts = hull_inequalities_row(b)
    nb = b.normalized()
    hits = 0
    for _ in range(200):
        x = [F(rng.randint(0, 8), 8) for _ in range(2)]
        y = [F(rng.randint(0, 8), 8) for _ in range(3)]
        W = [[xi * yj for yj in y] for xi in x]
        rows = [sum(r) for r in W]
        tot = sum(rows)
        inside = all(nb.l[i] <= rows[i] <= nb.u[i] for i in range(2)) and \
            nb.agg_L <= tot <= nb.agg_U
        if not inside:
            continue
        hits += 1
        for c in cuts:
            assert c.satisfied_by(W), c.canonical_text()
    assert hits > 10


def test_mccormick_second_pair_implied():
    # the extended system implies both MCC34 rows: each violation maximizes to 0
    b = RowColBounds.make(2, [F(1, 4), F(1, 2)], [1, F(3, 4)])
    ext = build_ext_row(b)
    for i in range(1, 3):
        rowsum = {wname(i, j): F(1) for j in range(1, 3)}
        li, ui = b.l[i - 1], b.u[i - 1]
        for j in range(1, 3):
            up = {wname(i, j): F(1)}
            for v, c in rowsum.items():
                up[v] = up.get(v, F(0)) - c
            up[f"t[{j}]"] = -li
            r = exact_lp(ext, up, "max")    # W_ij - sum_j' W_ij' - l_i t_j <= -l_i
            assert r.status == "optimal" and r.value <= -li
            lo = {wname(i, j): F(-1)}
            for v, c in rowsum.items():
                lo[v] = lo.get(v, F(0)) + c
            lo[f"t[{j}]"] = ui
            r = exact_lp(ext, lo, "max")    # u_i t_j + sum - W_ij <= u_i
            assert r.status == "optimal" and r.value <= ui


# -- separation ---------------------------------------------------------------

def test_separate_row_spec_examples():
    b = RowColBounds.make(2, [0, 0], [1, 1])
    assert separate_row([[0, 0], [0, 0]], b, "upper") is None
    cut, viol = separate_row([[F(4, 5), F(4, 5)], [0, 0]], b, "upper")
    assert viol == F(3, 5)
    assert cut.canonical_text() == "rowconv1: 1*W[1,1] + 1*W[1,2] <= 1"
    b2 = RowColBounds.make(2, [1, 1], [1, 1])
    cut, viol = separate_row([[F(1, 5), F(1, 5)], [F(3, 10), F(3, 10)]],
                             b2, "lower")
    assert viol == F(3, 5)
    assert cut.canonical_text() == "rowconv2: 1*W[1,1] + 1*W[1,2] >= 1"


def test_separate_row_requires_lower_bounds():
    b = RowColBounds.make(2, [0, 0], [1, 1])
    with pytest.raises(NoLowerBounds):
        separate_row([[0, 0], [0, 0]], b, "lower")


def test_separate_rowplus_spec_examples():
    b = RowColBounds.make(1, [0, 0], [1, 1], agg_L=0, agg_U=1)
    cut, viol = separate_rowplus([[F(7, 10)], [F(7, 10)]], b, "upper")
    assert viol == F(2, 5)
    assert cut.canonical_text() == "rowplusconv1: 1*W[1,1] + 1*W[2,1] <= 1"
    # redundant aggregate reduces to the plain row answer
    b2 = RowColBounds.make(2, [0, 0], [1, 1], agg_L=0, agg_U=2)
    W = [[F(3, 4), F(1, 4)], [F(1, 8), F(7, 8)]]
    a = separate_rowplus(W, b2, "upper")
    bb = separate_row(W, RowColBounds.make(2, [0, 0], [1, 1]), "upper")
    assert (a is None) == (bb is None)
    if a is not None:
        assert a[1] == bb[1]
    assert separate_rowplus([[0, 0], [0, 0]], b2, "upper") is None


def test_separation_matches_bruteforce_float_mode():
    rng = random.Random(4)
    for _ in range(60):
        n1, n2 = rng.randint(1, 4), rng.randint(1, 4)
        u = [F(rng.randint(1, 8), 4) for _ in range(n1)]
        l = [F(rng.randint(0, int(x * 4)), 4) if rng.random() < 0.5 else F(0)
             for x in u]
        b = RowColBounds.make(n2, l, u)
        W = [[rng.random() for _ in range(n2)] for _ in range(n1)]
        for side in ("upper", "lower"):
            try:
                got = separate_row(W, b, side, exact=False)
            except NoLowerBounds:
                continue
            bf = brute_force_separate(W, b, side, False)
            gv = 0.0 if got is None else got[1]
            bv = 0.0 if bf is None else bf[1]
            assert abs(gv - bv) <= 1e-12


def test_separate_col_transposes():
    b = RowColBounds.make(2, [0, 0], [1, 1])
    W = [[F(4, 5), 0], [F(4, 5), 0]]
    got = separate_col(W, b, "upper")
    rt = separate_row([list(r) for r in zip(*W)], b, "upper")
    assert got[1] == rt[1]
    assert got[0].coeff_dict() == {(j, i): c
                                   for (i, j), c in rt[0].coeff_dict().items()}


# -- optimization over small supports ----------------------------------------

def test_optimize_zero_objective():
    s = GeneralRank1Set.make([([[1, 1], [1, 1]], 1), ([[2, 1], [1, 2]], 1)])
    val, W = optimize_rank1_small_support(s, [[0, 0], [0, 0]])
    assert val == 0.0


def test_optimize_single_constraint_matches_lp():
    s = GeneralRank1Set.make([([[2, 1], [1, 3]], 4)])
    val, W = optimize_rank1_small_support(s, [[1, 0], [0, 1]])
    lp = exact_lp(hull_single_constraint(s),
                  {wname(1, 1): 1, wname(2, 2): 1}, "max")
    assert abs(val - float(lp.value)) <= 1e-9 * (1 + abs(float(lp.value)))


def test_optimize_not_bounded():
    s = GeneralRank1Set.make([([[1, -1], [1, 1]], 1), ([[1, 1], [1, -1]], 1)])
    with pytest.raises(NotBounded):
        optimize_rank1_small_support(s, [[1, 0], [0, 1]])


def test_optimize_structure_mode():
    beta, delta = (1, 2, 1), (2, 1, 1)
    n = 3
    A = []
    st = Thm3Structure((F(1), F(1, 2)), (F(1, 2), F(1)), tuple(map(F, beta)),
                       tuple(map(F, delta)))
    for al, ga in zip(st.alphas, st.gammas):
        A.append(([[al * beta[i] * beta[j] + ga * delta[i] * delta[j]
                    for j in range(n)] for i in range(n)], 2))
    s = GeneralRank1Set.make(A)
    c = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    val, W = optimize_rank1_small_support(s, c, structure=st)
    assert val > 0
    # three constraints require the structured form, and it must match
    three = GeneralRank1Set.make(A + [(A[0][0], 2)])
    with pytest.raises(StructureMismatch):
        optimize_rank1_small_support(three, c)
    bad = Thm3Structure((F(1), F(1), F(1)), (F(1), F(1), F(1)),
                        st.beta, st.delta)
    with pytest.raises(StructureMismatch):
        optimize_rank1_small_support(three, c, structure=bad)


def test_optimize_against_dense_sampling_oracle():
    import numpy as np
    s = GeneralRank1Set.make([([[1, 1], [1, 1]], 1), ([[2, 1], [1, 2]], 1)])
    c = [[1, 0], [0, 1]]
    val, W = optimize_rank1_small_support(s, c)
    n = 160
    x1 = np.linspace(0, 1.2, n)
    x2 = np.linspace(0, 1.2, n)
    best = 0.0
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    for t in np.linspace(0, 1, n):
        W11 = X1 * t
        W12 = X1 * (1 - t)
        W21 = X2 * t
        W22 = X2 * (1 - t)
        feas = (W11 + W12 + W21 + W22 <= 1 + 1e-12) & \
               (2 * W11 + W12 + W21 + 2 * W22 <= 1 + 1e-12)
        obj = np.where(feas, W11 + W22, -np.inf)
        best = max(best, float(obj.max()))
    assert val >= best - 1e-6
    assert val <= best + 1e-2 + 1e-6 * abs(best)   # grid resolution slack upward


def test_optimize_m2_spec_instance_value():
    s = GeneralRank1Set.make([([[1, 1], [1, 1]], 1), ([[2, 1], [1, 2]], 1)])
    val, W = optimize_rank1_small_support(s, [[1, 0], [0, 1]])
    # supports: the single-entry solution W11 = 1/2 attains 1/2; verified by
    # the dense oracle above
    assert abs(val - 0.5) <= 1e-6


# -- non-polyhedrality witness ------------------------------------------------

def test_witness_paper_value():
    W = witness_matrix(F(1, 2))
    assert W == ((F(1, 2), F(1, 2)), (F(1, 2), F(1, 2)))
    assert thm4_witness_check(F(1, 2))


def test_witness_all_criterion_values():
    for a in (0, F(1, 4), F(1, 3), F(1, 2), F(2, 3), F(9, 10)):
        assert thm4_witness_check(a)


def test_witness_out_of_range():
    with pytest.raises(OutOfRange):
        thm4_witness_check(F(3, 2))


def test_witness_detects_broken_rank():
    # a corrupted matrix must fail the determinant check; emulate by checking
    # the determinant identity directly
    a = F(1, 3)
    W = [list(r) for r in witness_matrix(a)]
    W[0][1] += F(1, 100)
    det = W[0][0] * W[1][1] - W[0][1] * W[1][0]
    assert det != 0
