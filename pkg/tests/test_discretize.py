import random
from fractions import Fraction as F

import pytest

from rankpool import discretize as disc
from rankpool.linmodel import LinearModel
from rankpool.polyhedra import fm_project, vertices
from rankpool.rank1hull import RowColBounds, build_ext_row
from rankpool.solver import SolverConfig, solve_lp, solve_milp
from rankpool.verify import inner_sample_check, outer_witness_check


def block_model(blk, wub, objective):
    m = LinearModel("blk")
    blk.add_to(m, declare_w=True, w_bound=wub)
    m.set_objective(objective)
    return m


def test_spec_requires_positive_H():
    b = RowColBounds.make(1, [0], [1])
    with pytest.raises(ValueError):
        disc.build_outer(b, 0)
    with pytest.raises(ValueError):
        disc.DiscretizationSpec(0, "outer", "row")


def test_outer_h1_1x1_range():
    # W = alpha/2 + beta with alpha in [0, z], beta in [0, gamma <= 1/2];
    # feasible W spans [0, 1]
    b = RowColBounds.make(1, [0], [1])
    blk = disc.build_outer(b, 1)
    m = block_model(blk, 1.0, {"W[1,1]": -1.0})
    r = solve_milp(m)
    assert r.status == "Optimal" and abs(r.objective + 1.0) < 1e-9
    m2 = block_model(blk, 1.0, {"W[1,1]": 1.0})
    r2 = solve_milp(m2)
    assert abs(r2.objective) < 1e-9
    names = {v.name for v in blk.new_vars}
    assert names == {"z[1,1]", "alpha[1,1,1]", "beta[1,1]", "gamma[1]"}


def test_outer_witness_row_sum_one():
    # W = [[0.3, 0.7]] with z1 = (0,1) and gamma = 0.05 satisfies every row
    b = RowColBounds.make(2, [0], [1])
    blk = disc.build_outer(b, 2)
    assign = {"W[1,1]": 0.3, "W[1,2]": 0.7,
              "z[1,1]": 0, "z[1,2]": 1, "gamma[1]": 0.05,
              "z[2,1]": 1, "z[2,2]": 0, "gamma[2]": 0.2,
              "alpha[1,1,1]": 0.0, "alpha[1,1,2]": 1.0, "beta[1,1]": 0.05,
              "alpha[1,2,1]": 1.0, "alpha[1,2,2]": 0.0, "beta[1,2]": 0.2}
    for con in blk.constraints:
        lhs = sum(c * assign[v] for v, c in con.coeffs.items())
        if con.sense == "<=":
            assert lhs <= con.rhs + 1e-12, con.name
        elif con.sense == ">=":
            assert lhs >= con.rhs - 1e-12, con.name
        else:
            assert abs(lhs - con.rhs) <= 1e-12, con.name


def test_outer_constructive_containment():
    rng = random.Random(2)
    for _ in range(40):
        assert outer_witness_check(rng, rng.randint(1, 3))


def test_inner_grids():
    # H=1: t in {0, 1}; H=2: t in {0, 1/3, 2/3, 1}
    b = RowColBounds.make(2, [0], [1])
    for H, grid in ((1, {0.0, 1.0}), (2, {0.0, 1 / 3, 2 / 3, 1.0})):
        blk = disc.build_inner(b, H)
        kappa = 2.0 ** H / (2.0 ** H - 1)
        vals = set()
        for bits in range(2 ** H):
            vals.add(round(kappa * sum(((bits >> h) & 1) * 2.0 ** -(h + 1)
                                       for h in range(H)), 9))
        assert vals == {round(g, 9) for g in grid}


def test_inner_sampled_points_rank1():
    rng = random.Random(8)
    for _ in range(10):
        assert inner_sample_check(rng, rng.randint(1, 2))


def test_outer_lp_relaxation_contains_hull():
    # every vertex of the projected extended formulation satisfies the
    # continuous relaxation of the outer block
    b = RowColBounds.make(2, [F(1, 4), 0], [1, F(1, 2)])
    ext = build_ext_row(b)
    proj = fm_project(ext, [v for v in ext.vars if v.startswith("W[")])
    vs = vertices(proj, row_cap=2048)
    blk = disc.build_outer(b, 2)
    m = block_model(blk, 1.0, {})
    rel = m.relax_binaries()
    for pt in vs.points:
        fixes = {}
        for v, val in zip(proj.vars, pt):
            fixes[v] = (float(val), float(val))
        r = solve_lp(rel, bound_overrides=fixes)
        assert r.status == "Optimal"


def test_objective_sandwich_inner_hull_outer():
    b = RowColBounds.make(2, [F(1, 4), 0], [1, F(1, 2)])
    obj = {"W[1,1]": 1.0, "W[1,2]": -2.0, "W[2,1]": 0.5, "W[2,2]": -1.0}
    ext = build_ext_row(b)
    hull_m = LinearModel("hull")
    for v in ext.vars:
        hull_m.add_var(v, 0.0, 2.0)
    for k, (coeffs, rel, rhs) in enumerate(ext.rows):
        hull_m.add_constraint(f"r{k}", {a: float(c) for a, c in coeffs.items()},
                              rel, float(rhs))
    hull_m.set_objective(obj)
    v_hull = solve_lp(hull_m).objective
    H = 3
    m_out = block_model(disc.build_outer(b, H), 1.0, obj)
    v_out = solve_milp(m_out, SolverConfig(time_limit=30)).objective
    m_in = block_model(disc.build_inner(b, H), 1.0, obj)
    v_in = solve_milp(m_in, SolverConfig(time_limit=30)).objective
    assert v_out <= v_hull + 1e-7
    assert v_hull <= v_in + 1e-7


def test_col_blocks_are_transposed():
    b = RowColBounds.make(2, [0, F(1, 2)], [1, 1])
    row = disc.build_outer(b, 2)
    col = disc.build_outer_col(b, 2)
    assert col.spec.orientation == "col"
    # z variables index the rows of the original matrix in the col block
    assert any(v.name == "z[2,1]" for v in col.new_vars)
    assert len(col.constraints) == len(row.constraints)


def test_inner_aggregate_rows_emitted():
    b = RowColBounds.make(2, [0, 0], [1, 1], agg_L=F(1, 2), agg_U=F(3, 2))
    blk = disc.build_inner(b, 2)
    names = {c.name for c in blk.constraints}
    assert "agg_lo[1]" in names and "agg_hi[2]" in names
    # and the unit-sum strengthening row is on by default for inner blocks
    assert "unitsum" in names
    out = disc.build_outer(RowColBounds.make(2, [0, 0], [1, 1]), 2)
    assert "unitsum" not in {c.name for c in out.constraints}
