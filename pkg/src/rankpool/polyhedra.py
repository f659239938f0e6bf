"""Exact rational polyhedra: inequality systems, Fourier-Motzkin projection,
vertex/ray enumeration, membership and set-equality tests.

All arithmetic is exact. Rationals are `fractions.Fraction`; the heavy
algorithms clear denominators and run on Python integers, using bitmasks for
the combinatorial bookkeeping. No tolerances anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Sequence

LE, EQ, GE = "<=", "=", ">="

__all__ = [
    "LE", "EQ", "GE",
    "Polyhedron", "VertexSet", "ExactLPResult",
    "PolyhedronError", "DimensionCapExceeded", "RowCapExceeded",
    "fm_eliminate", "fm_project", "remove_redundant", "vertices", "contains",
    "poly_equal", "exact_lp", "is_feasible",
]


class PolyhedronError(Exception):
    pass


class DimensionCapExceeded(PolyhedronError):
    pass


class RowCapExceeded(PolyhedronError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


@dataclass(frozen=True)
class Polyhedron:
    """System of linear rows (coeffs, relation, rhs) over named variables.

    Treated as immutable: rows and coefficient dicts are never mutated after
    construction. Rows with all-zero coefficients are kept; they encode
    trivial truths (0 <= 1) or infeasibility (0 <= -1).
    """

    vars: tuple[str, ...]
    rows: tuple[tuple[dict, str, Fraction], ...]

    @staticmethod
    def make(var_names: Sequence[str], rows: Iterable[tuple[Mapping, str, object]]) -> "Polyhedron":
        names = tuple(var_names)
        index = set(names)
        out = []
        for coeffs, rel, rhs in rows:
            if rel not in (LE, EQ, GE):
                raise ValueError(f"bad relation {rel!r}")
            cc = {}
            for v, c in coeffs.items():
                if v not in index:
                    raise ValueError(f"unknown variable {v!r} in row")
                c = _frac(c)
                if c != 0:
                    cc[v] = c
            out.append((cc, rel, _frac(rhs)))
        return Polyhedron(names, tuple(out))

    def with_rows(self, extra: Iterable[tuple[Mapping, str, object]]) -> "Polyhedron":
        return Polyhedron.make(self.vars, [*self.rows, *extra])

    def rename(self, mapping: Mapping[str, str]) -> "Polyhedron":
        names = tuple(mapping.get(v, v) for v in self.vars)
        rows = tuple(({mapping.get(v, v): c for v, c in coeffs.items()}, rel, rhs)
                     for coeffs, rel, rhs in self.rows)
        return Polyhedron(names, rows)

    def pretty(self) -> str:
        """Human-readable dump, one `name: c1*x1 + c2*x2 <= r` line per row."""
        lines = []
        for k, (coeffs, rel, rhs) in enumerate(self.rows):
            terms = " + ".join(f"{coeffs[v]}*{v}" for v in self.vars if v in coeffs)
            lines.append(f"r{k}: {terms or '0'} {rel} {rhs}")
        return "\n".join(lines)


@dataclass(frozen=True)
class VertexSet:
    """Vertices and extreme rays of a pointed polyhedron (exact rationals)."""

    points: tuple[tuple[Fraction, ...], ...]
    rays: tuple[tuple[Fraction, ...], ...]
    is_bounded: bool

    @property
    def is_empty(self) -> bool:
        return not self.points


# ---------------------------------------------------------------------------
# integer row form
# ---------------------------------------------------------------------------

def _row_to_int(varnames: Sequence[str], coeffs: Mapping[str, Fraction], rhs: Fraction):
    """Scale (coeffs, rhs) to coprime integers; returns (vec, rhs_int)."""
    denom = rhs.denominator
    for c in coeffs.values():
        denom = denom * c.denominator // gcd(denom, c.denominator)
    vec = [int(coeffs.get(v, Fraction(0)) * denom) for v in varnames]
    b = int(rhs * denom)
    g = abs(b)
    for a in vec:
        g = gcd(g, abs(a))
    if g > 1:
        vec = [a // g for a in vec]
        b //= g
    return vec, b


def _int_rows(p: Polyhedron):
    """Rows as (int coeff vector, rel in {LE, EQ}, int rhs); GE rows flipped."""
    out = []
    for coeffs, rel, rhs in p.rows:
        vec, b = _row_to_int(p.vars, coeffs, rhs)
        if rel == GE:
            vec = [-a for a in vec]
            b = -b
            rel = LE
        out.append((vec, rel, b))
    return out


def _gcd_reduce(vec):
    g = 0
    for a in vec:
        g = gcd(g, abs(a))
    if g > 1:
        return [a // g for a in vec]
    return list(vec)


def _reduce_row(vec, b):
    g = abs(b)
    for a in vec:
        g = gcd(g, abs(a))
    if g > 1:
        return [a // g for a in vec], b // g
    return list(vec), b


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# Fourier-Motzkin elimination
# ---------------------------------------------------------------------------

def _canon_int_rows(rows):
    """Dedupe integer LE/EQ rows and drop dominated parallel LE rows."""
    best_le: dict[tuple, int] = {}
    eqs: dict[tuple, None] = {}
    trivial_infeasible = None
    for vec, rel, b in rows:
        key = tuple(vec)
        if not any(vec):
            if (rel == LE and b < 0) or (rel == EQ and b != 0):
                trivial_infeasible = list(vec)
            continue
        if rel == EQ:
            # orient equality rows canonically
            for a in vec:
                if a != 0:
                    if a < 0:
                        key = tuple(-x for x in vec)
                        b = -b
                    break
            eqs.setdefault((key, b))
        else:
            prev = best_le.get(key)
            if prev is None or b < prev:
                best_le[key] = b
    out = [(list(k), EQ, b) for (k, b) in eqs]
    out += [(list(k), LE, b) for k, b in best_le.items()]
    if trivial_infeasible is not None:
        out.append((trivial_infeasible, LE, -1))
    return out


def fm_eliminate(p: Polyhedron, var: str, max_rows: int = 200_000) -> Polyhedron:
    """Project out `var` by Fourier-Motzkin elimination.

    If an equality row carries `var`, that row is pivoted (substitution),
    otherwise all positive/negative row pairs are combined. The output may
    contain redundant rows; duplicates and dominated parallel rows are pruned.
    """
    if var not in p.vars:
        raise ValueError(f"variable {var!r} not in polyhedron")
    vi = p.vars.index(var)
    rows = _int_rows(p)

    pivot = None
    for r in rows:
        if r[1] == EQ and r[0][vi] != 0:
            pivot = r
            break

    new_rows = []
    if pivot is not None:
        pv, _, pb = pivot
        a0 = pv[vi]
        for vec, rel, b in rows:
            if vec is pv:
                continue
            a = vec[vi]
            if a == 0:
                new_rows.append((vec, rel, b))
                continue
            # a0 * row - a * pivot cancels var; flip if a0 < 0 on LE rows
            comb = [a0 * x - a * y for x, y in zip(vec, pv)]
            cb = a0 * b - a * pb
            if a0 < 0 and rel == LE:
                comb = [-x for x in comb]
                cb = -cb
            new_rows.append((comb, rel, cb))
    else:
        pos, neg, rest = [], [], []
        for vec, rel, b in rows:
            a = vec[vi]
            if rel == EQ:
                # equality without var (a == 0 ensured by pivot pass)
                rest.append((vec, rel, b))
                continue
            if a > 0:
                pos.append((vec, b))
            elif a < 0:
                neg.append((vec, b))
            else:
                rest.append((vec, rel, b))
        new_rows.extend(rest)
        if len(pos) * len(neg) > max_rows:
            raise RowCapExceeded(f"FM pairing would create {len(pos) * len(neg)} rows")
        for pvec, pb2 in pos:
            ap = pvec[vi]
            for nvec, nb in neg:
                an = -nvec[vi]
                comb = [an * x + ap * y for x, y in zip(pvec, nvec)]
                cb = an * pb2 + ap * nb
                new_rows.append((comb, LE, cb))

    reduced = []
    for vec, rel, b in new_rows:
        vec2, b2 = _reduce_row(vec[:vi] + vec[vi + 1:], b)
        reduced.append((vec2, rel, b2))
    new_rows = _canon_int_rows(reduced)
    new_vars = p.vars[:vi] + p.vars[vi + 1:]
    rows_out = [({v: Fraction(c) for v, c in zip(new_vars, vec) if c != 0}, rel, Fraction(b))
                for vec, rel, b in new_rows]
    return Polyhedron.make(new_vars, rows_out)


def fm_project(p: Polyhedron, keep: Sequence[str]) -> Polyhedron:
    """Eliminate every variable not in `keep` (in reverse declaration order)."""
    keep_set = set(keep)
    out = p
    for v in reversed(p.vars):
        if v not in keep_set:
            out = fm_eliminate(out, v)
    return out


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------

def contains(p: Polyhedron, x) -> bool:
    """Exact membership test; `x` is a sequence in vars order or a dict."""
    if isinstance(x, Mapping):
        vals = {v: _frac(x.get(v, 0)) for v in p.vars}
    else:
        if len(x) != len(p.vars):
            raise ValueError("point dimension mismatch")
        vals = {v: _frac(xv) for v, xv in zip(p.vars, x)}
    for coeffs, rel, rhs in p.rows:
        lhs = sum((c * vals[v] for v, c in coeffs.items()), Fraction(0))
        if rel == LE and lhs > rhs:
            return False
        if rel == GE and lhs < rhs:
            return False
        if rel == EQ and lhs != rhs:
            return False
    return True


# ---------------------------------------------------------------------------
# double-description vertex/ray enumeration
# ---------------------------------------------------------------------------

def _dd_extreme_rays(ineqs, eqs, dim):
    """Extreme rays of {y : m.y <= 0 for m in ineqs, m.y = 0 for m in eqs}.

    Returns (lineality_basis, rays); rays carry gcd-reduced integer vectors.
    """
    L = [[1 if i == j else 0 for j in range(dim)] for i in range(dim)]
    R: list[list] = []   # [vec, zeromask]
    bit = 1
    neq = len(eqs)
    rows = [(m, True) for m in eqs] + [(m, False) for m in ineqs]
    for m, is_eq in rows:
        sL = [_dot(m, l) for l in L]
        piv = next((i for i, s in enumerate(sL) if s != 0), None)
        if piv is not None:
            l0 = L.pop(piv)
            s0 = sL.pop(piv)
            newL = []
            for l, s in zip(L, sL):
                if s == 0:
                    newL.append(l)
                else:
                    newL.append(_gcd_reduce([s0 * a - s * b for a, b in zip(l, l0)]))
            L = newL
            scale = abs(s0)
            sgn = 1 if s0 > 0 else -1
            for r in R:
                sr = _dot(m, r[0])
                if sr != 0:
                    r[0] = _gcd_reduce([scale * a - sr * sgn * b for a, b in zip(r[0], l0)])
                if not is_eq:
                    r[1] |= bit
            if not is_eq:
                # the pivot leaves the lineality space as a ray on the feasible
                # side; it satisfies every previously processed row at zero
                rstar = [-a for a in l0] if s0 > 0 else list(l0)
                R.append([_gcd_reduce(rstar), bit - 1])
                bit <<= 1
            continue
        svals = [_dot(m, r[0]) for r in R]
        keep, plus, minus = [], [], []
        for r, s in zip(R, svals):
            if s == 0:
                r[1] |= bit if not is_eq else 0
                keep.append(r)
            elif s < 0:
                if is_eq:
                    minus.append((r, s))
                else:
                    keep.append(r)
                    minus.append((r, s))
            else:
                plus.append((r, s))
        if plus and minus:
            zsets = [r[1] for r in R]
            min_bits = max(0, dim - 2 - len(L) - neq)
            for rp, sp in plus:
                zp = rp[1]
                for rm, sm in minus:
                    z = zp & rm[1]
                    # rank necessity: adjacent rays share a tight set of rank
                    # >= dim-2, net of lineality and equality rows
                    if z.bit_count() < min_bits:
                        continue
                    adjacent = True
                    for other, zo in zip(R, zsets):
                        if other is rp or other is rm:
                            continue
                        if (z | zo) == zo:
                            adjacent = False
                            break
                    if adjacent:
                        vec = _gcd_reduce([sp * a - sm * b for a, b in zip(rm[0], rp[0])])
                        keep.append([vec, z | (0 if is_eq else bit)])
        R = keep
        if not is_eq:
            bit <<= 1
    return L, R


def vertices(p: Polyhedron, dim_cap: int = 12, row_cap: int = 512) -> VertexSet:
    """Vertices and extreme rays via double description on the homogenization.

    Guards: dimension <= dim_cap, rows <= row_cap. Requires a pointed
    polyhedron (raises PolyhedronError when a nontrivial lineality space
    survives); infeasible systems yield an empty VertexSet.
    """
    d = len(p.vars)
    if d > dim_cap:
        raise DimensionCapExceeded(f"{d} variables exceeds cap {dim_cap}")
    if len(p.rows) > row_cap:
        raise RowCapExceeded(f"{len(p.rows)} rows exceeds cap {row_cap}")
    ineqs = []
    eqs = []
    for vec, rel, b in _int_rows(p):
        m = [-b] + vec                           # a.x <= b  ->  -b*y0 + a.x <= 0
        if rel == EQ:
            eqs.append(m)
        else:
            ineqs.append(m)
    ineqs.insert(0, [-1] + [0] * d)              # y0 >= 0
    L, R = _dd_extreme_rays(ineqs, eqs, d + 1)
    if L:
        raise PolyhedronError("polyhedron has a nontrivial lineality space; "
                              "vertex enumeration undefined")
    pts, rays = [], []
    for vec, _z in R:
        if vec[0] > 0:
            y0 = vec[0]
            pts.append(tuple(Fraction(a, y0) for a in vec[1:]))
        elif vec[0] == 0:
            rays.append(tuple(Fraction(a) for a in vec[1:]))
    if not pts:
        return VertexSet((), (), True)
    pts = tuple(sorted(set(pts)))
    rays = tuple(sorted(set(rays)))
    return VertexSet(pts, rays, not rays)


# ---------------------------------------------------------------------------
# exact LP (dense tableau, Bland's rule)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExactLPResult:
    status: str                       # optimal | infeasible | unbounded
    value: Fraction | None
    point: dict | None


def exact_lp(p: Polyhedron, objective: Mapping[str, object], sense: str = "max") -> ExactLPResult:
    """Optimize a linear function over `p` exactly.

    Free variables are split x = x+ - x-; two-phase dense simplex with
    Bland's rule throughout (termination guaranteed, exact arithmetic).
    """
    n = len(p.vars)
    obj = [_frac(objective.get(v, 0)) for v in p.vars]
    if sense == "min":
        obj = [-c for c in obj]
    elif sense != "max":
        raise ValueError("sense must be 'max' or 'min'")

    rows = _int_rows(p)
    m = len(rows)
    nslack = sum(1 for _, rel, _ in rows if rel == LE)
    ncols = 2 * n + nslack           # x+ | x- | slack
    art0 = ncols
    total = ncols + m                # + one artificial per row
    zero, one = Fraction(0), Fraction(1)

    T = []
    sk = 0
    for idx, (vec, rel, rhs) in enumerate(rows):
        row = [Fraction(a) for a in vec] + [Fraction(-a) for a in vec] + \
              [zero] * (nslack + m) + [Fraction(rhs)]
        if rel == LE:
            row[2 * n + sk] = one
            sk += 1
        if row[-1] < 0:
            row = [-x for x in row]
        row[art0 + idx] = one
        T.append(row)
    basis = [art0 + i for i in range(m)]
    in_basis = set(basis)

    def pivot(r, c):
        piv = T[r][c]
        T[r] = [x / piv for x in T[r]]
        rr = T[r]
        for i in range(m):
            f = T[i][c]
            if i != r and f != 0:
                T[i] = [x - f * y for x, y in zip(T[i], rr)]
        in_basis.discard(basis[r])
        basis[r] = c
        in_basis.add(c)

    def simplex(cost, enter_limit):
        # maximize `cost`; Bland's rule on both entering and leaving choices
        while True:
            cb = [cost[bi] for bi in basis]
            enter = -1
            for j in range(enter_limit):
                if j in in_basis:
                    continue
                red = cost[j] - sum(ci * T[i][j] for i, ci in enumerate(cb) if ci != 0)
                if red > 0:
                    enter = j
                    break
            if enter < 0:
                return "optimal"
            ratio, leave = None, -1
            for i in range(m):
                t = T[i][enter]
                if t > 0:
                    r = T[i][-1] / t
                    if ratio is None or r < ratio or (r == ratio and basis[i] < basis[leave]):
                        ratio, leave = r, i
            if leave < 0:
                return "unbounded"
            pivot(leave, enter)

    cost1 = [zero] * ncols + [Fraction(-1)] * m
    simplex(cost1, total)
    if any(T[i][-1] != 0 for i in range(m) if basis[i] >= art0):
        return ExactLPResult("infeasible", None, None)
    for i in range(m):
        if basis[i] >= art0:
            for j in range(ncols):
                if T[i][j] != 0:
                    pivot(i, j)
                    break

    cost2 = list(obj) + [-c for c in obj] + [zero] * (nslack + m)
    st = simplex(cost2, ncols)
    if st == "unbounded":
        return ExactLPResult("unbounded", None, None)
    xs = [zero] * total
    for i, bi in enumerate(basis):
        xs[bi] = T[i][-1]
    point = {v: xs[j] - xs[n + j] for j, v in enumerate(p.vars)}
    val = sum((obj[j] * (xs[j] - xs[n + j]) for j in range(n)), zero)
    if sense == "min":
        val = -val
    return ExactLPResult("optimal", val, point)


def is_feasible(p: Polyhedron) -> bool:
    return exact_lp(p, {}, "max").status != "infeasible"


# ---------------------------------------------------------------------------
# redundancy removal and set equality
# ---------------------------------------------------------------------------

def remove_redundant(p: Polyhedron, row_cap: int = 5000) -> Polyhedron:
    """Drop rows implied by the rest; one exact LP feasibility test per row.

    The solution set is unchanged. Infeasible systems are returned as-is
    (row-by-row redundancy is ill-defined there).
    """
    if len(p.rows) > row_cap:
        raise RowCapExceeded(f"{len(p.rows)} rows exceeds cap {row_cap}")
    if not is_feasible(p):
        return p
    kept: list[int] = list(range(len(p.rows)))

    def implied(others: list[int], coeffs, rel, rhs) -> bool:
        sub = Polyhedron(p.vars, tuple(p.rows[i] for i in others))
        if rel in (LE, EQ):
            # bound the test LP so redundancy of the last row is decidable
            probe = sub.with_rows([(coeffs, LE, rhs + 1)])
            r = exact_lp(probe, coeffs, "max")
            if r.status != "optimal" or r.value > rhs:
                return False
        if rel in (GE, EQ):
            probe = sub.with_rows([(coeffs, GE, rhs - 1)])
            r = exact_lp(probe, coeffs, "min")
            if r.status != "optimal" or r.value < rhs:
                return False
        return True

    i = 0
    while i < len(kept):
        ridx = kept[i]
        coeffs, rel, rhs = p.rows[ridx]
        others = [k for k in kept if k != ridx]
        if not coeffs:
            ok = (rel == LE and rhs >= 0) or (rel == GE and rhs <= 0) or (rel == EQ and rhs == 0)
            if ok:
                kept = others
                continue
        elif implied(others, coeffs, rel, rhs):
            kept = others
            continue
        i += 1
    return Polyhedron(p.vars, tuple(p.rows[i] for i in kept))


def poly_equal(p: Polyhedron, q: Polyhedron, dim_cap: int = 12, row_cap: int = 512) -> bool:
    """Exact solution-set equality via mutual vertex/ray comparison.

    Vertex and extreme-ray sets are intrinsic to a pointed polyhedron, so
    equality of both (canonically scaled) decides set equality. Two
    infeasible systems are equal.
    """
    if p.vars != q.vars:
        raise ValueError("poly_equal requires identical variable tuples")
    vp = vertices(p, dim_cap, row_cap)
    vq = vertices(q, dim_cap, row_cap)
    if vp.is_empty or vq.is_empty:
        return vp.is_empty and vq.is_empty
    return vp.points == vq.points and vp.rays == vq.rays
