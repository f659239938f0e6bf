"""Convex hulls of rank-1 matrix sets with linear side constraints.

Covers: the single-constraint hull, the extended formulation for rank-1
constraint matrices sharing a positive column factor, row/column-sum bounded
sets (with optional aggregate bounds), their exponential inequality families
and O(n1*n2) separation oracles, a certified numeric optimizer for the
two-constraint / structured multi-constraint case, and the exact witness
family showing the 2x2 row-and-column hull is not polyhedral.

Matrices are indexed 1-based as W[i,j] throughout, matching the polyhedron
variable names used by the exact kernel.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .polyhedra import EQ, GE, LE, Polyhedron, exact_lp

__all__ = [
    "RowColBounds", "GeneralRank1Set", "MultRank1Data", "Partition", "CutInequality",
    "NotBounded", "RecessionConditionViolated", "FamilyCapExceeded",
    "NoLowerBounds", "StructureMismatch", "OutOfRange", "Infeasible",
    "hull_single_constraint",
    "build_ext_multrank1", "build_ext_row", "build_ext_rowplus",
    "build_ext_col", "build_ext_colplus",
    "hull_inequalities_row", "hull_inequalities_col", "ratio_inequalities_row",
    "hull_system_row", "hull_system_col",
    "separate_row", "separate_rowplus", "separate_col", "separate_colplus",
    "all_partitions", "brute_force_separate",
    "optimize_rank1_small_support", "Thm3Structure",
    "witness_matrix", "thm4_witness_check",
    "wname", "tname",
]


class NotBounded(Exception):
    pass


class RecessionConditionViolated(Exception):
    pass


class FamilyCapExceeded(Exception):
    pass


class NoLowerBounds(Exception):
    pass


class StructureMismatch(Exception):
    pass


class OutOfRange(Exception):
    pass


class Infeasible(Exception):
    pass


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def wname(i: int, j: int) -> str:
    return f"W[{i},{j}]"


def tname(j: int) -> str:
    return f"t[{j}]"


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RowColBounds:
    """Per-row sum bounds (l, u) and optional aggregate total-sum bounds."""

    n1: int
    n2: int
    l: tuple[Fraction, ...]
    u: tuple[Fraction, ...]
    agg_L: Fraction | None = None
    agg_U: Fraction | None = None

    @staticmethod
    def make(n2: int, l: Sequence, u: Sequence, agg_L=None, agg_U=None) -> "RowColBounds":
        lf = tuple(_frac(x) for x in l)
        uf = tuple(_frac(x) for x in u)
        if len(lf) != len(uf):
            raise ValueError("l and u must have equal length")
        for li, ui in zip(lf, uf):
            if not (0 <= li <= ui):
                raise ValueError("need 0 <= l <= u componentwise")
        L = None if agg_L is None else _frac(agg_L)
        U = None if agg_U is None else _frac(agg_U)
        if (L is not None or U is not None) and U is None:
            raise ValueError("aggregate bounds require agg_U")
        if L is not None and U is not None and L > U:
            raise ValueError("need agg_L <= agg_U")
        return RowColBounds(len(lf), n2, lf, uf, L, U)

    @property
    def has_agg(self) -> bool:
        return self.agg_U is not None

    def normalized(self) -> "RowColBounds":
        """Apply the standing normalizations: U <= sum(u), u_i <= U, L >= 0."""
        if not self.has_agg:
            return self
        U = min(self.agg_U, sum(self.u, Fraction(0)))
        u = tuple(min(ui, U) for ui in self.u)
        l = tuple(min(li, ui) for li, ui in zip(self.l, u))
        L = Fraction(0) if self.agg_L is None else max(self.agg_L, Fraction(0))
        if L > U:
            raise ValueError("aggregate bounds empty after normalization")
        return RowColBounds(self.n1, self.n2, l, u, L, U)



@dataclass(frozen=True)
class GeneralRank1Set:
    """Nonnegative rank<=1 matrices with <A^k, W> <= b_k side constraints."""

    n1: int
    n2: int
    constraints: tuple[tuple[tuple[tuple[Fraction, ...], ...], Fraction], ...]

    @staticmethod
    def make(constraints: Iterable[tuple[Sequence[Sequence], object]]) -> "GeneralRank1Set":
        out = []
        n1 = n2 = None
        for A, b in constraints:
            Af = tuple(tuple(_frac(x) for x in row) for row in A)
            if n1 is None:
                n1, n2 = len(Af), len(Af[0])
            if len(Af) != n1 or any(len(r) != n2 for r in Af):
                raise ValueError("inconsistent constraint matrix dimensions")
            out.append((Af, _frac(b)))
        if not out:
            raise ValueError("at least one constraint required")
        return GeneralRank1Set(n1, n2, tuple(out))


@dataclass(frozen=True)
class MultRank1Data:
    """Constraint data A^k = alpha^k beta^T with beta > 0 and a recession
    condition guaranteeing boundedness."""

    alphas: tuple[tuple[Fraction, ...], ...]
    beta: tuple[Fraction, ...]
    b: tuple[Fraction, ...]

    @staticmethod
    def make(alphas: Sequence[Sequence], beta: Sequence, b: Sequence) -> "MultRank1Data":
        al = tuple(tuple(_frac(x) for x in a) for a in alphas)
        be = tuple(_frac(x) for x in beta)
        bb = tuple(_frac(x) for x in b)
        if len(al) != len(bb):
            raise ValueError("need one rhs per alpha")
        n1 = len(al[0])
        if any(len(a) != n1 for a in al):
            raise ValueError("alpha length mismatch")
        if any(x <= 0 for x in be):
            raise ValueError("beta must be strictly positive")
        _check_recession(al, n1)
        return MultRank1Data(al, be, bb)

    @property
    def n1(self) -> int:
        return len(self.alphas[0])

    @property
    def n2(self) -> int:
        return len(self.beta)

    @property
    def m(self) -> int:
        return len(self.alphas)


def _check_recession(alphas, n1):
    # {u >= 0 : alpha^k . u <= 0 forall k} must be {0}; one exact LP decides it
    names = [f"u[{i}]" for i in range(1, n1 + 1)]
    rows = [({names[i]: 1}, GE, 0) for i in range(n1)]
    rows += [({names[i]: a for i, a in enumerate(al) if a != 0}, LE, 0) for al in alphas]
    rows.append(({n: 1 for n in names}, LE, 1))
    p = Polyhedron.make(names, rows)
    r = exact_lp(p, {n: 1 for n in names}, "max")
    if r.status != "optimal" or r.value != 0:
        raise RecessionConditionViolated(
            "recession cone of the alpha system contains a nonzero ray")


@dataclass(frozen=True)
class Partition:
    """Assignment of column indices (1..n2) to classes 0..n1; class 0 is the
    aggregate class and only appears in the aggregate-bound families."""

    classes: tuple[int, ...]    # classes[j-1] = class of column j

    def members(self, cls: int) -> tuple[int, ...]:
        return tuple(j + 1 for j, c in enumerate(self.classes) if c == cls)


def all_partitions(n2: int, classes: Sequence[int]) -> Iterable[Partition]:
    for assign in itertools.product(classes, repeat=n2):
        yield Partition(tuple(assign))


@dataclass(frozen=True)
class CutInequality:
    coeffs: tuple[tuple[tuple[int, int], Fraction], ...]  # sorted ((i,j), c)
    sense: str
    rhs: Fraction
    family: str

    @staticmethod
    def make(coeffs: dict, sense: str, rhs, family: str) -> "CutInequality":
        cc = tuple(sorted(((ij, _frac(c)) for ij, c in coeffs.items() if c != 0)))
        return CutInequality(cc, sense, _frac(rhs), family)

    def coeff_dict(self) -> dict:
        return dict(self.coeffs)

    def canonical_text(self) -> str:
        terms = " + ".join(f"{c}*W[{i},{j}]" for (i, j), c in self.coeffs)
        return f"{self.family}: {terms or '0'} {self.sense} {self.rhs}"

    def evaluate(self, W) -> Fraction:
        return sum((c * _frac(W[i - 1][j - 1]) for (i, j), c in self.coeffs), Fraction(0))

    def satisfied_by(self, W) -> bool:
        v = self.evaluate(W)
        return v <= self.rhs if self.sense == LE else v >= self.rhs

    def as_row(self):
        return ({wname(i, j): c for (i, j), c in self.coeffs}, self.sense, self.rhs)


# ---------------------------------------------------------------------------
# hull constructions
# ---------------------------------------------------------------------------

def hull_single_constraint(s: GeneralRank1Set) -> Polyhedron:
    """Hull for a single strictly positive constraint: the linear relaxation."""
    if len(s.constraints) != 1:
        raise ValueError("exactly one constraint required")
    A, b = s.constraints[0]
    if any(x <= 0 for row in A for x in row):
        raise NotBounded("single-constraint hull needs all A entries > 0")
    names = [wname(i, j) for i in range(1, s.n1 + 1) for j in range(1, s.n2 + 1)]
    rows = [({n: 1}, GE, 0) for n in names]
    rows.append(({wname(i + 1, j + 1): A[i][j] for i in range(s.n1) for j in range(s.n2)},
                 LE, b))
    return Polyhedron.make(names, rows)


def build_ext_multrank1(d: MultRank1Data) -> Polyhedron:
    """Extended formulation over (W, t): sum_j t_j = 1,
    sum_i alpha_i^k beta_j W_ij <= b_k t_j, t >= 0, W >= 0."""
    n1, n2 = d.n1, d.n2
    names = [wname(i, j) for i in range(1, n1 + 1) for j in range(1, n2 + 1)]
    names += [tname(j) for j in range(1, n2 + 1)]
    rows = [({tname(j): 1 for j in range(1, n2 + 1)}, EQ, 1)]
    for k, (alpha, bk) in enumerate(zip(d.alphas, d.b)):
        for j in range(1, n2 + 1):
            cc = {wname(i + 1, j): a * d.beta[j - 1] for i, a in enumerate(alpha) if a != 0}
            cc[tname(j)] = cc.get(tname(j), Fraction(0)) - bk
            rows.append((cc, LE, 0))
    rows += [({tname(j): 1}, GE, 0) for j in range(1, n2 + 1)]
    rows += [({n: 1}, GE, 0) for n in names[:n1 * n2]]
    return Polyhedron.make(names, rows)


def _row_multdata(b: RowColBounds) -> MultRank1Data:
    nb = b.normalized() if b.has_agg else b
    n1 = nb.n1
    e = lambda i: tuple(Fraction(1 if k == i else 0) for k in range(n1))
    alphas = [e(i) for i in range(n1)] + [tuple(-x for x in e(i)) for i in range(n1)]
    rhs = list(nb.u) + [-li for li in nb.l]
    if nb.has_agg:
        alphas.append(tuple(Fraction(1) for _ in range(n1)))
        rhs.append(nb.agg_U)
        alphas.append(tuple(Fraction(-1) for _ in range(n1)))
        rhs.append(-(nb.agg_L or Fraction(0)))
    beta = tuple(Fraction(1) for _ in range(nb.n2))
    return MultRank1Data.make(alphas, beta, rhs)


def build_ext_row(b: RowColBounds) -> Polyhedron:
    """Row-bound specialization of the multrank1 extended formulation."""
    if b.has_agg:
        raise ValueError("use build_ext_rowplus for aggregate bounds")
    return build_ext_multrank1(_row_multdata(b))


def build_ext_rowplus(b: RowColBounds) -> Polyhedron:
    if not b.has_agg:
        raise ValueError("aggregate bounds required")
    return build_ext_multrank1(_row_multdata(b))


def _transpose_poly(p: Polyhedron, n1: int, n2: int) -> Polyhedron:
    ren = {wname(i, j): wname(j, i) for i in range(1, n1 + 1) for j in range(1, n2 + 1)}
    q = p.rename(ren)
    # reorder vars canonically: W[1,1..], ..., then t's
    order = [wname(i, j) for i in range(1, n2 + 1) for j in range(1, n1 + 1)]
    order += [v for v in q.vars if not v.startswith("W[")]
    pos = {v: k for k, v in enumerate(order)}
    return Polyhedron(tuple(sorted(q.vars, key=pos.get)), q.rows)


def build_ext_col(b: RowColBounds) -> Polyhedron:
    """Column-bound variant: transpose wrapper, ratio variables per row."""
    return _transpose_poly(build_ext_row(b), b.n1, b.n2)


def build_ext_colplus(b: RowColBounds) -> Polyhedron:
    return _transpose_poly(build_ext_rowplus(b), b.n1, b.n2)


# ---------------------------------------------------------------------------
# inequality families
# ---------------------------------------------------------------------------

def hull_inequalities_row(b: RowColBounds, cap: int = 10 ** 6) -> list[CutInequality]:
    """Full hull description of the row-bounded set in the original space.

    Upper/lower partition families, ratio inequalities, nonnegativity, and
    zero-fixings for rows with u_i = 0. With aggregate bounds present the
    partition families gain class 0 scaled by 1/U (upper) and 1/L (lower,
    only when L > 0: the class-0 lower terms are undefined at L = 0 and the
    family degenerates to the plain lower partitions).
    """
    nb = b.normalized() if b.has_agg else b
    n1, n2 = nb.n1, nb.n2
    active = [i for i in range(1, n1 + 1) if nb.u[i - 1] > 0]
    zero_rows = [i for i in range(1, n1 + 1) if nb.u[i - 1] == 0]
    I = [i for i in active if nb.l[i - 1] > 0]
    L = nb.agg_L if nb.has_agg else None
    U = nb.agg_U if nb.has_agg else None

    upper_classes = ([0] if nb.has_agg else []) + active
    lower_classes = ([0] if (L is not None and L > 0) else []) + I
    n_upper = len(upper_classes) ** n2 if active else 0
    n_lower = len(lower_classes) ** n2 if lower_classes else 0
    if n_upper + n_lower > cap:
        raise FamilyCapExceeded(f"{n_upper + n_lower} partition inequalities exceed cap {cap}")

    cuts: list[CutInequality] = []
    for i in zero_rows:
        for j in range(1, n2 + 1):
            cuts.append(CutInequality.make({(i, j): Fraction(1)}, LE, 0, "fix"))
    for i in range(1, n1 + 1):
        for j in range(1, n2 + 1):
            cuts.append(CutInequality.make({(i, j): Fraction(1)}, GE, 0, "nonneg"))

    if active:
        for part in all_partitions(n2, upper_classes):
            coeffs = {}
            for j, cls in enumerate(part.classes, start=1):
                if cls == 0:
                    for i in active:
                        coeffs[(i, j)] = Fraction(1) / U
                else:
                    coeffs[(cls, j)] = Fraction(1) / nb.u[cls - 1]
            cuts.append(CutInequality.make(
                coeffs, LE, 1, "rowplusconv1" if nb.has_agg else "rowconv1"))
    if lower_classes:
        fam = "rowplusconv2" if 0 in lower_classes else "rowconv2"
        for part in all_partitions(n2, lower_classes):
            coeffs = {}
            for j, cls in enumerate(part.classes, start=1):
                if cls == 0:
                    for i in active:
                        coeffs[(i, j)] = Fraction(1) / L
                else:
                    coeffs[(cls, j)] = Fraction(1) / nb.l[cls - 1]
            cuts.append(CutInequality.make(coeffs, GE, 1, fam))
    cuts.extend(ratio_inequalities_row(nb))
    return cuts


def ratio_inequalities_row(b: RowColBounds) -> list[CutInequality]:
    """The polynomially many ratio inequalities of the hull description:
    plain row-to-row ratios, plus (with aggregate bounds) the cross terms
    between a per-row bound and an aggregate bound. The cross terms survive
    the projection of the extended formulation whenever U < sum(u) or
    L > sum(l) and are not implied by the plain ratio rows."""
    nb = b.normalized() if b.has_agg else b
    n1, n2 = nb.n1, nb.n2
    active = [i for i in range(1, n1 + 1) if nb.u[i - 1] > 0]
    I = [i for i in active if nb.l[i - 1] > 0]
    L = nb.agg_L if nb.has_agg else None
    U = nb.agg_U if nb.has_agg else None
    cuts: list[CutInequality] = []
    for i1 in I:
        for i2 in active:
            if i1 == i2:
                continue
            for j in range(1, n2 + 1):
                # l_{i1} W_{i2 j} <= u_{i2} W_{i1 j}
                cuts.append(CutInequality.make(
                    {(i2, j): nb.l[i1 - 1], (i1, j): -nb.u[i2 - 1]}, LE, 0, "rowconv3"))
    if nb.has_agg:
        for i1 in I:
            for j in range(1, n2 + 1):
                # l_{i1} * sum_i W_ij <= U * W_{i1 j}   (from l t_j <= W, sum <= U t_j)
                coeffs = {(i, j): nb.l[i1 - 1] for i in active}
                coeffs[(i1, j)] = coeffs.get((i1, j), Fraction(0)) - U
                cuts.append(CutInequality.make(coeffs, LE, 0, "ratio_aggU"))
        if L is not None and L > 0:
            for i1 in active:
                for j in range(1, n2 + 1):
                    # L * W_{i1 j} <= u_{i1} * sum_i W_ij
                    coeffs = {(i, j): -nb.u[i1 - 1] for i in active}
                    coeffs[(i1, j)] = coeffs.get((i1, j), Fraction(0)) + L
                    cuts.append(CutInequality.make(coeffs, LE, 0, "ratio_aggL"))
    return cuts


def hull_inequalities_col(b: RowColBounds, cap: int = 10 ** 6) -> list[CutInequality]:
    return [_transpose_cut(c) for c in hull_inequalities_row(b, cap)]


def _transpose_cut(c: CutInequality) -> CutInequality:
    return CutInequality.make({(j, i): v for (i, j), v in c.coeffs}, c.sense, c.rhs, c.family)


def hull_system_row(b: RowColBounds, cap: int = 10 ** 6) -> Polyhedron:
    """The hull description as a Polyhedron over W[i,j]."""
    n1, n2 = b.n1, b.n2
    names = [wname(i, j) for i in range(1, n1 + 1) for j in range(1, n2 + 1)]
    return Polyhedron.make(names, [c.as_row() for c in hull_inequalities_row(b, cap)])


def hull_system_col(b: RowColBounds, cap: int = 10 ** 6) -> Polyhedron:
    n1, n2 = b.n1, b.n2
    names = [wname(j, i) for j in range(1, n2 + 1) for i in range(1, n1 + 1)]
    return Polyhedron.make(names, [c.as_row() for c in hull_inequalities_col(b, cap)])


# ---------------------------------------------------------------------------
# separation oracles
# ---------------------------------------------------------------------------

def _as_matrix(W_hat, n1, n2, exact):
    conv = _frac if exact else float
    M = [[conv(W_hat[i][j]) for j in range(n2)] for i in range(n1)]
    if any(x < 0 for row in M for x in row):
        raise ValueError("separation requires W_hat >= 0")
    return M


def _detect_exact(W_hat):
    return all(isinstance(x, (int, Fraction)) for row in W_hat for x in row)


def separate_row(W_hat, b: RowColBounds, side: str, exact: bool | None = None,
                 count_comparisons: bool = False):
    """Most-violated upper/lower partition inequality, or None if all hold.

    Greedy per-column argmax (upper, ratios W_ij/u_i) or argmin over rows
    with positive lower bound (lower, ratios W_ij/l_i); ties break to the
    smallest row index. O(n1*n2)."""
    return _separate(W_hat, b, side, False, exact, count_comparisons)


def separate_rowplus(W_hat, b: RowColBounds, side: str, exact: bool | None = None,
                     count_comparisons: bool = False):
    """As separate_row, but a column may join class 0 when its aggregate term
    (column sum over 1/U, resp. 1/L) dominates; ties prefer class 0."""
    if not b.has_agg:
        raise ValueError("separate_rowplus requires aggregate bounds")
    return _separate(W_hat, b, side, True, exact, count_comparisons)


def _separate(W_hat, b, side, plus, exact, count_comparisons):
    if side not in ("upper", "lower"):
        raise ValueError("side must be 'upper' or 'lower'")
    nb = b.normalized() if b.has_agg else b
    if exact is None:
        exact = _detect_exact(W_hat)
    M = _as_matrix(W_hat, nb.n1, nb.n2, exact)
    conv = _frac if exact else float
    n1, n2 = nb.n1, nb.n2
    active = [i for i in range(n1) if nb.u[i] > 0]
    ncmp = 0

    if side == "upper":
        bound = [conv(nb.u[i]) for i in range(n1)]
        agg = conv(nb.agg_U) if plus else None
        better = lambda a, bb: a > bb
    else:
        I = [i for i in range(n1) if nb.l[i] > 0]
        if plus:
            L = nb.agg_L or Fraction(0)
            if L <= 0 and not I:
                raise NoLowerBounds("lower separation needs positive lower bounds")
            agg = conv(L) if L > 0 else None
        else:
            if not I:
                raise NoLowerBounds("lower separation needs rows with l_i > 0")
            agg = None
        active = I
        bound = [conv(nb.l[i]) if i in I else None for i in range(n1)]
        better = lambda a, bb: a < bb

    if not active and agg is None:
        return (None, ncmp) if count_comparisons else None

    theta = conv(0)
    assign = []
    for j in range(n2):
        best_i, best_r = None, None
        for i in active:
            r = M[i][j] / bound[i]
            if best_r is None:
                best_i, best_r = i, r
            else:
                ncmp += 1
                if better(r, best_r):
                    best_i, best_r = i, r
        if agg is not None:
            col = sum(M[i][j] for i in range(n1))
            aggval = col / agg
            if best_r is None:
                best_i, best_r = -1, aggval
            else:
                ncmp += 1
                # appendix rule: class 0 on ties
                if not better(best_r, aggval):
                    best_i, best_r = -1, aggval
        assign.append(best_i)
        theta = theta + best_r
    violated = theta > 1 if side == "upper" else theta < 1
    result = None
    if violated:
        coeffs = {}
        for j, i in enumerate(assign, start=1):
            if i == -1:
                denom = nb.agg_U if side == "upper" else nb.agg_L
                for ii in range(n1):
                    if nb.u[ii] > 0:
                        coeffs[(ii + 1, j)] = Fraction(1) / denom
            else:
                denom = nb.u[i] if side == "upper" else nb.l[i]
                coeffs[(i + 1, j)] = Fraction(1) / denom
        if side == "upper":
            fam = "rowplusconv1" if plus else "rowconv1"
            cut = CutInequality.make(coeffs, LE, 1, fam)
            viol = theta - 1
        else:
            fam = "rowplusconv2" if (plus and agg is not None) else "rowconv2"
            cut = CutInequality.make(coeffs, GE, 1, fam)
            viol = 1 - theta
        result = (cut, viol)
    return (result, ncmp) if count_comparisons else result


def separate_col(W_hat, b: RowColBounds, side: str, exact: bool | None = None):
    res = separate_row(_transpose_matrix(W_hat), b, side, exact)
    return None if res is None else (_transpose_cut(res[0]), res[1])


def separate_colplus(W_hat, b: RowColBounds, side: str, exact: bool | None = None):
    res = separate_rowplus(_transpose_matrix(W_hat), b, side, exact)
    return None if res is None else (_transpose_cut(res[0]), res[1])


def _transpose_matrix(W):
    return [list(col) for col in zip(*W)]


def brute_force_separate(W_hat, b: RowColBounds, side: str, plus: bool):
    """Exhaustive most-violated partition inequality; exact-arithmetic oracle
    for testing the greedy separation."""
    nb = b.normalized() if b.has_agg else b
    exact = _detect_exact(W_hat)
    M = _as_matrix(W_hat, nb.n1, nb.n2, exact)
    active = [i for i in range(1, nb.n1 + 1) if nb.u[i - 1] > 0]
    if side == "upper":
        classes = ([0] if plus else []) + active
        denom0 = nb.agg_U if plus else None
    else:
        I = [i for i in active if nb.l[i - 1] > 0]
        L = (nb.agg_L or Fraction(0)) if plus else None
        classes = ([0] if (plus and L and L > 0) else []) + I
        denom0 = L if (plus and L and L > 0) else None
    if not classes:
        return None
    best = None
    for part in all_partitions(nb.n2, classes):
        theta = 0
        for j, cls in enumerate(part.classes, start=1):
            if cls == 0:
                col = sum(M[i - 1][j - 1] for i in range(1, nb.n1 + 1))
                theta += col / (float(denom0) if not exact else denom0)
            else:
                d = nb.u[cls - 1] if side == "upper" else nb.l[cls - 1]
                theta += M[cls - 1][j - 1] / (float(d) if not exact else d)
        viol = theta - 1 if side == "upper" else 1 - theta
        if best is None or viol > best[1]:
            best = (part, viol)
    part, viol = best
    if viol <= 0:
        return None
    return part, viol


# ---------------------------------------------------------------------------
# optimization over two-constraint / structured sets (Thm. 2 / Thm. 3 style)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Thm3Structure:
    """A^k = alpha_k beta beta^T + gamma_k delta delta^T with alpha, gamma >= 0
    scalars and beta, delta > 0 vectors (square matrices)."""

    alphas: tuple[Fraction, ...]
    gammas: tuple[Fraction, ...]
    beta: tuple[Fraction, ...]
    delta: tuple[Fraction, ...]


def _check_thm3(s: GeneralRank1Set, st: Thm3Structure):
    if s.n1 != s.n2:
        raise StructureMismatch("structured mode needs square matrices")
    if any(x < 0 for x in st.alphas) or any(x < 0 for x in st.gammas):
        raise StructureMismatch("alpha and gamma must be nonnegative")
    if any(x <= 0 for x in st.beta) or any(x <= 0 for x in st.delta):
        raise StructureMismatch("beta and delta must be strictly positive")
    if len(st.alphas) != len(s.constraints):
        raise StructureMismatch("one (alpha, gamma) pair per constraint required")
    n = s.n1
    for (A, _), al, ga in zip(s.constraints, st.alphas, st.gammas):
        for i in range(n):
            for j in range(n):
                if A[i][j] != al * st.beta[i] * st.beta[j] + ga * st.delta[i] * st.delta[j]:
                    raise StructureMismatch("constraint matrix does not match structure")


def _check_bounded(s: GeneralRank1Set):
    names = [wname(i, j) for i in range(1, s.n1 + 1) for j in range(1, s.n2 + 1)]
    rows = [({n: 1}, GE, 0) for n in names]
    for A, _ in s.constraints:
        rows.append(({wname(i + 1, j + 1): A[i][j] for i in range(s.n1)
                      for j in range(s.n2) if A[i][j] != 0}, LE, 0))
    rows.append(({n: 1 for n in names}, LE, 1))
    p = Polyhedron.make(names, rows)
    r = exact_lp(p, {n: 1 for n in names}, "max")
    if r.status != "optimal" or r.value != 0:
        raise NotBounded("recession cone of the relaxation contains a nonzero ray")


def _lp_1d_interval(coefs, rhs):
    """Feasible interval of {w >= 0 : coefs[k] * w <= rhs[k]}; None if empty."""
    lo, hi = 0.0, float("inf")
    for a, bb in zip(coefs, rhs):
        if a > 0:
            hi = min(hi, bb / a)
        elif a < 0:
            lo = max(lo, bb / a)
        elif bb < 0:
            return None
    if lo > hi + 1e-15:
        return None
    return lo, hi


def _max_2var_lp(obj, rows):
    """max obj.u over {u >= 0, a.u <= b for (a, b) in rows}; returns (val, u).

    Candidate basic points from all constraint pairs (including the axes);
    assumes boundedness (guaranteed by the caller's recession check)."""
    cons = [((1.0, 0.0), None), ((0.0, 1.0), None)]  # axes as u_i = 0 planes
    lines = [((a1, a2), bb) for (a1, a2), bb in rows]
    cand = []
    if all(bb >= -1e-12 for _, bb in lines):
        cand.append((0.0, 0.0))
    planes = [((1.0, 0.0), 0.0), ((0.0, 1.0), 0.0)] + [(a, bb) for a, bb in lines]
    npl = len(planes)
    for p1 in range(npl):
        (a11, a12), b1 = planes[p1]
        for p2 in range(p1 + 1, npl):
            (a21, a22), b2 = planes[p2]
            det = a11 * a22 - a12 * a21
            if abs(det) < 1e-14:
                continue
            u1 = (b1 * a22 - b2 * a12) / det
            u2 = (a11 * b2 - a21 * b1) / det
            cand.append((u1, u2))
    best, bu = None, None
    for u1, u2 in cand:
        if u1 < -1e-9 or u2 < -1e-9:
            continue
        scale = 1.0 + abs(u1) + abs(u2)
        if any(a1 * u1 + a2 * u2 > bb + 1e-9 * scale for (a1, a2), bb in lines):
            continue
        v = obj[0] * max(u1, 0.0) + obj[1] * max(u2, 0.0)
        if best is None or v > best:
            best, bu = v, (max(u1, 0.0), max(u2, 0.0))
    return best, bu


def optimize_rank1_small_support(s: GeneralRank1Set, c, tol: float = 1e-6,
                                 structure: Thm3Structure | None = None,
                                 grid: int = 1024, refine_iters: int = 40,
                                 refine_cells: int = 5):
    """Maximize <c, W> over the rank-1 set by 2x2-support enumeration.

    Every extreme point has a nonzero submatrix of size at most 2x2, so the
    search runs over all single-row, single-column, and 2x2 supports; the 2x2
    case is parameterized as W = u (t, 1-t) with an adaptive t-grid plus
    golden-section refinement around the best cells."""
    if structure is not None:
        _check_thm3(s, structure)
    elif len(s.constraints) > 2:
        raise StructureMismatch(
            "more than two constraints require the structured form")
    _check_bounded(s)
    n1, n2 = s.n1, s.n2
    cf = [[float(c[i][j]) for j in range(n2)] for i in range(n1)]
    A = [[[float(x) for x in row] for row in Ak] for Ak, _ in s.constraints]
    bvec = [float(bk) for _, bk in s.constraints]

    best_val = None
    best_W = None

    def consider(val, W):
        nonlocal best_val, best_W
        if val is not None and (best_val is None or val > best_val):
            best_val, best_W = val, W

    if all(bk >= 0 for bk in bvec):
        consider(0.0, [[0.0] * n2 for _ in range(n1)])

    # single-row and single-column supports: plain LPs, solved exactly
    for i in range(n1):
        val, vec = _line_support_lp(s, c, row=i)
        if val is not None:
            W = [[0.0] * n2 for _ in range(n1)]
            W[i] = [float(x) for x in vec]
            consider(val, W)
    for j in range(n2):
        val, vec = _line_support_lp(s, c, col=j)
        if val is not None:
            W = [[0.0] * n2 for _ in range(n1)]
            for i in range(n1):
                W[i][j] = float(vec[i])
            consider(val, W)

    # 2x2 supports
    for i1 in range(n1):
        for i2 in range(i1 + 1, n1):
            for j1 in range(n2):
                for j2 in range(j1 + 1, n2):
                    val, W = _best_2x2(cf, A, bvec, i1, i2, j1, j2, n1, n2,
                                       grid, refine_iters, refine_cells)
                    consider(val, W)

    if best_val is None:
        raise Infeasible("no feasible rank-1 point found")
    return best_val, best_W


def _line_support_lp(s: GeneralRank1Set, c, row=None, col=None):
    if row is not None:
        names = [f"v[{j}]" for j in range(s.n2)]
        obj = {names[j]: _frac(c[row][j]) for j in range(s.n2)}
        rows = [({names[j]: 1}, GE, 0) for j in range(s.n2)]
        for A, b in s.constraints:
            rows.append(({names[j]: A[row][j] for j in range(s.n2) if A[row][j] != 0},
                         LE, b))
    else:
        names = [f"v[{i}]" for i in range(s.n1)]
        obj = {names[i]: _frac(c[i][col]) for i in range(s.n1)}
        rows = [({names[i]: 1}, GE, 0) for i in range(s.n1)]
        for A, b in s.constraints:
            rows.append(({names[i]: A[i][col] for i in range(s.n1) if A[i][col] != 0},
                         LE, b))
    r = exact_lp(Polyhedron.make(names, rows), obj, "max")
    if r.status != "optimal":
        return None, None
    return float(r.value), [r.point[n] for n in names]


def _best_2x2(cf, A, bvec, i1, i2, j1, j2, n1, n2, grid, refine_iters, refine_cells):
    m = len(A)

    def value_at(t):
        rows = []
        for k in range(m):
            a1 = t * A[k][i1][j1] + (1 - t) * A[k][i1][j2]
            a2 = t * A[k][i2][j1] + (1 - t) * A[k][i2][j2]
            rows.append(((a1, a2), bvec[k]))
        obj = (t * cf[i1][j1] + (1 - t) * cf[i1][j2],
               t * cf[i2][j1] + (1 - t) * cf[i2][j2])
        return _max_2var_lp(obj, rows)

    ts = [k / (grid - 1) for k in range(grid)]
    vals = []
    for t in ts:
        v, _ = value_at(t)
        vals.append(v if v is not None else float("-inf"))
    order = sorted(range(grid), key=lambda k: -vals[k])[:refine_cells]
    phi = (5 ** 0.5 - 1) / 2
    best_t, best_v = None, float("-inf")
    for k in order:
        if vals[k] == float("-inf"):
            continue
        lo = ts[max(0, k - 1)]
        hi = ts[min(grid - 1, k + 1)]
        a, b = lo, hi
        x1 = b - phi * (b - a)
        x2 = a + phi * (b - a)
        f1 = value_at(x1)[0] or float("-inf")
        f2 = value_at(x2)[0] or float("-inf")
        for _ in range(refine_iters):
            if f1 < f2:
                a, x1, f1 = x1, x2, f2
                x2 = a + phi * (b - a)
                f2 = value_at(x2)[0] or float("-inf")
            else:
                b, x2, f2 = x2, x1, f1
                x1 = b - phi * (b - a)
                f1 = value_at(x1)[0] or float("-inf")
        for t in (a, (a + b) / 2, b, ts[k]):
            v, _ = value_at(t)
            if v is not None and v > best_v:
                best_v, best_t = v, t
    if best_t is None:
        return None, None
    v, u = value_at(best_t)
    W = [[0.0] * n2 for _ in range(n1)]
    W[i1][j1] = u[0] * best_t
    W[i1][j2] = u[0] * (1 - best_t)
    W[i2][j1] = u[1] * best_t
    W[i2][j2] = u[1] * (1 - best_t)
    return v, W


# ---------------------------------------------------------------------------
# non-polyhedrality witness (2x2 row & column bounds)
# ---------------------------------------------------------------------------

WITNESS_ROW_L = (Fraction(0), Fraction(1))
WITNESS_ROW_U = (Fraction(1), Fraction(1))


def witness_matrix(a: Fraction):
    """W(a) = [[a, a^2/(1-a)], [1-a, a]], the curve of extreme points."""
    a = _frac(a)
    return ((a, a * a / (1 - a)), (1 - a, a))


def thm4_witness_check(a, midpoint_grid: int = 12) -> bool:
    """Verify the witness family at parameter `a` in [0, 1), exactly.

    Checks: (1) the matrix has rank <= 1 (zero determinant); (2) its row and
    column sums match the bound pattern of the 2x2 row & column set with
    l = (0,1), u = (1,1) exactly on the range a <= 1/2 where the curve stays
    inside the box, and correctly leave the box for a > 1/2; (3) the matrix
    is never a convex combination of two distinct family members from the
    comparison grid (strict convexity of a -> a^2/(1-a)).
    """
    a = _frac(a)
    if not (0 <= a < 1):
        raise OutOfRange("parameter must satisfy 0 <= a < 1")
    W = witness_matrix(a)

    det = W[0][0] * W[1][1] - W[0][1] * W[1][0]
    if det != 0:
        return False

    rs = (W[0][0] + W[0][1], W[1][0] + W[1][1])
    cs = (W[0][0] + W[1][0], W[0][1] + W[1][1])
    # free sums sit at a/(1-a), pinned sums at exactly 1; inside the unit
    # box exactly when a <= 1/2
    inside = (0 <= rs[0] <= 1) and rs[1] == 1 and cs[0] == 1 and (0 <= cs[1] <= 1)
    expected_inside = a <= Fraction(1, 2)
    if inside != expected_inside:
        return False
    if rs[1] != 1 or cs[0] != 1 or min(rs[0], cs[1]) < 0:
        return False

    f = lambda x: x * x / (1 - x)
    pts = [Fraction(k, midpoint_grid) for k in range(midpoint_grid)]
    for a1 in pts:
        for a2 in pts:
            if not (a1 < a < a2):
                continue
            lam = (a2 - a) / (a2 - a1)
            combo = lam * f(a1) + (1 - lam) * f(a2)
            if combo <= f(a):
                return False  # strict convexity violated
    return True
