"""Floating-point LP/MILP model container.

Name-stable by construction: variables and constraints keep insertion order,
names are unique, and builders only ever append. The embedded solver and the
MPS/LP exporters consume this structure directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


INF = math.inf


@dataclass
class Var:
    name: str
    lb: float = 0.0
    ub: float = INF
    is_binary: bool = False


@dataclass
class Constraint:
    name: str
    coeffs: dict[str, float]
    sense: str          # "<=", ">=", "="
    rhs: float


@dataclass
class LinearModel:
    name: str = "model"
    vars: list[Var] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[str, float] = field(default_factory=dict)
    sense: str = "min"
    _var_index: dict[str, int] = field(default_factory=dict, repr=False)
    _con_names: set[str] = field(default_factory=set, repr=False)

    def add_var(self, name: str, lb: float = 0.0, ub: float = INF,
                binary: bool = False) -> str:
        if name in self._var_index:
            raise ValueError(f"duplicate variable {name!r}")
        lb, ub = float(lb), float(ub)
        if binary:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        if lb > ub:
            raise ValueError(f"empty bound interval for {name!r}: [{lb}, {ub}]")
        self._var_index[name] = len(self.vars)
        self.vars.append(Var(name, lb, ub, binary))
        return name

    def has_var(self, name: str) -> bool:
        return name in self._var_index

    def var(self, name: str) -> Var:
        return self.vars[self._var_index[name]]

    def add_constraint(self, name: str, coeffs: dict, sense: str, rhs) -> str:
        if name in self._con_names:
            raise ValueError(f"duplicate constraint {name!r}")
        if sense not in ("<=", ">=", "="):
            raise ValueError(f"bad sense {sense!r}")
        cc = {}
        for v, c in coeffs.items():
            if v not in self._var_index:
                raise ValueError(f"constraint {name!r} references unknown variable {v!r}")
            c = float(c)
            if c != 0.0:
                cc[v] = cc.get(v, 0.0) + c
        self._con_names.add(name)
        self.constraints.append(Constraint(name, cc, sense, float(rhs)))
        return name

    def add_range(self, name: str, coeffs: dict, lo, hi) -> None:
        """Emit lo <= expr <= hi as a _lo/_hi row pair (skipping infinities)."""
        lo, hi = float(lo), float(hi)
        if lo == hi:
            self.add_constraint(name + "_eq", coeffs, "=", lo)
            return
        if lo > -INF:
            self.add_constraint(name + "_lo", coeffs, ">=", lo)
        if hi < INF:
            self.add_constraint(name + "_hi", coeffs, "<=", hi)

    def set_objective(self, coeffs: dict, sense: str = "min") -> None:
        if sense != "min":
            raise ValueError("models are minimization by convention")
        for v in coeffs:
            if v not in self._var_index:
                raise ValueError(f"objective references unknown variable {v!r}")
        self.objective = {v: float(c) for v, c in coeffs.items() if float(c) != 0.0}
        self.sense = "min"

    @property
    def binary_names(self) -> list[str]:
        return [v.name for v in self.vars if v.is_binary]

    def num_vars(self) -> int:
        return len(self.vars)

    def num_constraints(self) -> int:
        return len(self.constraints)

    def copy(self) -> "LinearModel":
        m = LinearModel(self.name)
        for v in self.vars:
            m.add_var(v.name, v.lb, v.ub, v.is_binary)
        for c in self.constraints:
            m.add_constraint(c.name, dict(c.coeffs), c.sense, c.rhs)
        m.set_objective(dict(self.objective))
        return m

    def relax_binaries(self) -> "LinearModel":
        m = self.copy()
        for v in m.vars:
            v.is_binary = False
        return m
