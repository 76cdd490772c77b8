"""Symbolic estimands over observational kernels and their discrete evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainGap, MalformedQuery

__all__ = [
    "Estimand",
    "KernelTerm",
    "Conditional",
    "Marginal",
    "Product",
    "Fail",
    "FAIL",
    "Table",
    "evaluate_estimand",
    "estimand_from_json",
]


def _names(s, order=None) -> str:
    if order is None:
        return ",".join(sorted(s))
    return ",".join(sorted(s, key=order.get))


class Estimand:
    """Base class of the expression tree."""

    @property
    def targets(self) -> frozenset:
        raise NotImplementedError

    @property
    def is_fail(self) -> bool:
        return False

    def render(self, order: Mapping[str, int] | None = None) -> str:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.render()


@dataclass(frozen=True)
class KernelTerm(Estimand):
    """``P(target | given ; do(do))`` read off the observed family."""

    target: frozenset
    given: frozenset = frozenset()
    do: frozenset = frozenset()

    def __post_init__(self):
        for name in ("target", "given", "do"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))

    @property
    def targets(self) -> frozenset:
        return self.target

    def render(self, order=None) -> str:
        s = "P(" + _names(self.target, order)
        if self.given:
            s += " | " + _names(self.given, order)
        if self.do:
            s += " ; do(" + _names(self.do, order) + ")"
        return s + ")"

    def to_json(self) -> dict:
        return {
            "type": "kernel",
            "target": sorted(self.target),
            "given": sorted(self.given),
            "do": sorted(self.do),
        }


@dataclass(frozen=True)
class Conditional(Estimand):
    """Conditional of ``target`` given ``given`` under the kernel ``child``."""

    child: Estimand
    target: frozenset
    given: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "target", frozenset(self.target))
        object.__setattr__(self, "given", frozenset(self.given))

    @property
    def targets(self) -> frozenset:
        return self.target

    def render(self, order=None) -> str:
        s = "[" + self.child.render(order) + "](" + _names(self.target, order)
        if self.given:
            s += " | " + _names(self.given, order)
        return s + ")"

    def to_json(self) -> dict:
        return {
            "type": "conditional",
            "target": sorted(self.target),
            "given": sorted(self.given),
            "child": self.child.to_json(),
        }


@dataclass(frozen=True)
class Marginal(Estimand):
    """Sum (integral) of ``child`` over the variables ``over``."""

    child: Estimand
    over: frozenset

    def __post_init__(self):
        object.__setattr__(self, "over", frozenset(self.over))

    @property
    def targets(self) -> frozenset:
        return self.child.targets - self.over

    def render(self, order=None) -> str:
        inner = self.child.render(order)
        if isinstance(self.child, Product) and len(self.child.factors) > 1:
            inner = "[" + inner + "]"
        return "∫_{" + _names(self.over, order) + "} " + inner

    def to_json(self) -> dict:
        return {"type": "marginal", "over": sorted(self.over), "child": self.child.to_json()}


@dataclass(frozen=True)
class Product(Estimand):
    """Chain product; ``blocks`` records the strongly connected component(s)
    each factor is a kernel for, in the stored order."""

    factors: tuple
    blocks: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        blocks = tuple(frozenset(b) for b in self.blocks) or tuple(f.targets for f in self.factors)
        object.__setattr__(self, "blocks", blocks)
        seen = set()
        for f in self.factors:
            if f.targets & seen:
                raise MalformedQuery("product factors must have disjoint targets")
            seen |= f.targets

    @property
    def targets(self) -> frozenset:
        return frozenset().union(*(f.targets for f in self.factors))

    def render(self, order=None) -> str:
        if not self.factors:
            return "1"
        parts = []
        for f in self.factors:
            s = f.render(order)
            if isinstance(f, Marginal):
                s = "(" + s + ")"
            parts.append(s)
        return " · ".join(parts)

    def to_json(self) -> dict:
        return {
            "type": "product",
            "factors": [f.to_json() for f in self.factors],
            "blocks": [sorted(b) for b in self.blocks],
        }


class Fail(Estimand):
    """Terminal value returned when identification fails."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    @property
    def targets(self) -> frozenset:
        return frozenset()

    @property
    def is_fail(self) -> bool:
        return True

    def render(self, order=None) -> str:
        return "FAIL"

    def to_json(self) -> dict:
        return {"type": "fail"}

    def __repr__(self) -> str:
        return "FAIL"


FAIL = Fail()


def estimand_from_json(d: dict) -> Estimand:
    t = d["type"]
    if t == "kernel":
        return KernelTerm(d["target"], d.get("given", ()), d.get("do", ()))
    if t == "conditional":
        return Conditional(estimand_from_json(d["child"]), d["target"], d.get("given", ()))
    if t == "marginal":
        return Marginal(estimand_from_json(d["child"]), d["over"])
    if t == "product":
        return Product(tuple(estimand_from_json(f) for f in d["factors"]), d.get("blocks", ()))
    if t == "fail":
        return FAIL
    raise MalformedQuery(f"unknown estimand node type {t!r}")


# -- discrete tables ---------------------------------------------------------


class Table:
    """Nonnegative array over named finite variables.

    ``targets`` are the variables the table is a distribution over; the
    remaining variables are parameters (a kernel).
    """

    __slots__ = ("vars", "array", "targets")

    def __init__(self, vars: Sequence[str], array, targets):
        self.vars = tuple(vars)
        self.array = np.asarray(array, dtype=float)
        self.targets = frozenset(targets)
        if self.array.ndim != len(self.vars):
            raise ValueError("array rank does not match variable count")
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("duplicate variable")
        if not self.targets <= set(self.vars):
            raise ValueError("targets must be table variables")

    @property
    def params(self) -> frozenset:
        return frozenset(self.vars) - self.targets

    @property
    def domains(self) -> dict:
        return dict(zip(self.vars, self.array.shape))

    def transpose(self, vars: Sequence[str]) -> "Table":
        vars = tuple(vars)
        if set(vars) != set(self.vars):
            raise ValueError("transpose needs the same variables")
        return Table(vars, np.transpose(self.array, [self.vars.index(v) for v in vars]), self.targets)

    def marginal(self, over) -> "Table":
        over = frozenset(over)
        if not over <= self.targets:
            raise ValueError(f"can only sum out target variables, not {sorted(over - self.targets)}")
        axes = tuple(i for i, v in enumerate(self.vars) if v in over)
        keep = [v for v in self.vars if v not in over]
        return Table(keep, self.array.sum(axis=axes), self.targets - over)

    def conditional(self, target, given=()) -> "Table":
        target, given = frozenset(target), frozenset(given)
        if not target <= self.targets:
            raise ValueError("conditional target must be among table targets")
        if not given <= set(self.vars):
            raise ValueError("conditioning variables must be table variables")
        target = target - given
        num = self.marginal(self.targets - target - given)
        den = num.marginal(target)
        den_b = _broadcast(den, num.vars)
        if np.any(den_b <= 0.0):
            raise DomainGap(f"conditioning on a zero-probability event of {sorted(given)}")
        return Table(num.vars, num.array / den_b, target)

    def multiply(self, other: "Table") -> "Table":
        if self.targets & other.targets:
            raise ValueError("product factors must have disjoint targets")
        doms = self.domains
        for v, n in other.domains.items():
            if doms.setdefault(v, n) != n:
                raise ValueError(f"domain mismatch for {v!r}")
        vars = tuple(self.vars) + tuple(v for v in other.vars if v not in self.vars)
        arr = _broadcast(self, vars) * _broadcast(other, vars)
        return Table(vars, arr, self.targets | other.targets)

    def fix(self, values: Mapping[str, int]) -> "Table":
        """Slice parameter variables at given values."""
        idx = tuple(values.get(v, slice(None)) for v in self.vars)
        keep = [v for v in self.vars if v not in values]
        return Table(keep, self.array[idx], self.targets - set(values))

    def allclose(self, other: "Table", atol: float = 1e-12, mask=None) -> bool:
        return self.max_abs_diff(other, mask=mask) <= atol

    def max_abs_diff(self, other: "Table", mask=None) -> float:
        """Largest pointwise difference after broadcasting both to the union
        of their variables; ``mask`` (a Table of weights) restricts the
        comparison to cells where it is positive."""
        doms = self.domains
        doms.update(other.domains)
        vars = tuple(sorted(doms))
        a = _expand(self, vars, doms)
        b = _expand(other, vars, doms)
        diff = np.abs(a - b)
        if mask is not None:
            m = _expand(mask, vars, doms)
            diff = np.where(m > 0, diff, 0.0)
        return float(diff.max()) if diff.size else 0.0

    def __repr__(self) -> str:
        return f"Table(vars={self.vars}, targets={sorted(self.targets)}, shape={self.array.shape})"


def _broadcast(t: Table, vars: Sequence[str]) -> np.ndarray:
    """View of ``t.array`` with axes ordered like ``vars`` (singleton axes
    for variables ``t`` lacks)."""
    order = [v for v in vars if v in t.vars]
    arr = np.transpose(t.array, [t.vars.index(v) for v in order])
    shape = [arr.shape[order.index(v)] if v in t.vars else 1 for v in vars]
    return arr.reshape(shape)


def _expand(t: Table, vars, doms) -> np.ndarray:
    missing = set(t.vars) - set(vars)
    if missing:
        raise ValueError(f"variables {sorted(missing)} absent from comparison axes")
    return np.broadcast_to(_broadcast(t, vars), [doms[v] for v in vars])


def evaluate_estimand(e: Estimand, joint) -> Table:
    """Evaluate ``e`` on the observed family ``joint`` (a DiscreteJoint or a
    :class:`Table` whose targets are the outputs and parameters the inputs).

    Kernel terms must be observational: their do-set is exactly the input set.
    """
    base = joint if isinstance(joint, Table) else joint.to_table()
    inputs = base.params
    cache: dict = {}

    def ev(node: Estimand) -> Table:
        key = id(node)
        if key in cache:
            return cache[key]
        if isinstance(node, Fail):
            raise MalformedQuery("cannot evaluate FAIL")
        if isinstance(node, KernelTerm):
            if node.do != inputs:
                raise MalformedQuery(
                    f"kernel {node.render()} is not observational (do-set must be {sorted(inputs)})"
                )
            out = base.conditional(node.target, node.given)
        elif isinstance(node, Conditional):
            out = ev(node.child).conditional(node.target, node.given)
        elif isinstance(node, Marginal):
            out = ev(node.child).marginal(node.over)
        elif isinstance(node, Product):
            out = Table((), np.array(1.0), ())
            for f in node.factors:
                out = out.multiply(ev(f))
        else:
            raise MalformedQuery(f"unknown estimand node {node!r}")
        cache[key] = out
        return out

    return ev(e)
