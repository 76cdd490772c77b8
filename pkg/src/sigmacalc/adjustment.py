"""Adjustment criteria, including selection bias, and adjustment-set search."""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .calculus import extended_graph
from .dmg import Dmg, NodeKind, indicator
from .errors import CaseMismatch, MalformedSpec, PoolTooLarge
from .separation import Notion, SeparationQuery, separated

__all__ = [
    "AdjustmentSpec",
    "PartialExternalSpec",
    "AdjustmentFormula",
    "Condition",
    "AdjustmentResult",
    "SpecialCase",
    "check_general_adjustment",
    "check_special_case",
    "check_selection_without_external",
    "check_partial_external",
    "find_adjustment_sets",
    "MAX_POOL",
]

MAX_POOL = 16


def _fs(x) -> frozenset:
    if x is None:
        return frozenset()
    if isinstance(x, str):
        return frozenset([x])
    return frozenset(x)


def _disjoint(named: Mapping[str, frozenset]) -> None:
    for (n1, s1), (n2, s2) in itertools.combinations(named.items(), 2):
        if s1 & s2:
            raise MalformedSpec(f"roles '{n1}' and '{n2}' overlap on {sorted(s1 & s2)}")


@dataclass(frozen=True)
class AdjustmentSpec:
    """Role assignment: outcome ``y``, treatment ``x``, context ``c``,
    adjustment sets ``z0`` and ``zplus``, marginalizable ``l``, selection
    ``s`` and default interventions ``w``."""

    y: frozenset
    x: frozenset
    c: frozenset = frozenset()
    z0: frozenset = frozenset()
    zplus: frozenset = frozenset()
    l: frozenset = frozenset()
    s: frozenset = frozenset()
    w: frozenset = frozenset()

    ROLES = ("y", "x", "c", "z0", "zplus", "l", "s", "w")

    def __post_init__(self):
        for name in self.ROLES:
            object.__setattr__(self, name, _fs(getattr(self, name)))
        _disjoint({n: getattr(self, n) for n in self.ROLES})
        if not self.y:
            raise MalformedSpec("role 'y' must be nonempty")

    @property
    def z(self) -> frozenset:
        return self.z0 | self.zplus

    @classmethod
    def from_json(cls, d: Mapping) -> "AdjustmentSpec":
        unknown = set(d) - set(cls.ROLES)
        if unknown:
            raise MalformedSpec(f"unknown role field(s) {sorted(unknown)}")
        for k, v in d.items():
            if not isinstance(v, (list, str)):
                raise MalformedSpec(f"field '{k}' must be a list of node ids")
        return cls(**{k: d[k] for k in d})

    def to_json(self) -> dict:
        return {n: sorted(getattr(self, n)) for n in self.ROLES}


@dataclass(frozen=True)
class PartialExternalSpec:
    """Roles for adjustment with partial external data: ``z`` splits into
    ``z0a, z0b, z1a, z1b, z2, z3``; ``l0, l1`` are marginalizable."""

    y: frozenset
    x: frozenset
    s: frozenset = frozenset()
    z0a: frozenset = frozenset()
    z0b: frozenset = frozenset()
    z1a: frozenset = frozenset()
    z1b: frozenset = frozenset()
    z2: frozenset = frozenset()
    z3: frozenset = frozenset()
    l0: frozenset = frozenset()
    l1: frozenset = frozenset()

    ROLES = ("y", "x", "s", "z0a", "z0b", "z1a", "z1b", "z2", "z3", "l0", "l1")

    def __post_init__(self):
        for name in self.ROLES:
            object.__setattr__(self, name, _fs(getattr(self, name)))
        _disjoint({n: getattr(self, n) for n in self.ROLES})
        if not self.y:
            raise MalformedSpec("role 'y' must be nonempty")

    @classmethod
    def from_json(cls, d: Mapping) -> "PartialExternalSpec":
        unknown = set(d) - set(cls.ROLES)
        if unknown:
            raise MalformedSpec(f"unknown role field(s) {sorted(unknown)}")
        return cls(**{k: d[k] for k in d})

    @property
    def z0(self):
        return self.z0a | self.z0b

    @property
    def z1(self):
        return self.z1a | self.z1b

    @property
    def z_le1(self):
        return self.z0 | self.z1

    @property
    def z_le1_a(self):
        return self.z0a | self.z1a

    @property
    def z_le1_b(self):
        return self.z0b | self.z1b

    @property
    def z_le2(self):
        return self.z_le1 | self.z2

    @property
    def z(self):
        return self.z_le2 | self.z3


# -- formulas -----------------------------------------------------------------


def _p(target, parts) -> str:
    """Kernel term; ``parts`` holds ``(label, nodes, selected)`` and empty
    node sets are dropped."""
    given = ",".join(f"{lab}=s" if sel else lab for lab, nodes, sel in parts if nodes)
    return f"P({target}|{given})" if given else f"P({target})"


def _role(role, nodes) -> str:
    return role


def _nodes(role, nodes) -> str:
    return ",".join(sorted(nodes))


@dataclass(frozen=True)
class AdjustmentFormula:
    """Adjustment formula rendered with role names (``text``) and with
    concrete node names (``nodes_text``).

    ``integrand`` and ``mixing`` are the role-form kernel terms; ``mixing`` is
    empty when there is nothing to integrate over.
    """

    variant: str
    target: str
    text: str
    nodes_text: str
    integrand: str
    mixing: tuple = ()

    def to_json(self) -> dict:
        return {"variant": self.variant, "target": self.target, "formula": self.text,
                "formula_nodes": self.nodes_text, "integrand": self.integrand, "mixing": list(self.mixing)}


def _formula(variant: str, target: str, terms) -> AdjustmentFormula:
    """``terms(name)`` returns the integrand and the mixing kernels, rendered
    with the naming function ``name(role, nodes)``."""

    def render(name):
        inner, mix = terms(name)
        if not mix:
            return inner
        return "∫" * len(mix) + " " + inner + "".join(f" d{m}" for m in mix)

    inner, mix = terms(_role)
    return AdjustmentFormula(variant, target, render(_role), render(_nodes), inner, tuple(mix))


def _general_formula(spec: AdjustmentSpec, wv: frozenset) -> AdjustmentFormula:
    def terms(name):
        dw = (f"do({name('W', wv)})", wv, False)
        inner = _p(name("Y", spec.y), [(name("X", spec.x), spec.x, False), (name("Z", spec.z), spec.z, False),
                                        (name("C", spec.c), spec.c, False), (name("S", spec.s), spec.s, True), dw])
        if not spec.z:
            return inner, []
        return inner, [_p(name("Z", spec.z), [(name("C", spec.c), spec.c, False), dw])]

    target = _p("Y", [("C", spec.c, False), ("do(X)", spec.x, False), ("do(W)", wv, False)])
    return _formula("general", target, terms)


def _f1_formula(spec: AdjustmentSpec) -> AdjustmentFormula:
    def terms(name):
        s = (name("S", spec.s), spec.s, True)
        inner = _p(name("Y", spec.y), [(name("X", spec.x), spec.x, False), (name("Z", spec.z), spec.z, False), s])
        return inner, ([_p(name("Z", spec.z), [s])] if spec.z else [])

    return _formula("no-external-data", "P(Y|do(X))", terms)


def _f2_formula(spec: PartialExternalSpec) -> AdjustmentFormula:
    zb = spec.z_le1_b
    za = spec.z - zb

    def terms(name):
        s = (name("S", spec.s), spec.s, True)
        b = (name("Z≤1ᴮ", zb), zb, False)
        inner = _p(name("Y", spec.y), [s, (name("Z", spec.z), spec.z, False), (name("X", spec.x), spec.x, False)])
        mix = []
        if za:
            mix.append(_p(name("Z∖Z≤1ᴮ", za), [s, b]))
        if zb:
            mix.append(_p(name("Z≤1ᴮ", zb), []))
        return inner, mix

    return _formula("partial-external-data", "P(Y|do(X))", terms)


# -- results ----------------------------------------------------------------------


@dataclass(frozen=True)
class Condition:
    label: str
    query: SeparationQuery
    holds: bool
    graph: str = "extended"

    def to_json(self) -> dict:
        return {"label": self.label, "holds": self.holds, "graph": self.graph, **self.query.to_json()}


@dataclass(frozen=True)
class AdjustmentResult:
    """Verdict with every checked condition. Unpacks as ``(applicable, formula)``."""

    applicable: bool
    formula: AdjustmentFormula | None
    conditions: tuple = field(default=())

    def __iter__(self):
        return iter((self.applicable, self.formula))

    @property
    def failed(self) -> list[str]:
        return [c.label for c in self.conditions if not c.holds]

    def to_json(self) -> dict:
        return {
            "applicable": self.applicable,
            "formula": self.formula.text if self.formula else None,
            "formula_nodes": self.formula.nodes_text if self.formula else None,
            "target": self.formula.target if self.formula else None,
            "conditions": [c.to_json() for c in self.conditions],
        }


def _cond(g: Dmg, label: str, a, b, c, graph: str = "extended") -> Condition:
    q = SeparationQuery(a, b, c, Notion.SIGMA)
    return Condition(label, q, separated(g, q.a, q.b, q.c), graph)


def _check_nodes(g: Dmg, spec, roles) -> None:
    if g.latents:
        raise MalformedSpec("criteria are checked on the induced DMG; marginalize latent nodes first")
    for name in roles:
        nodes = getattr(spec, name)
        g.check_nodes(nodes)
        if name != "w":
            bad = {v for v in nodes if g.kind(v) is not NodeKind.OUTPUT}
            if bad:
                raise MalformedSpec(f"role '{name}' must contain output nodes only, got {sorted(bad)}")


def check_general_adjustment(g: Dmg, spec: AdjustmentSpec, *, condition_on_inputs: bool = False) -> AdjustmentResult:
    """General adjustment criterion for ``P(Y | C, do(X), do(W))``.

    Conditions, checked in the extended graph of ``g`` intervened on ``W``:

    1. ``(Z0, L) ⫫ I_X | C``
    2. ``Y ⫫ (I_X, Z+) | C, X, Z0, L``
    3. ``Y ⫫ S | C, X, Z``
    4. ``L ⫫ X | C, Z``

    On success the formula is ``∫ P(Y|X,Z,C,S=s,do(W)) dP(Z|C,do(W))``.
    ``condition_on_inputs`` adds ``W - J`` to every conditioning set.
    """
    _check_nodes(g, spec, spec.ROLES)
    gx = extended_graph(g, spec.w)
    wv = spec.w - g.inputs
    e = wv if condition_on_inputs else frozenset()
    ix = frozenset(indicator(v) for v in spec.x)
    conds = (
        _cond(gx, "1", spec.z0 | spec.l, ix, spec.c | e),
        _cond(gx, "2", spec.y, ix | spec.zplus, spec.c | spec.x | spec.z0 | spec.l | e),
        _cond(gx, "3", spec.y, spec.s, spec.c | spec.x | spec.z | e),
        _cond(gx, "4", spec.l, spec.x, spec.c | spec.z | e),
    )
    ok = all(c.holds for c in conds)
    return AdjustmentResult(ok, _general_formula(spec, wv) if ok else None, conds)


class SpecialCase(str, Enum):
    GENERAL_SELECTION_BACKDOOR = "general-selection-backdoor"
    SELECTION_BACKDOOR = "selection-backdoor"
    EXTENDED_BACKDOOR = "extended-backdoor"
    BACKDOOR = "backdoor"


_EMPTY_ROLES = {
    SpecialCase.GENERAL_SELECTION_BACKDOOR: ("c",),
    SpecialCase.SELECTION_BACKDOOR: ("c", "l"),
    SpecialCase.EXTENDED_BACKDOOR: ("c", "s"),
    SpecialCase.BACKDOOR: ("c", "s", "l", "zplus"),
}


def check_special_case(g: Dmg, spec: AdjustmentSpec, case: SpecialCase | str) -> AdjustmentResult:
    """Check one of the named special cases by delegating to
    :func:`check_general_adjustment` after verifying that the roles the case
    excludes are empty (and that nothing is intervened beyond the inputs)."""
    case = SpecialCase(case)
    bad = [r for r in _EMPTY_ROLES[case] if getattr(spec, r)]
    if spec.w - g.inputs:
        bad.append("w")
    if bad:
        raise CaseMismatch(f"{case.value} requires empty role(s) {bad}")
    return check_general_adjustment(g, spec)


def check_selection_without_external(g: Dmg, spec: AdjustmentSpec) -> AdjustmentResult:
    """Adjustment from selection-biased data only, for ``P(Y | do(X))``.

    1. ``Y ⫫ S | do(X)``
    2. ``Z0 ⫫ I_X | S``
    3. ``Y ⫫ Z+ | Z0, S, do(X)``
    4. ``Y ⫫ I_X | X, Z, S``

    A ``do(X)`` statement is checked in the graph intervened on ``X`` with
    ``X`` in the conditioning set (the statements hold for each value of
    ``X``). Formula: ``∫ P(Y|X,Z,S=s) dP(Z|S=s)``.
    """
    _check_nodes(g, spec, spec.ROLES)
    if spec.c or spec.l or spec.w - g.inputs:
        raise MalformedSpec("roles 'c', 'l' and 'w' must be empty for adjustment without external data")
    if not spec.s:
        raise MalformedSpec("role 's' must be nonempty")
    gx = extended_graph(g)
    gdo = extended_graph(g, spec.x)
    ix = frozenset(indicator(v) for v in spec.x)
    conds = (
        _cond(gdo, "1", spec.y, spec.s, spec.x, "extended-do-x"),
        _cond(gx, "2", spec.z0, ix, spec.s),
        _cond(gdo, "3", spec.y, spec.zplus, spec.z0 | spec.s | spec.x, "extended-do-x"),
        _cond(gx, "4", spec.y, ix, spec.x | spec.z | spec.s),
    )
    ok = all(c.holds for c in conds)
    return AdjustmentResult(ok, _f1_formula(spec) if ok else None, conds)


def check_partial_external(g: Dmg, spec: PartialExternalSpec) -> AdjustmentResult:
    """Adjustment from selection-biased data plus unbiased data on
    ``Z≤1ᴮ = Z0ᴮ ∪ Z1ᴮ``, for ``P(Y | do(X))``. Nine conditions:

    1. ``(L0, Z0) ⫫ I_X``
    2. ``Y ⫫ Z1 | L0, Z0, do(X)``
    3. ``Z≤1ᴬ ⫫ S | Z≤1ᴮ``
    4. ``L0 ⫫ I_X | Z≤1``
    5. ``Y ⫫ S | Z≤1, do(X)``
    6. ``(L1, Z2) ⫫ I_X | S, Z≤1``
    7. ``Y ⫫ Z3 | L1, S, Z≤2, do(X)``
    8. ``L1 ⫫ I_X | S, Z``
    9. ``Y ⫫ I_X | X, S, Z``

    ``do(X)`` statements are handled as in
    :func:`check_selection_without_external`.
    """
    _check_nodes(g, spec, spec.ROLES)
    gx = extended_graph(g)
    gdo = extended_graph(g, spec.x)
    ix = frozenset(indicator(v) for v in spec.x)
    sp = spec
    dox = "extended-do-x"
    conds = (
        _cond(gx, "1", sp.l0 | sp.z0, ix, ()),
        _cond(gdo, "2", sp.y, sp.z1, sp.l0 | sp.z0 | sp.x, dox),
        _cond(gx, "3", sp.z_le1_a, sp.s, sp.z_le1_b),
        _cond(gx, "4", sp.l0, ix, sp.z_le1),
        _cond(gdo, "5", sp.y, sp.s, sp.z_le1 | sp.x, dox),
        _cond(gx, "6", sp.l1 | sp.z2, ix, sp.s | sp.z_le1),
        _cond(gdo, "7", sp.y, sp.z3, sp.l1 | sp.s | sp.z_le2 | sp.x, dox),
        _cond(gx, "8", sp.l1, ix, sp.s | sp.z),
        _cond(gx, "9", sp.y, ix, sp.x | sp.s | sp.z),
    )
    ok = all(c.holds for c in conds)
    return AdjustmentResult(ok, _f2_formula(spec) if ok else None, conds)


def _subsets(pool, max_size):
    pool = sorted(pool)
    for r in range(0, min(max_size, len(pool)) + 1):
        yield from map(frozenset, itertools.combinations(pool, r))


def _first_split(g: Dmg, base: dict, pool: frozenset, z: frozenset, max_size: int):
    for zplus in _subsets(z, len(z)):
        for l in _subsets(pool - z, max_size):
            spec = AdjustmentSpec(z0=z - zplus, zplus=zplus, l=l, **base)
            if check_general_adjustment(g, spec).applicable:
                return spec
    return None


def find_adjustment_sets(
    g: Dmg, y, x, c=(), s=(), w=(), max_size: int = 3, *, threads: int = 1
) -> list[AdjustmentSpec]:
    """Exhaustive search for assignments passing the general criterion.

    Candidate adjustment sets ``Z`` of at most ``max_size`` nodes are drawn
    from the outputs outside ``y, x, c, s, w``. For each, splits into
    ``Z0``/``Z+`` and marginalizable sets ``L`` (also at most ``max_size``)
    are tried, smallest first. One passing assignment is reported per ``Z``,
    ordered by ``|Z|`` and then lexicographically. ``threads > 1`` spreads the
    candidates over a thread pool; the result does not depend on it.
    """
    y, x, c, s, w = map(_fs, (y, x, c, s, w))
    pool = g.outputs - (y | x | c | s | w)
    if len(pool) > MAX_POOL:
        raise PoolTooLarge(f"candidate pool has {len(pool)} nodes; at most {MAX_POOL} allowed")
    if max_size < 0:
        raise MalformedSpec("max_size must be nonnegative")
    base = dict(y=y, x=x, c=c, s=s, w=w)
    AdjustmentSpec(**base)  # validate roles before searching
    cands = list(_subsets(pool, max_size))
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            hits = list(ex.map(lambda z: _first_split(g, base, pool, z, max_size), cands))
    else:
        hits = [_first_split(g, base, pool, z, max_size) for z in cands]
    return [h for h in hits if h is not None]
