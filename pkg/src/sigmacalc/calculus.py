"""The three rules of causal calculus and related separation queries."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

from .dmg import Dmg, NodeKind, descendants, extend, indicator, intervene, primed, twin_graph
from .errors import MalformedQuery
from .separation import Notion, SeparationQuery, separated

__all__ = [
    "Rule",
    "RuleQuery",
    "RuleVerdict",
    "extended_graph",
    "check_rule",
    "check_mechanism_change",
    "check_ignorability",
]


class Rule(IntEnum):
    ONE = 1
    TWO = 2
    THREE = 3


def _fs(x) -> frozenset:
    if x is None:
        return frozenset()
    if isinstance(x, str):
        return frozenset([x])
    return frozenset(x)


def extended_graph(g: Dmg, w=()) -> Dmg:
    """Extended DMG of the intervened graph: ``extend(intervene(g, w - J))``."""
    w = g.check_nodes(_fs(w))
    return extend(intervene(g, w - g.inputs))


@dataclass(frozen=True)
class RuleQuery:
    rule: Rule
    x: frozenset
    y: frozenset
    z: frozenset = frozenset()
    w: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "rule", Rule(int(self.rule)))
        for name in ("x", "y", "z", "w"):
            object.__setattr__(self, name, _fs(getattr(self, name)))


@dataclass(frozen=True)
class RuleVerdict:
    """Outcome of a rule check, with the graph and query that decided it."""

    applicable: bool
    query: SeparationQuery
    graph: Dmg = field(repr=False)
    conclusion: str | None = None

    def to_json(self) -> dict:
        return {
            "applicable": self.applicable,
            "separation": self.query.to_json(),
            "conclusion": self.conclusion,
        }


def _names(s) -> str:
    return ",".join(sorted(s))


def _kernel(y, parts) -> str:
    given = ",".join(p for p in parts if p)
    return f"P({_names(y)}|{given})" if given else f"P({_names(y)})"


def _conclusion(q: RuleQuery, wv: frozenset) -> str:
    do_w = f"do({_names(wv)})" if wv else ""
    z = _names(q.z)
    dx = f"do({_names(q.x)})" if q.x else ""
    x = _names(q.x)
    if q.rule is Rule.ONE:
        return f"{_kernel(q.y, [x, z, do_w])} = {_kernel(q.y, [z, do_w])}"
    if q.rule is Rule.TWO:
        return f"{_kernel(q.y, [dx, z, do_w])} = {_kernel(q.y, [x, z, do_w])}"
    return f"{_kernel(q.y, [dx, z, do_w])} = {_kernel(q.y, [z, do_w])}"


def _validate(g: Dmg, q: RuleQuery) -> None:
    g.check_nodes(q.x | q.y | q.z | q.w)
    if g.latents:
        raise MalformedQuery("rules are checked on the induced DMG; marginalize latent nodes first")
    for name in ("x", "y", "z"):
        s = getattr(q, name)
        bad = {v for v in s if g.kind(v) is not NodeKind.OUTPUT}
        if bad:
            raise MalformedQuery(f"{name} must contain output nodes only, got {sorted(bad)}")
    if (q.x & q.y) or (q.x & q.z) or (q.y & q.z):
        raise MalformedQuery("x, y and z must be pairwise disjoint")
    if q.w & (q.x | q.y | q.z):
        raise MalformedQuery("w must be disjoint from x, y and z")


def check_rule(g: Dmg, q: RuleQuery, *, condition_on_inputs: bool = False) -> RuleVerdict:
    """Decide whether one of the three rules applies.

    The separation is checked in ``extended_graph(g, w)``:
    rule 1 ``Y ⫫ X | Z``, rule 2 ``Y ⫫ I_X | X, Z``, rule 3 ``Y ⫫ I_X | Z``.
    ``condition_on_inputs`` adds the intervened nodes ``w - J`` to the
    conditioning set.

    Examples
    --------
    >>> g = Dmg.from_edges("Z->X; X->Y; Z->Y")
    >>> check_rule(g, RuleQuery(2, x="X", y="Y", z="Z")).conclusion
    'P(Y|do(X),Z) = P(Y|X,Z)'
    """
    _validate(g, q)
    wv = q.w - g.inputs
    gx = extended_graph(g, q.w)
    extra = wv if condition_on_inputs else frozenset()
    ix = frozenset(indicator(v) for v in q.x)
    if q.rule is Rule.ONE:
        sq = SeparationQuery(q.y, q.x, q.z | extra, Notion.SIGMA)
    elif q.rule is Rule.TWO:
        sq = SeparationQuery(q.y, ix, q.x | q.z | extra, Notion.SIGMA)
    else:
        sq = SeparationQuery(q.y, ix, q.z | extra, Notion.SIGMA)
    ok = separated(gx, sq.a, sq.b, sq.c, sq.notion)
    return RuleVerdict(ok, sq, gx, _conclusion(q, wv) if ok else None)


def check_mechanism_change(g: Dmg, a, b, i) -> bool:
    """True when ``P(X_A | X_B, do(X_J))`` does not depend on the inputs ``i``,
    by ``A ⫫ I | B ∪ (J - I)``."""
    a, b, i = _fs(a), _fs(b), _fs(i)
    g.check_nodes(a | b | i)
    if not i <= g.inputs:
        raise MalformedQuery(f"i must be input nodes, got {sorted(i - g.inputs)}")
    if not (a | b) <= g.outputs:
        raise MalformedQuery("a and b must be output nodes")
    return separated(g, a, i, b | (g.inputs - i))


def check_ignorability(g: Dmg, y, x, z=(), strong: bool = False) -> bool:
    """Conditional (``Y' ⫫ X | Z``) or strong (``Y, Y' ⫫ X | Z``) ignorability
    in the twin graph of ``g`` for an intervention on ``x``.

    ``Y'`` is the interventional copy of ``Y``; nodes of ``Y`` that do not
    descend from ``x`` have a single shared copy.
    """
    y, x, z = _fs(y), _fs(x), _fs(z)
    g.check_nodes(y | x | z)
    if not (y | x | z) <= g.outputs:
        raise MalformedQuery("y, x and z must be output nodes")
    if (x & y) or (x & z) or (y & z):
        raise MalformedQuery("y, x and z must be pairwise disjoint")
    if not x:
        return True
    tw = twin_graph(g, x)
    desc = descendants(g, x)
    y_twin = frozenset(primed(v) if v in desc else v for v in y)
    a = y_twin | y if strong else y_twin
    return separated(tw, a, x, z)
