"""Consolidated districts, apt-orders and identification of causal effects."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .dmg import Dmg, NodeKind, ancestors, induced_subgraph
from .errors import EmptyTarget, MalformedQuery
from .estimand import FAIL, Conditional, Estimand, KernelTerm, Marginal, Product

__all__ = [
    "AptOrder",
    "IdQuery",
    "apt_order",
    "consolidated_district",
    "consolidated_districts",
    "subgraph_for",
    "identify",
]


@dataclass(frozen=True)
class AptOrder:
    """Total order on the nodes, topological across strongly connected
    components and contiguous within each."""

    order: tuple

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))
        object.__setattr__(self, "_rank", {v: i for i, v in enumerate(self.order)})

    @property
    def rank(self) -> dict:
        return dict(self._rank)

    def __iter__(self):
        return iter(self.order)

    def __len__(self) -> int:
        return len(self.order)

    def first(self, s) -> int:
        return min(self._rank[v] for v in s)

    def pred_le(self, s) -> frozenset:
        top = max(self._rank[v] for v in s)
        return frozenset(self.order[: top + 1])

    def pred_lt(self, s) -> frozenset:
        """Nodes preceding the set: ``Pred_<=(s) - s``."""
        return self.pred_le(s) - frozenset(s)


def apt_order(g: Dmg) -> AptOrder:
    """Deterministic apt-order.

    Kahn's algorithm on the condensation with ties broken by the sorted member
    tuples; members of each component are listed in sorted order.

    >>> apt_order(Dmg.from_edges("w<-z; x->y; y->z; z->y")).order
    ('x', 'y', 'z', 'w')
    """
    comps = {g.sc(v) for v in g.nodes}
    key = {c: tuple(sorted(c)) for c in comps}
    comp_of = {v: c for c in comps for v in c}
    succ = {c: set() for c in comps}
    indeg = {c: 0 for c in comps}
    for a, b in g.directed:
        ca, cb = comp_of[a], comp_of[b]
        if ca is not cb and cb not in succ[ca]:
            succ[ca].add(cb)
            indeg[cb] += 1
    heap = [(key[c], c) for c in comps if indeg[c] == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        k, c = heapq.heappop(heap)
        out.extend(k)
        for n in succ[c]:
            indeg[n] -= 1
            if indeg[n] == 0:
                heapq.heappush(heap, (key[n], n))
    return AptOrder(out)


def consolidated_district(g: Dmg, b) -> frozenset:
    """Closure of ``b`` under bidirected adjacency and shared strongly
    connected components, restricted to output nodes."""
    b = g.check_nodes(b)
    bad = {v for v in b if g.kind(v) is not NodeKind.OUTPUT}
    if bad:
        raise MalformedQuery(f"consolidated districts are defined on output nodes, got {sorted(bad)}")
    outs = g.outputs
    seen = set(b)
    todo = list(b)
    while todo:
        v = todo.pop()
        for w in g.siblings(v) | g.sc(v):
            if w in outs and w not in seen:
                seen.add(w)
                todo.append(w)
    return frozenset(seen)


def consolidated_districts(g: Dmg) -> list[frozenset]:
    """Partition of the output nodes into consolidated districts, sorted."""
    out, seen = [], set()
    for v in sorted(g.outputs):
        if v not in seen:
            d = consolidated_district(g, [v])
            seen |= d
            out.append(d)
    return out


def subgraph_for(g: Dmg, c) -> Dmg:
    """Graph of the sub-model on ``c``: ``c`` plus its parents, with parents
    outside ``c`` turned into inputs (latent parents stay latent)."""
    c = g.check_nodes(c)
    if not c:
        raise EmptyTarget("sub-model target set is empty")
    bad = {v for v in c if g.kind(v) is not NodeKind.OUTPUT}
    if bad:
        raise MalformedQuery(f"sub-model targets must be output nodes, got {sorted(bad)}")
    pa = frozenset().union(*(g.parents(v) for v in c)) - c
    kinds = {v: NodeKind.OUTPUT for v in c}
    for v in pa:
        kinds[v] = NodeKind.LATENT if g.kind(v) is NodeKind.LATENT else NodeKind.INPUT
    directed = [(a, b) for a, b in g.directed if b in c]
    bidirected = [e for e in g.bidirected if e <= c]
    return Dmg(kinds, directed, bidirected)


@dataclass(frozen=True)
class IdQuery:
    """Target ``P(y | do(w))``."""

    y: frozenset
    w: frozenset = frozenset()

    def __post_init__(self):
        y = frozenset([self.y]) if isinstance(self.y, str) else frozenset(self.y)
        w = frozenset([self.w]) if isinstance(self.w, str) else frozenset(self.w)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "w", w)


def _sccs_in(g: Dmg, order: AptOrder, nodes) -> list[frozenset]:
    return sorted({g.sc(v) for v in nodes}, key=order.first)


def _id_cd(g: Dmg, order: AptOrder, c: frozenset, d: frozenset, q_d: Estimand) -> Estimand:
    a = ancestors(subgraph_for(g, d), c) & d
    q_a = q_d if a == d else Marginal(q_d, d - a)
    if a == c:
        return q_a
    if a == d:
        return FAIL
    g_a = subgraph_for(g, a)
    d2 = consolidated_district(g_a, c)
    factors = [Conditional(q_a, s, order.pred_lt(s) & a) for s in _sccs_in(g_a, order, d2)]
    return _id_cd(g, order, c, d2, Product(factors))


def identify(g: Dmg, q: IdQuery | None = None, *, y=None, w=None) -> Estimand:
    """Identify ``P(Y | do(W))`` from the observed family ``P(V | do(J))``.

    Returns an :class:`~sigmacalc.estimand.Estimand` or ``FAIL``. The result
    is a kernel in ``W`` and the inputs.

    Parameters
    ----------
    g : Dmg
        Induced DMG (no latent nodes).
    q : IdQuery, optional
        Query; alternatively pass ``y`` and ``w``.
    """
    if q is None:
        q = IdQuery(y if y is not None else (), w if w is not None else ())
    if g.latents:
        raise MalformedQuery("identification runs on the induced DMG; marginalize latent nodes first")
    g.check_nodes(q.y | q.w)
    if not q.y:
        raise EmptyTarget("empty target set")
    if not q.y <= g.outputs:
        raise MalformedQuery(f"targets must be output nodes: {sorted(q.y - g.outputs)}")
    if q.y & q.w:
        raise MalformedQuery(f"target and intervention sets overlap: {sorted(q.y & q.w)}")
    V, J = g.outputs, g.inputs
    order = apt_order(g)
    w = q.w & V

    h = ancestors(induced_subgraph(g, V - w), q.y)
    parts = []
    for c in consolidated_districts(induced_subgraph(g, h)):
        d = consolidated_district(g, c)
        q_d = Product([KernelTerm(s, order.pred_lt(s) & V, J) for s in _sccs_in(g, order, d)])
        r = _id_cd(g, order, c, d, q_d)
        if r is FAIL:
            return FAIL
        parts.append((c, r))

    factors = []
    for c, r in parts:
        sccs = _sccs_in(g, order, c)
        if isinstance(r, Product):
            factors.extend(r.factors)
        elif len(sccs) == 1:
            factors.append(r)
        else:
            factors.extend(Conditional(r, s, order.pred_lt(s) & c) for s in sccs)
    factors.sort(key=lambda f: order.first(f.targets))
    q_h = factors[0] if len(factors) == 1 else Product(factors)
    return Marginal(q_h, h - q.y) if h - q.y else q_h
