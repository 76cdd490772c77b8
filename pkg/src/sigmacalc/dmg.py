"""Directed mixed graphs and the structural operations defined on them.

A :class:`Dmg` holds typed nodes (output, input, latent), directed edges and
bidirected edges. Values are immutable; every operation returns a new graph.
"""

from __future__ import annotations

import itertools
import re
import warnings
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

import networkx as nx

from .errors import (
    InputMarginalization,
    InvalidGraph,
    InvalidIntervention,
    NameCollision,
    SccBoundViolation,
    UnknownNode,
)

__all__ = [
    "NodeKind",
    "Dmg",
    "SccPartition",
    "strongly_connected_components",
    "enumerate_loops",
    "ancestors",
    "descendants",
    "parents",
    "children",
    "marginalize",
    "induced_dmg",
    "intervene",
    "extend",
    "indicator",
    "acyclify",
    "twin_graph",
    "primed",
    "input_confound",
    "induced_subgraph",
]


class NodeKind(str, Enum):
    OUTPUT = "output"
    INPUT = "input"
    LATENT = "latent"


def _as_set(nodes) -> frozenset:
    if nodes is None:
        return frozenset()
    if isinstance(nodes, str):
        return frozenset([nodes])
    return frozenset(nodes)


class Dmg:
    """Immutable directed mixed graph with output, input and latent nodes.

    Parameters
    ----------
    nodes:
        Mapping from node id to :class:`NodeKind` (or its string value), or an
        iterable of ids that are all outputs.
    directed:
        Pairs ``(tail, head)``. Self-loops are kept but carry no meaning for
        separation.
    bidirected:
        Unordered pairs of distinct nodes.
    input_confounded:
        Permit bidirected edges between input nodes. Only graphs produced by
        :func:`input_confound` set this.
    """

    __slots__ = (
        "_kinds",
        "_directed",
        "_bidirected",
        "_pa",
        "_ch",
        "_sib",
        "_sc",
        "_input_confounded",
    )

    def __init__(
        self,
        nodes: Mapping[str, NodeKind | str] | Iterable[str] = (),
        directed: Iterable[tuple[str, str]] = (),
        bidirected: Iterable[Iterable[str]] = (),
        *,
        input_confounded: bool = False,
    ):
        if isinstance(nodes, Mapping):
            kinds = {str(v): NodeKind(k) for v, k in nodes.items()}
        else:
            kinds = {str(v): NodeKind.OUTPUT for v in nodes}
        if any(not v for v in kinds):
            raise InvalidGraph("node ids must be nonempty strings")
        directed = frozenset((str(a), str(b)) for a, b in directed)
        bi = set()
        for pair in bidirected:
            pair = tuple(pair)
            if len(pair) != 2 or pair[0] == pair[1]:
                raise InvalidGraph(f"bidirected edge needs two distinct endpoints: {pair!r}")
            bi.add(frozenset(pair))
        bidirected = frozenset(bi)

        missing = {v for e in directed for v in e} | {v for e in bidirected for v in e}
        missing -= kinds.keys()
        if missing:
            raise UnknownNode(missing)

        pa = {v: set() for v in kinds}
        ch = {v: set() for v in kinds}
        sib = {v: set() for v in kinds}
        for a, b in directed:
            pa[b].add(a)
            ch[a].add(b)
        for e in bidirected:
            a, b = tuple(e)
            sib[a].add(b)
            sib[b].add(a)

        for v, k in kinds.items():
            if k is NodeKind.OUTPUT:
                continue
            if pa[v]:
                raise InvalidGraph(f"{k.value} node {v!r} must not have parents")
            if sib[v]:
                if not (input_confounded and k is NodeKind.INPUT
                        and all(kinds[w] is NodeKind.INPUT for w in sib[v])):
                    raise InvalidGraph(f"{k.value} node {v!r} must not touch a bidirected edge")

        self._kinds = kinds
        self._directed = directed
        self._bidirected = bidirected
        self._pa = {v: frozenset(s) for v, s in pa.items()}
        self._ch = {v: frozenset(s) for v, s in ch.items()}
        self._sib = {v: frozenset(s) for v, s in sib.items()}
        self._input_confounded = bool(input_confounded)

        g = nx.DiGraph()
        g.add_nodes_from(kinds)
        g.add_edges_from(directed)
        sc = {}
        for comp in nx.strongly_connected_components(g):
            comp = frozenset(comp)
            for v in comp:
                sc[v] = comp
        self._sc = sc

    # -- construction helpers -------------------------------------------------

    _EDGE_RE = re.compile(r"^\s*([^\s<>-]+)\s*(<->|->|<-)\s*([^\s<>-]+)\s*$")

    @classmethod
    def from_edges(
        cls,
        edges: str | Iterable[str] = "",
        *,
        inputs: Iterable[str] = (),
        latents: Iterable[str] = (),
        nodes: Iterable[str] = (),
    ) -> "Dmg":
        """Build a graph from edge strings such as ``"x->y; y<->z"``.

        Nodes mentioned only in edges default to outputs.

        >>> g = Dmg.from_edges("x->y; y->z; z->y", inputs=["x"])
        >>> sorted(g.parents("y"))
        ['x', 'z']
        """
        if isinstance(edges, str):
            edges = [e for e in re.split(r"[;,\n]", edges) if e.strip()]
        kinds: dict[str, NodeKind] = {v: NodeKind.OUTPUT for v in nodes}
        directed, bidirected = [], []
        for e in edges:
            m = cls._EDGE_RE.match(e)
            if not m:
                raise InvalidGraph(f"cannot parse edge {e!r}")
            a, op, b = m.groups()
            kinds.setdefault(a, NodeKind.OUTPUT)
            kinds.setdefault(b, NodeKind.OUTPUT)
            if op == "->":
                directed.append((a, b))
            elif op == "<-":
                directed.append((b, a))
            else:
                bidirected.append((a, b))
        for v in inputs:
            kinds[v] = NodeKind.INPUT
        for v in latents:
            kinds[v] = NodeKind.LATENT
        return cls(kinds, directed, bidirected)

    # -- accessors --------------------------------------------------------------

    @property
    def nodes(self) -> frozenset:
        return frozenset(self._kinds)

    @property
    def kinds(self) -> dict[str, NodeKind]:
        return dict(self._kinds)

    def kind(self, v: str) -> NodeKind:
        try:
            return self._kinds[v]
        except KeyError:
            raise UnknownNode([v]) from None

    def _of_kind(self, kind: NodeKind) -> frozenset:
        return frozenset(v for v, k in self._kinds.items() if k is kind)

    @property
    def outputs(self) -> frozenset:
        return self._of_kind(NodeKind.OUTPUT)

    @property
    def inputs(self) -> frozenset:
        return self._of_kind(NodeKind.INPUT)

    @property
    def latents(self) -> frozenset:
        return self._of_kind(NodeKind.LATENT)

    @property
    def directed(self) -> frozenset:
        return self._directed

    @property
    def bidirected(self) -> frozenset:
        return self._bidirected

    @property
    def input_confounded(self) -> bool:
        return self._input_confounded

    def __contains__(self, v) -> bool:
        return v in self._kinds

    def __len__(self) -> int:
        return len(self._kinds)

    def check_nodes(self, nodes) -> frozenset:
        nodes = _as_set(nodes)
        missing = nodes - self._kinds.keys()
        if missing:
            raise UnknownNode(missing)
        return nodes

    def parents(self, v: str) -> frozenset:
        self.check_nodes([v])
        return self._pa[v]

    def children(self, v: str) -> frozenset:
        self.check_nodes([v])
        return self._ch[v]

    def siblings(self, v: str) -> frozenset:
        """Nodes joined to ``v`` by a bidirected edge."""
        self.check_nodes([v])
        return self._sib[v]

    def sc(self, v: str) -> frozenset:
        """Strongly connected component containing ``v``."""
        self.check_nodes([v])
        return self._sc[v]

    def has_edge(self, a: str, b: str) -> bool:
        return (a, b) in self._directed

    def has_bidirected(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self._bidirected

    def is_acyclic(self) -> bool:
        return all(len(s) == 1 for s in self._sc.values()) and not any(
            a == b for a, b in self._directed
        )

    # -- value semantics ---------------------------------------------------------

    def _key(self):
        return (
            tuple(sorted((v, k.value) for v, k in self._kinds.items())),
            tuple(sorted(self._directed)),
            tuple(sorted(tuple(sorted(e)) for e in self._bidirected)),
            self._input_confounded,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dmg):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        parts = [f"{a}->{b}" for a, b in sorted(self._directed)]
        parts += [f"{a}<->{b}" for a, b in sorted(tuple(sorted(e)) for e in self._bidirected)]
        extra = [v for v in sorted(self._kinds) if not self._pa[v] and not self._ch[v] and not self._sib[v]]
        inputs = sorted(self.inputs)
        latents = sorted(self.latents)
        s = f"Dmg({'; '.join(parts)!r}"
        if extra:
            s += f", nodes={extra!r}"
        if inputs:
            s += f", inputs={inputs!r}"
        if latents:
            s += f", latents={latents!r}"
        return s + ")"

    def replace(self, *, kinds=None, directed=None, bidirected=None, input_confounded=None) -> "Dmg":
        return Dmg(
            self._kinds if kinds is None else kinds,
            self._directed if directed is None else directed,
            self._bidirected if bidirected is None else bidirected,
            input_confounded=self._input_confounded if input_confounded is None else input_confounded,
        )

    def warnings(self) -> list[str]:
        """Soft invariant violations: childless latents, non-reduced latent space."""
        out = []
        lat = sorted(self.latents)
        for u in lat:
            if not self._ch[u]:
                out.append(f"latent node {u!r} has no children")
        for u1, u2 in itertools.permutations(lat, 2):
            if self._ch[u1] and self._ch[u1] <= self._ch[u2]:
                out.append(f"latent space not reduced: Ch({u1}) is contained in Ch({u2})")
        return out


@dataclass(frozen=True)
class SccPartition:
    """Partition of the node set into strongly connected components."""

    component_of: Mapping[str, int]
    components: tuple[frozenset, ...]

    def __getitem__(self, v: str) -> frozenset:
        return self.components[self.component_of[v]]


def strongly_connected_components(g: Dmg) -> SccPartition:
    comps = sorted({g.sc(v) for v in g.nodes}, key=lambda c: sorted(c))
    return SccPartition({v: i for i, c in enumerate(comps) for v in c}, tuple(comps))


def _closure(start, step) -> frozenset:
    seen = set(start)
    todo = deque(seen)
    while todo:
        v = todo.popleft()
        for w in step(v):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return frozenset(seen)


def ancestors(g: Dmg, s) -> frozenset:
    """Reflexive-transitive closure of ``s`` along reversed directed edges."""
    s = g.check_nodes(s)
    return _closure(s, g._pa.__getitem__)


def descendants(g: Dmg, s) -> frozenset:
    s = g.check_nodes(s)
    return _closure(s, g._ch.__getitem__)


def parents(g: Dmg, s) -> frozenset:
    s = g.check_nodes(s)
    return frozenset().union(*(g._pa[v] for v in s))


def children(g: Dmg, s) -> frozenset:
    s = g.check_nodes(s)
    return frozenset().union(*(g._ch[v] for v in s))


def induced_subgraph(g: Dmg, nodes) -> Dmg:
    nodes = g.check_nodes(nodes)
    return Dmg(
        {v: g.kind(v) for v in nodes},
        [(a, b) for a, b in g.directed if a in nodes and b in nodes],
        [e for e in g.bidirected if e <= nodes],
        input_confounded=g.input_confounded,
    )


def enumerate_loops(g: Dmg, within) -> list[frozenset]:
    """All loops contained in ``within``; ``within`` must lie in one SCC.

    A loop is a node set whose members reach each other by directed walks that
    stay inside the set. Singletons always count. Results are sorted by size,
    then lexicographically.
    """
    within = g.check_nodes(within)
    if not within:
        return []
    comp = g.sc(next(iter(within)))
    if not within <= comp:
        raise SccBoundViolation("loop enumeration is restricted to a single strongly connected component")
    members = sorted(within)
    loops = []
    for r in range(1, len(members) + 1):
        for sub in map(frozenset, itertools.combinations(members, r)):
            # a loop is exactly a set that is one SCC of its own induced subgraph
            if r == 1 or induced_subgraph(g, sub).sc(min(sub)) == sub:
                loops.append(sub)
    return loops



def marginalize(g: Dmg, w) -> Dmg:
    """Latent projection of ``g`` onto the nodes outside ``w``.

    Directed edge ``a->b`` iff a directed walk from ``a`` to ``b`` has all
    intermediate nodes in ``w``. Bidirected ``a<->b`` iff ``a`` and ``b`` are
    both reached by ``w``-internal directed walks from a common ``w`` node, or
    a bidirected edge ``p<->q`` exists where ``p`` is ``a`` or reaches ``a``
    through ``w``, and likewise ``q`` for ``b``.
    """
    w = g.check_nodes(w)
    bad = {v for v in w if g.kind(v) is NodeKind.INPUT}
    if bad:
        raise InputMarginalization(f"input nodes cannot be marginalized: {sorted(bad)}")
    if not w:
        return g
    keep = g.nodes - w

    def exits(starts) -> frozenset:
        # non-w nodes reachable from `starts` through w-only intermediates
        out, seen = set(), set()
        todo = deque(starts)
        while todo:
            v = todo.popleft()
            for c in g._ch[v]:
                if c in w:
                    if c not in seen:
                        seen.add(c)
                        todo.append(c)
                else:
                    out.add(c)
        return frozenset(out)

    directed = {(a, b) for a in keep for b in exits([a])}
    reach = {x: exits([x]) for x in w}
    bidirected = set()
    for x in w:
        for a, b in itertools.combinations(sorted(reach[x]), 2):
            bidirected.add(frozenset((a, b)))

    def ends(x) -> frozenset:
        return reach[x] if x in w else frozenset([x])

    for e in g.bidirected:
        p, q = tuple(e)
        for a in ends(p):
            for b in ends(q):
                if a != b:
                    bidirected.add(frozenset((a, b)))
    return Dmg({v: g.kind(v) for v in keep}, directed, bidirected, input_confounded=g.input_confounded)


def induced_dmg(gplus: Dmg) -> Dmg:
    """Replace latent nodes by bidirected edges between their children."""
    lat = gplus.latents
    if not lat:
        return gplus
    keep = gplus.nodes - lat
    bi = set(gplus.bidirected)
    for u in lat:
        for a, b in itertools.combinations(sorted(gplus.children(u)), 2):
            bi.add(frozenset((a, b)))
    return Dmg(
        {v: gplus.kind(v) for v in keep},
        [(a, b) for a, b in gplus.directed if a in keep and b in keep],
        bi,
        input_confounded=gplus.input_confounded,
    )


def intervene(g: Dmg, w) -> Dmg:
    """Perfect intervention: cut every edge into ``w`` and make ``w`` inputs."""
    w = g.check_nodes(w)
    lat = {v for v in w if g.kind(v) is NodeKind.LATENT}
    if lat:
        raise InvalidIntervention(f"cannot intervene on latent nodes: {sorted(lat)}")
    if not w:
        return g
    kinds = g.kinds
    for v in w:
        kinds[v] = NodeKind.INPUT
    return Dmg(
        kinds,
        [(a, b) for a, b in g.directed if b not in w],
        [e for e in g.bidirected if not (e & w)],
        input_confounded=g.input_confounded,
    )


def indicator(v: str) -> str:
    """Name of the intervention indicator attached to ``v`` by :func:`extend`."""
    return f"I_{v}"


def extend(g: Dmg) -> Dmg:
    """Add an indicator input ``I_v`` with edge ``I_v->v`` for every output ``v``."""
    if g.latents:
        raise InvalidGraph("extend expects an induced DMG without latent nodes")
    kinds = g.kinds
    directed = set(g.directed)
    for v in sorted(g.outputs):
        iv = indicator(v)
        if iv in kinds:
            raise NameCollision(f"indicator name {iv!r} already used")
        kinds[iv] = NodeKind.INPUT
        directed.add((iv, v))
    return Dmg(kinds, directed, g.bidirected, input_confounded=g.input_confounded)


def acyclify(g: Dmg) -> Dmg:
    """Acyclification: lift parents of each SCC to all members, erase edges
    inside SCCs, and confound SCC members pairwise.

    Bidirected edges of ``g`` are lifted to all member pairs of the two SCCs
    they join.
    """
    if g.latents:
        raise InvalidGraph("acyclify expects a graph without latent nodes")
    directed = set()
    for a, b in g.directed:
        sb = g.sc(b)
        if a in sb:
            continue
        for t in sb:
            directed.add((a, t))
    bidirected = set()
    for comp in {g.sc(v) for v in g.nodes}:
        for a, b in itertools.combinations(sorted(comp), 2):
            bidirected.add(frozenset((a, b)))
    for e in g.bidirected:
        p, q = tuple(e)
        for a in g.sc(p):
            for b in g.sc(q):
                if a != b:
                    bidirected.add(frozenset((a, b)))
    return Dmg(g.kinds, directed, bidirected, input_confounded=g.input_confounded)


def primed(v: str) -> str:
    """Name of the interventional-branch copy of ``v`` in a twin graph."""
    return f"{v}'"


def twin_graph(g: Dmg, w) -> Dmg:
    """Merge ``g`` with ``intervene(g, w)`` along the non-descendants of ``w``.

    Descendants of ``w`` (``w`` included) get a primed copy carrying the
    interventional branch; primed members of ``w`` are inputs. Latent nodes,
    if present, are shared and feed both branches. Bidirected edges are
    duplicated across branches because each stands for a latent source that
    feeds both. Each duplicated output ``v`` also gets ``v <-> v'``: the
    exogenous noise of ``v`` is a non-descendant of ``w`` and is shared.
    """
    w = g.check_nodes(w)
    bad = {v for v in w if g.kind(v) is NodeKind.LATENT}
    if bad:
        raise InvalidIntervention(f"cannot intervene on latent nodes: {sorted(bad)}")
    if not w:
        return g
    desc = descendants(g, w)
    kinds = g.kinds
    for v in sorted(desc):
        pv = primed(v)
        if pv in kinds:
            raise NameCollision(f"twin copy name {pv!r} already used")
        kinds[pv] = NodeKind.INPUT if v in w else g.kind(v)

    def copies(v):
        if v not in desc:
            return [v]
        return [v] if v in w else [v, primed(v)]

    def as_twin(v):
        return primed(v) if v in desc else v

    directed = set(g.directed)
    for a, b in g.directed:
        if b in desc and b not in w:
            directed.add((as_twin(a), primed(b)))
    bidirected = set()
    for e in g.bidirected:
        p, q = tuple(e)
        for a in copies(p):
            for b in copies(q):
                if a != b:
                    bidirected.add(frozenset((a, b)))
    for v in desc - w:
        if g.kind(v) is NodeKind.OUTPUT:
            bidirected.add(frozenset((v, primed(v))))
    return Dmg(kinds, directed, bidirected, input_confounded=g.input_confounded)


def input_confound(g: Dmg) -> Dmg:
    """Add ``j1<->j2`` for every pair of distinct input nodes."""
    j = sorted(g.inputs)
    if len(j) <= 1:
        return g
    bi = set(g.bidirected)
    for a, b in itertools.combinations(j, 2):
        bi.add(frozenset((a, b)))
    return Dmg(g.kinds, g.directed, bi, input_confounded=True)


def warn_soft_invariants(g: Dmg) -> None:
    for msg in g.warnings():
        warnings.warn(msg, stacklevel=2)
