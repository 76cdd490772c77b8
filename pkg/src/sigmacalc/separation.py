"""σ-separation and d-separation in directed mixed graphs.

The decision procedure is a reachability search over walk states
``(node, arrival mark)``. A conditioned non-collider stays open only while
every edge that leaves it by its tail points into its own strongly connected
component; that test is made when the edge is traversed, so three arrival
marks per node are enough.

:func:`oracle_separated` is an independent check that enumerates walks and
applies the open-walk definition triple by triple.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .dmg import Dmg, NodeKind
from .errors import GraphTooLarge, LatentInQuery, MalformedQuery

__all__ = [
    "Notion",
    "SeparationQuery",
    "WalkState",
    "sigma_separated",
    "d_separated",
    "separated",
    "reachable",
    "oracle_separated",
    "oracle_witness",
    "is_open_walk",
]

ORACLE_MAX_NODES = 8


class Notion(str, Enum):
    SIGMA = "sigma"
    D = "d"


def _fs(x) -> frozenset:
    if x is None:
        return frozenset()
    if isinstance(x, str):
        return frozenset([x])
    return frozenset(x)


@dataclass(frozen=True)
class SeparationQuery:
    """``a ⫫ b | c`` under a separation notion.

    Empty ``a`` or ``b`` is accepted and is trivially separated.
    """

    a: frozenset
    b: frozenset
    c: frozenset = field(default_factory=frozenset)
    notion: Notion = Notion.SIGMA

    def __post_init__(self):
        object.__setattr__(self, "a", _fs(self.a))
        object.__setattr__(self, "b", _fs(self.b))
        object.__setattr__(self, "c", _fs(self.c))
        object.__setattr__(self, "notion", Notion(self.notion))

    def to_json(self) -> dict:
        return {
            "a": sorted(self.a),
            "b": sorted(self.b),
            "c": sorted(self.c),
            "notion": self.notion.value,
        }


class WalkState(int, Enum):
    START = 0
    VIA_HEAD = 1
    VIA_TAIL = 2


_HEAD, _TAIL = True, False


def _incidence(g: Dmg):
    """Per node: list of (neighbour, mark at node, mark at neighbour)."""
    inc = {v: [] for v in g.nodes}
    for a, b in g.directed:
        if a == b:
            continue
        inc[a].append((b, _TAIL, _HEAD))
        inc[b].append((a, _HEAD, _TAIL))
    for e in g.bidirected:
        a, b = tuple(e)
        inc[a].append((b, _HEAD, _HEAD))
        inc[b].append((a, _HEAD, _HEAD))
    return inc


def _validate(g: Dmg, *sets) -> None:
    for s in sets:
        g.check_nodes(s)
        lat = [v for v in s if g.kind(v) is NodeKind.LATENT]
        if lat:
            raise LatentInQuery(f"latent nodes in query: {sorted(lat)}; marginalize them first")


def reachable(g: Dmg, a, c=(), notion: Notion | str = Notion.SIGMA) -> frozenset:
    """Nodes outside ``c`` joined to some node of ``a`` by a ``c``-open walk.

    Includes ``a - c`` itself (walks with a single node).
    """
    a, c = _fs(a), _fs(c)
    _validate(g, a, c)
    sigma = Notion(notion) is Notion.SIGMA
    inc = _incidence(g)

    def in_sc(v, w) -> bool:
        return sigma and w in g._sc[v]

    seen = set()
    todo = deque()
    for v in a - c:
        seen.add((v, WalkState.START))
        todo.append((v, WalkState.START))
    found = set(a - c)
    while todo:
        v, state = todo.popleft()
        v_in_c = v in c
        for w, mark_v, mark_w in inc[v]:
            if state is not WalkState.START:
                if state is WalkState.VIA_HEAD and mark_v is _HEAD:
                    if not v_in_c:
                        continue
                elif v_in_c and mark_v is _TAIL and not in_sc(v, w):
                    continue
            if mark_w is _TAIL:
                # w -> v: a conditioned w must stay inside its SCC on this side
                if w in c and not in_sc(w, v):
                    continue
                nxt = (w, WalkState.VIA_TAIL)
            else:
                nxt = (w, WalkState.VIA_HEAD)
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
                if w not in c:
                    found.add(w)
    return frozenset(found)


def separated(g: Dmg, a, b, c=(), notion: Notion | str = Notion.SIGMA) -> bool:
    a, b, c = _fs(a), _fs(b), _fs(c)
    _validate(g, a, b, c)
    if not a or not b:
        return True
    return not (reachable(g, a, c, notion) & b)


def _run(g: Dmg, q: SeparationQuery, notion: Notion) -> bool:
    if q.notion is not notion:
        raise MalformedQuery(f"query notion is {q.notion.value}, expected {notion.value}")
    return separated(g, q.a, q.b, q.c, notion)


def sigma_separated(g: Dmg, q: SeparationQuery) -> bool:
    return _run(g, q, Notion.SIGMA)


def d_separated(g: Dmg, q: SeparationQuery) -> bool:
    return _run(g, q, Notion.D)


# -- independent oracle ------------------------------------------------------


def _brute_sc(g: Dmg) -> dict:
    reach = {}
    for v in g.nodes:
        seen, stack = {v}, [v]
        while stack:
            x = stack.pop()
            for a, b in g.directed:
                if a == x and b not in seen:
                    seen.add(b)
                    stack.append(b)
        reach[v] = seen
    return {v: {w for w in g.nodes if w in reach[v] and v in reach[w]} for v in g.nodes}


def _steps(g: Dmg):
    """Per node: (neighbour, arrowhead at node?, arrowhead at neighbour?)."""
    out = {v: [] for v in g.nodes}
    for a, b in sorted(g.directed):
        if a != b:
            out[a].append((b, False, True))
            out[b].append((a, True, False))
    for a, b in sorted(tuple(sorted(e)) for e in g.bidirected):
        out[a].append((b, True, True))
        out[b].append((a, True, True))
    return out


def is_open_walk(walk, c, sc, notion: Notion | str = Notion.SIGMA, *, check_end: bool = True) -> bool:
    """Literal open-walk test.

    ``walk`` is ``[v1, (h1, t1), v2, ..., vn]`` where the middle items give for
    each edge whether it has an arrowhead at its left and right node.
    """
    sigma = Notion(notion) is Notion.SIGMA
    nodes = walk[0::2]
    marks = walk[1::2]
    if nodes[0] in c or (check_end and nodes[-1] in c):
        return False

    def scc(v):
        return sc[v] if sigma else {v}

    for i in range(1, len(nodes) - 1):
        prev, v, nxt = nodes[i - 1], nodes[i], nodes[i + 1]
        head_left = marks[i - 1][1]
        head_right = marks[i][0]
        if head_left and head_right:
            ok = v in c
        elif not head_left and head_right:  # prev <- v <-* nxt
            ok = v not in c or v in scc(prev)
        elif head_left and not head_right:  # prev *-> v -> nxt
            ok = v not in c or v in scc(nxt)
        else:  # prev <- v -> nxt
            ok = v not in c or (v in scc(prev) and v in scc(nxt))
        if not ok:
            return False
    return True


def oracle_witness(g: Dmg, q: SeparationQuery):
    """First open walk from ``q.a`` to ``q.b`` found by enumeration, or None.

    Walks are enumerated depth first up to ``2 * 3n + 1`` edges. A walk that
    repeats a ``(node, arrival mark)`` state can be shortened without closing
    it, so such extensions are skipped.
    """
    if len(g) > ORACLE_MAX_NODES:
        raise GraphTooLarge(f"oracle limited to {ORACLE_MAX_NODES} nodes, got {len(g)}")
    _validate(g, q.a, q.b, q.c)
    sc = _brute_sc(g)
    steps = _steps(g)
    max_edges = 2 * (3 * len(g)) + 1
    c = q.c
    for start in sorted(q.a):
        if start in c:
            continue
        if start in q.b:
            return [start]
        stack = [([start], [(start, None)])]
        while stack:
            walk, states = stack.pop()
            if len(walk) // 2 >= max_edges:
                continue
            here = walk[-1]
            for w, head_here, head_w in steps[here]:
                state = (w, head_w)
                if state in states:
                    continue
                new = walk + [(head_here, head_w), w]
                if not is_open_walk(new, c, sc, q.notion, check_end=False):
                    continue
                if w in q.b and w not in c:
                    return new[0::2]
                stack.append((new, states + [state]))
    return None


def oracle_separated(g: Dmg, q: SeparationQuery) -> bool:
    return oracle_witness(g, q) is None
