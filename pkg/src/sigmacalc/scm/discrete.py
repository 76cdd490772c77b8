"""Finite-domain models with explicit per-loop mechanisms.

A :class:`DiscreteScm` holds the full graph (outputs, inputs and latent
nodes), a finite domain per node, a distribution per latent node and a
mechanism table for every registered loop. Every strongly connected
component of outputs must have a mechanism; mechanisms for smaller loops are
needed only by interventions that split a component.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from ..dmg import Dmg, NodeKind, enumerate_loops, indicator, induced_dmg, induced_subgraph
from ..errors import (
    MalformedQuery,
    MalformedSpec,
    MissingSubLoopMechanism,
    NotUniquelySolvable,
    StateSpaceTooLarge,
)
from ..estimand import Table
from ..generators import as_rng

__all__ = [
    "Mechanism",
    "DiscreteScm",
    "DiscreteJoint",
    "CompatibilityViolation",
    "MAX_STATES",
    "from_equations",
    "enumerate_joint",
    "intervene_discrete",
    "extend_scm",
    "validate_compatibility",
    "sub_scm",
    "sample_discrete",
    "random_discrete_scm",
    "obs_value",
]

MAX_STATES = 10**6


def _grid(doms: list[int]) -> np.ndarray:
    """All assignments over ``doms`` as rows, last variable fastest."""
    if not doms:
        return np.zeros((1, 0), dtype=np.int64)
    return np.indices(doms).reshape(len(doms), -1).T.astype(np.int64)


@dataclass(frozen=True)
class Mechanism:
    """``g_S``: maps values of ``parents`` to values of ``loop``.

    ``table`` has shape ``(*parent domains, len(loop))``.
    """

    loop: tuple
    parents: tuple
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "loop", tuple(self.loop))
        object.__setattr__(self, "parents", tuple(self.parents))
        t = np.array(self.table, dtype=np.int64)
        if t.ndim != len(self.parents) + 1 or t.shape[-1] != len(self.loop):
            raise MalformedSpec(f"mechanism table for {list(self.loop)} has shape {t.shape}")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def __call__(self, values: Mapping[str, int]) -> tuple:
        return tuple(int(x) for x in self.table[tuple(values[p] for p in self.parents)])

    def apply(self, cols: Mapping[str, np.ndarray]) -> np.ndarray:
        """Vectorized evaluation; returns an array of shape (n, len(loop))."""
        if not self.parents:
            n = len(next(iter(cols.values()))) if cols else 1
            return np.broadcast_to(self.table, (n, len(self.loop)))
        return self.table[tuple(cols[p] for p in self.parents)]

    def to_json(self) -> dict:
        return {"loop": list(self.loop), "parents": list(self.parents), "table": self.table.tolist()}


class DiscreteScm:
    """Finite-domain model.

    Parameters
    ----------
    graph : Dmg
        Full graph with latent nodes; no bidirected edges.
    domains : mapping node -> int
        Domain sizes; values are ``0 .. size-1``.
    mechanisms : iterable of Mechanism
        One per registered loop (subsets of outputs).
    noise : mapping latent -> probability vector
    """

    def __init__(self, graph: Dmg, domains: Mapping[str, int], mechanisms: Iterable[Mechanism],
                 noise: Mapping[str, Iterable[float]]):
        if graph.bidirected:
            raise MalformedSpec("model graphs encode confounding with latent nodes, not bidirected edges")
        self.graph = graph
        self.domains = {v: int(domains[v]) for v in sorted(graph.nodes) if v in domains}
        missing = graph.nodes - self.domains.keys()
        if missing:
            raise MalformedSpec(f"no domain for {sorted(missing)}")
        if any(d < 1 for d in self.domains.values()):
            raise MalformedSpec("domains must be nonempty")
        self.noise = {}
        for u in sorted(graph.latents):
            if u not in noise:
                raise MalformedSpec(f"no distribution for latent node {u!r}")
            p = np.array(noise[u], dtype=float)
            if p.shape != (self.domains[u],) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
                raise MalformedSpec(f"distribution of {u!r} must be a probability vector of length {self.domains[u]}")
            p.setflags(write=False)
            self.noise[u] = p
        self.mechanisms: dict[frozenset, Mechanism] = {}
        outs = graph.outputs
        for mech in mechanisms:
            s = frozenset(mech.loop)
            if not s or not s <= outs:
                raise MalformedSpec(f"mechanism loop {sorted(s)} must be a nonempty set of outputs")
            if len(s) > 1 and induced_subgraph(graph, s).sc(min(s)) != s:
                raise MalformedSpec(f"{sorted(s)} is not a loop of the graph")
            pa = frozenset().union(*(graph.parents(v) for v in s)) - s
            if set(mech.parents) != pa or len(mech.parents) != len(pa):
                raise MalformedSpec(f"mechanism for {sorted(s)} must take parents {sorted(pa)}")
            shape = tuple(self.domains[p] for p in mech.parents) + (len(s),)
            if mech.table.shape != shape:
                raise MalformedSpec(f"mechanism table for {sorted(s)} must have shape {shape}")
            hi = np.array([self.domains[v] for v in mech.loop])
            if np.any(mech.table < 0) or np.any(mech.table >= hi):
                raise MalformedSpec(f"mechanism for {sorted(s)} leaves the domain")
            if s in self.mechanisms:
                raise MalformedSpec(f"duplicate mechanism for {sorted(s)}")
            self.mechanisms[s] = mech
        for v in sorted(outs):
            if graph.sc(v) not in self.mechanisms:
                raise MissingSubLoopMechanism(f"no mechanism for strongly connected component {sorted(graph.sc(v))}")

    @property
    def outputs(self) -> tuple:
        return tuple(sorted(self.graph.outputs))

    @property
    def inputs(self) -> tuple:
        return tuple(sorted(self.graph.inputs))

    @property
    def latents(self) -> tuple:
        return tuple(sorted(self.graph.latents))

    @property
    def induced_graph(self) -> Dmg:
        return induced_dmg(self.graph)

    @property
    def loops(self) -> list[frozenset]:
        return sorted(self.mechanisms, key=lambda s: (len(s), sorted(s)))

    def scc_order(self) -> list[frozenset]:
        """Output components in a deterministic topological order."""
        from ..identify import apt_order

        order = apt_order(self.graph)
        seen, out = set(), []
        for v in order:
            if v in self.graph.outputs and v not in seen:
                c = self.graph.sc(v)
                seen |= c
                out.append(c)
        return out

    def solve(self, cols: dict) -> dict:
        """Fill in output columns given latent and input columns."""
        cols = dict(cols)
        for c in self.scc_order():
            mech = self.mechanisms[c]
            vals = mech.apply(cols)
            for k, v in enumerate(mech.loop):
                cols[v] = np.asarray(vals[:, k])
        return cols

    def to_json(self) -> dict:
        g = self.graph
        return {
            "family": "discrete",
            "nodes": [{"id": v, "kind": g.kind(v).value, "domain": self.domains[v]} for v in sorted(g.nodes)],
            "directed": [list(e) for e in sorted(g.directed)],
            "mechanisms": [m.to_json() for _, m in sorted(self.mechanisms.items(), key=lambda kv: sorted(kv[0]))],
            "noise": {u: p.tolist() for u, p in self.noise.items()},
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "DiscreteScm":
        kinds = {n["id"]: n.get("kind", "output") for n in d["nodes"]}
        doms = {n["id"]: n["domain"] for n in d["nodes"]}
        g = Dmg(kinds, [tuple(e) for e in d.get("directed", [])])
        mechs = []
        for m in d["mechanisms"]:
            loop = list(m["loop"])
            parents = m.get("parents")
            if parents is None:
                s = frozenset(loop)
                parents = sorted(frozenset().union(*(g.parents(v) for v in s)) - s)
            mechs.append(Mechanism(loop, parents, m["table"]))
        return cls(g, doms, mechs, d.get("noise", {}))

    def __repr__(self) -> str:
        return f"DiscreteScm(outputs={list(self.outputs)}, inputs={list(self.inputs)}, loops={len(self.mechanisms)})"


def obs_value(m: DiscreteScm, v: str) -> int:
    """Index of the observational regime in the domain of indicator ``I_v``."""
    return m.domains[v]


@dataclass(frozen=True)
class DiscreteJoint:
    """``P(V | do(J))`` as an array with axes ``outputs`` then ``inputs``."""

    outputs: tuple
    inputs: tuple
    array: np.ndarray = field(repr=False)

    @property
    def vars(self) -> tuple:
        return self.outputs + self.inputs

    def to_table(self) -> Table:
        return Table(self.vars, self.array, self.outputs)

    def table(self, xj: Mapping[str, int] | None = None) -> np.ndarray:
        xj = dict(xj or {})
        if set(xj) != set(self.inputs):
            raise MalformedQuery(f"need values for inputs {list(self.inputs)}")
        return self.array[(Ellipsis,) + tuple(xj[j] for j in self.inputs)]


def _check_states(m: DiscreteScm, inputs) -> None:
    lat = int(np.prod([m.domains[u] for u in m.latents], dtype=float))
    inp = int(np.prod([m.domains[j] for j in inputs], dtype=float))
    out = int(np.prod([m.domains[v] for v in m.outputs], dtype=float))
    if lat * inp > MAX_STATES or out * inp > MAX_STATES:
        raise StateSpaceTooLarge(
            f"state space too large: {lat} latent x {inp} input assignments, {out} output cells"
        )


def enumerate_joint(m: DiscreteScm, fixed: Mapping[str, int] | None = None) -> DiscreteJoint:
    """Exact ``P(V | do(J))`` for every input assignment.

    Inputs listed in ``fixed`` are held at the given values and dropped from
    the result's axes.
    """
    fixed = dict(fixed or {})
    bad = set(fixed) - set(m.inputs)
    if bad:
        raise MalformedQuery(f"can only fix input nodes, got {sorted(bad)}")
    free = [j for j in m.inputs if j not in fixed]
    _check_states(m, free)
    lat = list(m.latents)
    names = lat + free
    doms = [m.domains[v] for v in names]
    grid = _grid(doms)
    cols = {v: grid[:, i] for i, v in enumerate(names)}
    for j, x in fixed.items():
        if not 0 <= x < m.domains[j]:
            raise MalformedQuery(f"value {x} outside the domain of {j!r}")
        cols[j] = np.full(len(grid), x, dtype=np.int64)
    w = np.ones(len(grid))
    for u in lat:
        w = w * m.noise[u][cols[u]]
    cols = m.solve(cols)
    outs = list(m.outputs)
    axes = outs + free
    shape = [m.domains[v] for v in axes]
    flat = np.ravel_multi_index([cols[v] for v in axes], shape) if axes else np.zeros(len(grid), dtype=np.int64)
    arr = np.bincount(flat, weights=w, minlength=int(np.prod(shape))).reshape(shape)
    return DiscreteJoint(tuple(outs), tuple(free), arr)


def sample_discrete(m: DiscreteScm, xj: Mapping[str, int] | None = None, n: int = 1, seed=None) -> dict:
    """``n`` i.i.d. draws of the outputs under ``do(x_J)``."""
    if n < 1:
        raise MalformedQuery("n must be at least 1")
    xj = dict(xj or {})
    if set(xj) != set(m.inputs):
        raise MalformedQuery(f"need values for inputs {list(m.inputs)}")
    rng = as_rng(seed)
    cols = {u: rng.choice(m.domains[u], size=n, p=m.noise[u]) for u in m.latents}
    cols.update({j: np.full(n, x, dtype=np.int64) for j, x in xj.items()})
    cols = m.solve(cols)
    return {v: np.asarray(cols[v]) for v in m.outputs}


def _drop_childless(g: Dmg, noise: Mapping) -> tuple[Dmg, dict]:
    gone = {u for u in g.latents if not g.children(u)}
    if not gone:
        return g, dict(noise)
    kinds = {v: k for v, k in g.kinds.items() if v not in gone}
    return Dmg(kinds, [e for e in g.directed if e[0] not in gone]), {u: p for u, p in noise.items() if u not in gone}


def intervene_discrete(m: DiscreteScm, w, values: Mapping[str, int] | None = None) -> DiscreteScm:
    """Perfect intervention on outputs ``w``.

    Mechanisms of loops meeting ``w`` are dropped. Without ``values`` the
    nodes become inputs; with ``values`` they stay outputs with constant
    mechanisms. Latent nodes left without children are removed.
    """
    w = frozenset([w]) if isinstance(w, str) else frozenset(w)
    m.graph.check_nodes(w)
    if not w <= m.graph.outputs:
        raise MalformedQuery(f"can only intervene on outputs, got {sorted(w - m.graph.outputs)}")
    g = m.graph
    kinds = g.kinds
    mechs = [mech for s, mech in m.mechanisms.items() if not (s & w)]
    if values is None:
        for v in w:
            kinds[v] = NodeKind.INPUT
    else:
        missing = w - set(values)
        if missing:
            raise MalformedQuery(f"no value for {sorted(missing)}")
        for v in sorted(w):
            x = int(values[v])
            if not 0 <= x < m.domains[v]:
                raise MalformedQuery(f"value {x} outside the domain of {v!r}")
            mechs.append(Mechanism((v,), (), [x]))
    g2 = Dmg(kinds, [e for e in g.directed if e[1] not in w])
    g2, noise = _drop_childless(g2, m.noise)
    doms = {v: m.domains[v] for v in g2.nodes}
    for v in sorted(g2.outputs):
        if not any(g2.sc(v) == frozenset(mech.loop) for mech in mechs):
            raise MissingSubLoopMechanism(
                f"intervention on {sorted(w)} needs a mechanism for the loop {sorted(g2.sc(v))}"
            )
    return DiscreteScm(g2, doms, mechs, noise)


def _eval_sub(m: DiscreteScm, nodes: frozenset, cols: dict) -> dict:
    """Solve ``nodes`` (outputs) from the registered mechanisms of the
    components of the subgraph they induce."""
    sub = induced_subgraph(m.graph, nodes)
    from ..identify import apt_order

    seen = set()
    for v in apt_order(sub):
        if v in seen:
            continue
        c = sub.sc(v)
        seen |= c
        mech = m.mechanisms.get(c)
        if mech is None:
            raise MissingSubLoopMechanism(f"no mechanism for the loop {sorted(c)}")
        vals = mech.apply(cols)
        for k, x in enumerate(mech.loop):
            cols[x] = np.asarray(vals[:, k])
    return cols


def extend_scm(m: DiscreteScm) -> DiscreteScm:
    """Model with an indicator input ``I_v`` for each output ``v``.

    ``I_v`` ranges over the values of ``v`` plus an observational value
    :func:`obs_value`. An indicator set to a value pins ``v`` to it; the
    remaining loop members are solved by the mechanisms of the sub-loops left
    over.
    """
    g = m.graph
    kinds = g.kinds
    directed = set(g.directed)
    doms = dict(m.domains)
    for v in m.outputs:
        iv = indicator(v)
        if iv in kinds:
            raise MalformedSpec(f"indicator name {iv!r} already used")
        kinds[iv] = NodeKind.INPUT
        directed.add((iv, v))
        doms[iv] = m.domains[v] + 1
    gx = Dmg(kinds, directed)
    mechs = []
    for s, mech in m.mechanisms.items():
        loop = mech.loop
        parents = tuple(sorted(set(mech.parents) | {indicator(v) for v in loop}))
        pdoms = [doms[p] for p in parents]
        grid = _grid(pdoms)
        cols = {p: grid[:, i] for i, p in enumerate(parents)}
        out = np.empty((len(grid), len(loop)), dtype=np.int64)
        # group rows by which loop members are pinned
        pins = np.stack([cols[indicator(v)] != m.domains[v] for v in loop], axis=1)
        for pattern in {tuple(r) for r in pins.tolist()}:
            rows = np.all(pins == np.array(pattern), axis=1)
            sub = {p: c[rows] for p, c in cols.items()}
            pinned = {v for v, p in zip(loop, pattern) if p}
            for v in pinned:
                sub[v] = sub[indicator(v)]
            rest = frozenset(loop) - pinned
            if rest:
                sub = _eval_sub(m, rest, sub)
            out[rows] = np.stack([sub[v] for v in loop], axis=1)
        mechs.append(Mechanism(loop, parents, out.reshape(tuple(pdoms) + (len(loop),))))
    return DiscreteScm(gx, doms, mechs, m.noise)


@dataclass(frozen=True)
class CompatibilityViolation:
    """Assignments where ``g_loop`` disagrees with ``g_sub_loop``."""

    sub_loop: tuple
    loop: tuple
    assignments: tuple

    def to_json(self) -> dict:
        return {"sub_loop": list(self.sub_loop), "loop": list(self.loop), "assignments": list(self.assignments)}


def validate_compatibility(m: DiscreteScm) -> list[CompatibilityViolation]:
    """Check every registered nested pair ``S' ⊊ S``: wherever ``x_S`` solves
    ``g_S``, its restriction must solve ``g_{S'}``.

    Returns one record per violating pair; empty means compatible.
    """
    out = []
    loops = m.loops
    for s in loops:
        big = m.mechanisms[s]
        grid = _grid([m.domains[p] for p in big.parents])
        cols = {p: grid[:, i] for i, p in enumerate(big.parents)}
        vals = big.apply(cols)
        for k, v in enumerate(big.loop):
            cols[v] = np.asarray(vals[:, k])
        for s2 in loops:
            if not s2 < s:
                continue
            small = m.mechanisms[s2]
            got = small.apply(cols)
            want = np.stack([cols[v] for v in small.loop], axis=1)
            bad = np.nonzero(np.any(got != want, axis=1))[0]
            if len(bad):
                recs = tuple(
                    {p: int(cols[p][r]) for p in big.parents} for r in bad.tolist()
                )
                out.append(CompatibilityViolation(tuple(sorted(s2)), tuple(sorted(s)), recs))
    return out


def sub_scm(m: DiscreteScm, c) -> DiscreteScm:
    """Sub-model on outputs ``c``: ``c`` with its parents, observed parents
    outside ``c`` turned into inputs, and the mechanisms of loops inside ``c``."""
    c = frozenset([c]) if isinstance(c, str) else frozenset(c)
    g = m.graph
    g.check_nodes(c)
    if not c or not c <= g.outputs:
        raise MalformedQuery("sub-model needs a nonempty set of outputs")
    pa = frozenset().union(*(g.parents(v) for v in c)) - c
    kinds = {v: NodeKind.OUTPUT for v in c}
    for v in pa:
        kinds[v] = NodeKind.LATENT if g.kind(v) is NodeKind.LATENT else NodeKind.INPUT
    g2 = Dmg(kinds, [e for e in g.directed if e[1] in c])
    mechs = [mech for s, mech in m.mechanisms.items() if s <= c]
    noise = {u: p for u, p in m.noise.items() if u in pa}
    return DiscreteScm(g2, {v: m.domains[v] for v in g2.nodes}, mechs, noise)


def _equation_table(v, parents, doms, eq) -> np.ndarray:
    shape = [doms[p] for p in parents]
    if callable(eq):
        grid = _grid(shape)
        vals = [eq(dict(zip(parents, map(int, row)))) for row in grid]
        return np.array(vals, dtype=np.int64).reshape(shape)
    t = np.array(eq, dtype=np.int64)
    if t.shape != tuple(shape):
        raise MalformedSpec(f"equation table for {v!r} must have shape {tuple(shape)} over parents {list(parents)}")
    return t


def from_equations(
    graph: Dmg,
    domains: Mapping[str, int],
    equations: Mapping[str, Callable | np.ndarray],
    noise: Mapping[str, Iterable[float]],
    *,
    loops: str = "all",
) -> DiscreteScm:
    """Build loop mechanisms from per-node structural equations.

    Each equation maps the values of the node's parents (sorted by name, as a
    dict for callables or as table axes) to a value. For every loop the
    mechanism is the unique solution of the loop's equations; a loop with no
    or several solutions for some parent assignment raises
    NotUniquelySolvable. Mechanisms built this way are compatible.

    ``loops="all"`` registers every loop; ``"scc"`` only the components.
    """
    doms = {v: int(domains[v]) for v in graph.nodes}
    tables = {}
    for v in sorted(graph.outputs):
        if v not in equations:
            raise MalformedSpec(f"no equation for {v!r}")
        tables[v] = (tuple(sorted(graph.parents(v))), _equation_table(v, sorted(graph.parents(v)), doms, equations[v]))
    comps = {graph.sc(v) for v in graph.outputs}
    wanted = []
    for comp in sorted(comps, key=sorted):
        wanted.extend(enumerate_loops(graph, comp) if loops == "all" else [comp])
    mechs = []
    for s in wanted:
        loop = tuple(sorted(s))
        parents = tuple(sorted(frozenset().union(*(graph.parents(v) for v in s)) - s))
        pgrid = _grid([doms[p] for p in parents])
        cand = _grid([doms[v] for v in loop])
        P, K = len(pgrid), len(cand)
        cols = {p: np.repeat(pgrid[:, i], K) for i, p in enumerate(parents)}
        cols.update({v: np.tile(cand[:, i], P) for i, v in enumerate(loop)})
        ok = np.ones(P * K, dtype=bool)
        for v in loop:
            pv, t = tables[v]
            ok &= t[tuple(cols[p] for p in pv)] == cols[v] if pv else (t == cols[v])
        ok = ok.reshape(P, K)
        counts = ok.sum(axis=1)
        if np.any(counts != 1):
            r = int(np.nonzero(counts != 1)[0][0])
            at = dict(zip(parents, map(int, pgrid[r])))
            raise NotUniquelySolvable(f"loop {list(loop)} has {int(counts[r])} solutions at {at}")
        sol = cand[ok.argmax(axis=1)]
        mechs.append(Mechanism(loop, parents, sol.reshape([doms[p] for p in parents] + [len(loop)])))
    return DiscreteScm(graph, doms, mechs, noise)


def noise_name(v: str) -> str:
    return f"n_{v}"


def confounder_name(a: str, b: str) -> str:
    return f"u_{a}_{b}"


def random_discrete_scm(
    rng,
    g: Dmg,
    *,
    domain: int | None = None,
    loops: str = "all",
    max_tries: int = 200,
) -> DiscreteScm:
    """Random positive model whose induced graph is ``g``.

    Each output ``v`` has its own noise ``n_v`` and each bidirected edge a
    latent confounder. With ``d`` the domain size, the equation is
    ``x_v = (Σ_w a_vw x_w + r_v(outside parents) + n_v) mod d`` where the sum
    runs over parents in the same strongly connected component and ``r_v`` is
    a random table. Noise shifts make every joint configuration possible.
    Component coefficients are redrawn until every loop is uniquely solvable.
    The default domain is 2 for acyclic graphs and 3 otherwise; when no
    coefficients mod 3 make every loop solvable, the primes 5 and 7 are tried.
    """
    rng = as_rng(rng)
    if g.latents:
        raise MalformedSpec("expected an induced DMG")
    if domain is not None:
        candidates = (domain,)
    else:
        candidates = (2,) if g.is_acyclic() else (3, 5, 7)
    for d in candidates:
        try:
            return _random_discrete(rng, g, d, loops, max_tries)
        except NotUniquelySolvable:
            continue
    raise NotUniquelySolvable(f"no uniquely solvable coefficients found in {max_tries} tries")


def _random_discrete(rng, g: Dmg, d: int, loops: str, max_tries: int) -> DiscreteScm:
    kinds = g.kinds
    directed = set(e for e in g.directed if e[0] != e[1])
    doms = {v: d for v in g.nodes}
    noise = {}
    for v in sorted(g.outputs):
        u = noise_name(v)
        kinds[u] = NodeKind.LATENT
        directed.add((u, v))
        doms[u] = d
    for e in sorted(tuple(sorted(e)) for e in g.bidirected):
        u = confounder_name(*e)
        kinds[u] = NodeKind.LATENT
        directed |= {(u, e[0]), (u, e[1])}
        doms[u] = d
    gp = Dmg(kinds, directed)
    for u in sorted(gp.latents):
        p = rng.uniform(0.2, 1.0, size=d)
        noise[u] = p / p.sum()

    outside = {}
    r_tables = {}
    for v in sorted(g.outputs):
        pa = sorted(gp.parents(v))
        outside[v] = [p for p in pa if p not in gp.sc(v) and p != noise_name(v)]
        r_tables[v] = rng.integers(0, d, size=[d] * len(outside[v]))

    for _ in range(max_tries):
        coef = {
            (v, w): int(rng.integers(1, d)) if d > 1 else 0
            for v in g.outputs for w in gp.parents(v) if w in gp.sc(v) and w != v
        }

        def make(v):
            pa = sorted(gp.parents(v))
            inner = [w for w in pa if (v, w) in coef]

            def eq(x, v=v, inner=inner):
                r = r_tables[v][tuple(x[p] for p in outside[v])] if outside[v] else r_tables[v]
                return int((sum(coef[v, w] * x[w] for w in inner) + int(r) + x[noise_name(v)]) % d)

            return eq

        try:
            return from_equations(gp, doms, {v: make(v) for v in g.outputs}, noise, loops=loops)
        except NotUniquelySolvable:
            continue
    raise NotUniquelySolvable(f"no uniquely solvable coefficients found in {max_tries} tries")
