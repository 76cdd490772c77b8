"""Independent reference computations used to freeze expected values.

Nothing here imports the package: graphs are plain node/edge collections and
distributions are dense numpy arrays with one axis per variable.
"""

from __future__ import annotations

import itertools

import numpy as np


class IdFail(Exception):
    pass


# -- plain-graph helpers -------------------------------------------------------


class PlainAdmg:
    """Acyclic mixed graph as sets; bidirected edges are frozensets."""

    def __init__(self, nodes, directed, bidirected):
        self.nodes = frozenset(nodes)
        self.directed = frozenset((a, b) for a, b in directed if a in self.nodes and b in self.nodes)
        self.bidirected = frozenset(
            frozenset(e) for e in bidirected if set(e) <= self.nodes and len(set(e)) == 2
        )

    def sub(self, keep) -> "PlainAdmg":
        return PlainAdmg(keep, self.directed, self.bidirected)

    def cut_incoming(self, x) -> "PlainAdmg":
        return PlainAdmg(
            self.nodes,
            {(a, b) for a, b in self.directed if b not in x},
            {e for e in self.bidirected if not (e & set(x))},
        )

    def ancestors(self, s) -> frozenset:
        out, todo = set(s), list(s)
        while todo:
            v = todo.pop()
            for a, b in self.directed:
                if b == v and a not in out:
                    out.add(a)
                    todo.append(a)
        return frozenset(out)

    def c_components(self) -> list[frozenset]:
        left, comps = set(self.nodes), []
        while left:
            v = min(left)
            comp, todo = {v}, [v]
            while todo:
                u = todo.pop()
                for e in self.bidirected:
                    if u in e:
                        (w,) = e - {u}
                        if w not in comp:
                            comp.add(w)
                            todo.append(w)
            left -= comp
            comps.append(frozenset(comp))
        return comps

    def topological(self) -> list:
        indeg = {v: 0 for v in self.nodes}
        for _, b in self.directed:
            indeg[b] += 1
        ready = sorted(v for v, k in indeg.items() if k == 0)
        out = []
        while ready:
            v = ready.pop(0)
            out.append(v)
            for a, b in sorted(self.directed):
                if a == v:
                    indeg[b] -= 1
                    if indeg[b] == 0:
                        ready.append(b)
            ready.sort()
        if len(out) != len(self.nodes):
            raise ValueError("graph is cyclic")
        return out


# -- classic acyclic identification on dense tables ------------------------------


class _Dense:
    def __init__(self, names):
        self.names = list(names)
        self.pos = {v: i for i, v in enumerate(self.names)}

    def sum_out(self, t: np.ndarray, over) -> np.ndarray:
        axes = tuple(self.pos[v] for v in over)
        return t.sum(axis=axes, keepdims=True) if axes else t

    def cond(self, t, v, given, scope) -> np.ndarray:
        num = self.sum_out(t, set(scope) - set(given) - {v})
        den = self.sum_out(num, {v})
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
        return out


def acyclic_id(g: PlainAdmg, joint: np.ndarray, names, y, x) -> np.ndarray:
    """``P(y | do(x))`` by the recursive algorithm for acyclic mixed graphs.

    ``joint`` has one axis per entry of ``names`` (the nodes of ``g``). The
    result keeps every axis (size 1 where it does not depend on the variable).
    Raises :class:`IdFail` for non-identifiable queries.
    """
    dense = _Dense(names)
    order = g.topological()

    def rec(y, x, P, G):
        V = G.nodes
        if not x:
            return dense.sum_out(P, V - y)
        an = G.ancestors(y)
        if an != V:
            return rec(y, x & an, dense.sum_out(P, V - an), G.sub(an))
        w = (V - x) - G.cut_incoming(x).ancestors(y)
        if w:
            return rec(y, x | w, P, G)
        comps = G.sub(V - x).c_components()
        if len(comps) > 1:
            out = np.ones([1] * len(dense.names))
            for s in comps:
                out = out * rec(s, V - s, P, G)
            return dense.sum_out(out, V - (y | x))
        (s,) = comps
        comps_g = G.c_components()
        if comps_g == [V]:
            raise IdFail(sorted(s))
        local = [v for v in order if v in V]

        def factor(block):
            out = np.ones([1] * len(dense.names))
            for v in block:
                pred = set(local[: local.index(v)])
                out = out * dense.cond(P, v, pred, V)
            return out

        if s in comps_g:
            return dense.sum_out(factor(s), s - y)
        (big,) = [c for c in comps_g if s < c]
        return rec(y, x & big, factor(big), G.sub(big))

    return rec(frozenset(y), frozenset(x), joint, g)


def squeeze_to(arr: np.ndarray, names, keep, atol: float = 1e-12) -> tuple[list, np.ndarray]:
    """Drop the axes outside ``keep``; the array must be constant along them
    (the recursion may add do-variables the effect does not depend on)."""
    for i, v in enumerate(names):
        if v not in keep and arr.shape[i] > 1:
            first = np.take(arr, [0], axis=i)
            if not np.allclose(arr, first, atol=atol, rtol=0):
                raise AssertionError(f"result depends on {v!r} outside {sorted(keep)}")
            arr = first
    extra = tuple(i for i, v in enumerate(names) if v not in keep)
    kept = [v for v in names if v in keep]
    return kept, arr.squeeze(axis=extra) if extra else arr


# -- linear models ---------------------------------------------------------------


def neumann_covariance(B: np.ndarray, Omega: np.ndarray, tol: float = 1e-15, max_terms: int = 10_000):
    """Covariance of ``(I - B)^{-1} ε`` via the series ``Σ B^k``."""
    n = B.shape[0]
    R = np.eye(n)
    term = np.eye(n)
    for _ in range(max_terms):
        term = B @ term
        R = R + term
        if np.abs(term).max() < tol:
            break
    else:
        raise ValueError("series did not converge")
    return R @ Omega @ R.T


# -- hand-enumerated front-door model ----------------------------------------------

# U -> X, X -> Z, Z -> Y, U -> Y; all binary.
FD_PU = np.array([0.35, 0.65])
FD_PX_U = np.array([[0.8, 0.2], [0.3, 0.7]])  # [u, x]
FD_PZ_X = np.array([[0.9, 0.1], [0.25, 0.75]])  # [x, z]
FD_PY_ZU = np.array([[[0.7, 0.3], [0.4, 0.6]], [[0.2, 0.8], [0.55, 0.45]]])  # [z, u, y]


def frontdoor_joint() -> np.ndarray:
    """Observed ``P(x, z, y)`` by explicit summation over ``u``."""
    out = np.zeros((2, 2, 2))
    for u, x, z, y in itertools.product(range(2), repeat=4):
        out[x, z, y] += FD_PU[u] * FD_PX_U[u, x] * FD_PZ_X[x, z] * FD_PY_ZU[z, u, y]
    return out


def frontdoor_truth() -> np.ndarray:
    """``P(y | do(x))`` as an array ``[x, y]``."""
    out = np.zeros((2, 2))
    for u, x, z, y in itertools.product(range(2), repeat=4):
        out[x, y] += FD_PU[u] * FD_PZ_X[x, z] * FD_PY_ZU[z, u, y]
    return out
