"""Random graph corpora for property checks."""

from __future__ import annotations

import itertools

import numpy as np

from .dmg import Dmg, NodeKind


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_dmg(
    rng,
    n: int,
    p_directed: float = 0.3,
    p_bidirected: float = 0.15,
    *,
    acyclic: bool = False,
    n_inputs: int = 0,
    p_input: float = 0.5,
    prefix: str = "v",
) -> Dmg:
    """Random DMG over ``n`` outputs named ``v0..``, plus optional inputs ``j0..``.

    Each ordered pair of outputs gets a directed edge with probability
    ``p_directed`` (only forward pairs of a random order when ``acyclic``);
    each unordered pair gets a bidirected edge with probability
    ``p_bidirected``. Inputs point into each output with probability
    ``p_input``.
    """
    rng = as_rng(rng)
    names = [f"{prefix}{i}" for i in range(n)]
    kinds = {v: NodeKind.OUTPUT for v in names}
    directed = []
    if acyclic:
        order = list(rng.permutation(n))
        for i, j in itertools.combinations(range(n), 2):
            if rng.random() < p_directed:
                directed.append((names[order[i]], names[order[j]]))
    else:
        for i, j in itertools.permutations(range(n), 2):
            if rng.random() < p_directed:
                directed.append((names[i], names[j]))
    bidirected = [
        (names[i], names[j])
        for i, j in itertools.combinations(range(n), 2)
        if rng.random() < p_bidirected
    ]
    for k in range(n_inputs):
        j = f"j{k}"
        kinds[j] = NodeKind.INPUT
        for v in names:
            if rng.random() < p_input:
                directed.append((j, v))
    return Dmg(kinds, directed, bidirected)


def corpus(seed, count: int, n_range=(2, 6), **kwargs) -> list[Dmg]:
    rng = as_rng(seed)
    lo, hi = n_range
    return [random_dmg(rng, int(rng.integers(lo, hi + 1)), **kwargs) for _ in range(count)]


def random_subset(rng, pool, p: float = 0.5) -> frozenset:
    rng = as_rng(rng)
    return frozenset(v for v in sorted(pool) if rng.random() < p)
