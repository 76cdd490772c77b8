"""Bridges between package models and the independent ID oracle."""

import numpy as np

from sigmacalc.estimand import Table
from sigmacalc.scm import enumerate_joint

from kernels import kernel
from oracles import IdFail, PlainAdmg, acyclic_id, squeeze_to


def oracle_effect(g, m, y, w):
    """``P(y | do(w), do(J))`` from the oracle, or None when it fails.

    Inputs become parentless ordinary variables with a uniform law, so the
    oracle sees one joint distribution.
    """
    joint = enumerate_joint(m)
    names = sorted(g.outputs | g.inputs)
    axes = list(joint.outputs) + list(joint.inputs)
    arr = np.transpose(joint.array, [axes.index(v) for v in names])
    for j in joint.inputs:
        arr = arr / m.domains[j]
    plain = PlainAdmg(names, g.directed, [tuple(e) for e in g.bidirected])
    x = set(w) | set(g.inputs)
    try:
        res = acyclic_id(plain, arr, names, set(y), x)
    except IdFail:
        return None
    kept, a = squeeze_to(res, names, set(y) | x)
    a = np.broadcast_to(a, [m.domains[v] for v in kept])
    return Table(kept, a, set(y))


def true_effect(m, y, w):
    return kernel(m, y, (), w)
