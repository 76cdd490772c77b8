"""Interventional kernels of discrete models as tables."""

from sigmacalc.scm import enumerate_joint, intervene_discrete


def kernel(m, y, given=(), do=()):
    """``P(y | given, do(do))`` with every input of the intervened model as a parameter."""
    do = set(do) - set(m.inputs)
    m2 = intervene_discrete(m, do) if do else m
    return enumerate_joint(m2).to_table().conditional(set(y), set(given))
