"""Exact numerical models: linear-Gaussian and finite-discrete."""

from __future__ import annotations

from .discrete import (
    CompatibilityViolation,
    DiscreteJoint,
    DiscreteScm,
    Mechanism,
    enumerate_joint,
    extend_scm,
    from_equations,
    intervene_discrete,
    obs_value,
    random_discrete_scm,
    sample_discrete,
    sub_scm,
    validate_compatibility,
)
from .gaussian import GaussianKernel
from .linear import (
    LinearScm,
    ci_gaussian,
    intervene_linear,
    law_kernel,
    observational_law,
    partial_correlations,
    random_linear_scm,
    sample_linear,
)


def intervene_scm(m, w, values=None):
    """Perfect intervention on either model family (see the family functions)."""
    if isinstance(m, LinearScm):
        return intervene_linear(m, w, values)
    if isinstance(m, DiscreteScm):
        return intervene_discrete(m, w, values)
    raise TypeError(f"not a model: {type(m).__name__}")


def sample(m, xj=None, n: int = 1, seed=None) -> dict:
    """``n`` i.i.d. draws under ``do(x_J)``, as node -> array."""
    if isinstance(m, LinearScm):
        return sample_linear(m, xj, n, seed)
    if isinstance(m, DiscreteScm):
        return sample_discrete(m, xj, n, seed)
    raise TypeError(f"not a model: {type(m).__name__}")


def model_from_json(d: dict):
    fam = d.get("family")
    if fam == "linear" or (fam is None and "B" in d):
        return LinearScm.from_json(d)
    if fam == "discrete" or (fam is None and "mechanisms" in d):
        return DiscreteScm.from_json(d)
    from ..errors import MalformedSpec

    raise MalformedSpec("model family must be 'linear' or 'discrete'")


__all__ = [
    "LinearScm",
    "DiscreteScm",
    "DiscreteJoint",
    "Mechanism",
    "CompatibilityViolation",
    "GaussianKernel",
    "observational_law",
    "law_kernel",
    "intervene_scm",
    "intervene_linear",
    "intervene_discrete",
    "ci_gaussian",
    "partial_correlations",
    "enumerate_joint",
    "extend_scm",
    "validate_compatibility",
    "sub_scm",
    "sample",
    "from_equations",
    "random_linear_scm",
    "random_discrete_scm",
    "obs_value",
    "model_from_json",
]
