"""Cyclic linear-Gaussian models with inputs.

The structural equations read ``X_V = B X_V + Γ x_J + ε`` with
``ε ~ N(μ, Ω)``, so ``B[w, v]`` is the coefficient of ``v`` in the equation
of ``w``.
"""

from __future__ import annotations

import itertools
from typing import Mapping, Sequence

import numpy as np

from ..dmg import Dmg, NodeKind
from ..errors import MalformedQuery, MalformedSpec, SingularConditioning, SingularSystem
from ..generators import as_rng
from .gaussian import GaussianKernel

__all__ = [
    "LinearScm",
    "observational_law",
    "law_kernel",
    "intervene_linear",
    "partial_correlations",
    "ci_gaussian",
    "sample_linear",
    "random_linear_scm",
    "PCORR_TOL",
]

PCORR_TOL = 1e-9


class LinearScm:
    """Linear-Gaussian model, possibly cyclic.

    Parameters
    ----------
    outputs, inputs : sequence of str
        Node order for rows/columns of the matrices.
    B : array (|V|, |V|)
    Gamma : array (|V|, |J|), optional
    Omega : array (|V|, |V|), optional
        Symmetric positive semidefinite noise covariance; identity by default.
    mu : array (|V|,), optional
    input_cov : array (|J|, |J|), optional
        Covariance used when inputs are treated as random (see
        :func:`partial_correlations`); identity by default.
    """

    def __init__(self, outputs, inputs=(), B=None, Gamma=None, Omega=None, mu=None, input_cov=None):
        self.outputs = tuple(outputs)
        self.inputs = tuple(inputs)
        n, k = len(self.outputs), len(self.inputs)
        if len(set(self.outputs + self.inputs)) != n + k:
            raise MalformedSpec("node names must be unique")
        self.B = np.zeros((n, n)) if B is None else np.array(B, dtype=float).reshape(n, n)
        self.Gamma = np.zeros((n, k)) if Gamma is None else np.array(Gamma, dtype=float).reshape(n, k)
        self.Omega = np.eye(n) if Omega is None else np.array(Omega, dtype=float).reshape(n, n)
        self.mu = np.zeros(n) if mu is None else np.array(mu, dtype=float).reshape(n)
        self.input_cov = np.eye(k) if input_cov is None else np.array(input_cov, dtype=float).reshape(k, k)
        if not np.allclose(self.Omega, self.Omega.T, atol=1e-12):
            raise MalformedSpec("Omega must be symmetric")
        if n and np.linalg.eigvalsh(self.Omega).min() < -1e-10:
            raise MalformedSpec("Omega must be positive semidefinite")
        for a in (self.B, self.Gamma, self.Omega, self.mu):
            a.setflags(write=False)

    @property
    def graph(self) -> Dmg:
        """Induced DMG read off the sparsity patterns."""
        kinds = {v: NodeKind.OUTPUT for v in self.outputs}
        kinds.update({j: NodeKind.INPUT for j in self.inputs})
        directed = [
            (self.outputs[i], self.outputs[w])
            for w, i in zip(*np.nonzero(self.B))
        ]
        directed += [(self.inputs[i], self.outputs[w]) for w, i in zip(*np.nonzero(self.Gamma))]
        bidirected = [
            (self.outputs[a], self.outputs[b])
            for a, b in itertools.combinations(range(len(self.outputs)), 2)
            if self.Omega[a, b] != 0
        ]
        return Dmg(kinds, directed, bidirected)

    def index(self, names) -> list[int]:
        try:
            return [self.outputs.index(v) for v in names]
        except ValueError:
            raise MalformedQuery(f"unknown output(s) {sorted(set(names) - set(self.outputs))}") from None

    def solver(self) -> np.ndarray:
        """``(I - B)^{-1}``; raises SingularSystem when it does not exist."""
        n = len(self.outputs)
        M = np.eye(n) - self.B
        if n and abs(np.linalg.det(M)) < 1e-12:
            raise SingularSystem("I - B is singular; the cycles are not uniquely solvable")
        return np.linalg.inv(M) if n else M

    def to_json(self) -> dict:
        return {
            "family": "linear",
            "outputs": list(self.outputs),
            "inputs": list(self.inputs),
            "B": self.B.tolist(),
            "Gamma": self.Gamma.tolist(),
            "Omega": self.Omega.tolist(),
            "mu": self.mu.tolist(),
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "LinearScm":
        return cls(d["outputs"], d.get("inputs", ()), d.get("B"), d.get("Gamma"), d.get("Omega"), d.get("mu"),
                   d.get("input_cov"))

    def __repr__(self) -> str:
        return f"LinearScm(outputs={self.outputs}, inputs={self.inputs})"


def law_kernel(m: LinearScm) -> GaussianKernel:
    """Law of ``X_V`` as an affine kernel in ``x_J``."""
    R = m.solver()
    return GaussianKernel(m.outputs, m.inputs, R @ m.Gamma, R @ m.mu, R @ m.Omega @ R.T)


def observational_law(m: LinearScm, xj: Mapping[str, float] | None = None):
    """Mean vector and covariance matrix of ``X_V`` under ``do(x_J)``.

    Missing input values default to zero.
    """
    xj = dict(xj or {})
    unknown = set(xj) - set(m.inputs)
    if unknown:
        raise MalformedQuery(f"unknown input(s) {sorted(unknown)}")
    k = law_kernel(m)
    return k.mean(xj), k.S.copy()


def intervene_linear(m: LinearScm, w, values: Mapping[str, float] | None = None) -> LinearScm:
    """Perfect intervention on outputs ``w``.

    With ``values`` the nodes stay outputs with a point-mass law at the given
    value. Without, they become inputs and their former coefficients move
    into ``Gamma``.
    """
    w = [w] if isinstance(w, str) else sorted(w)
    idx = m.index(w)
    if values is not None:
        missing = set(w) - set(values)
        if missing:
            raise MalformedQuery(f"no value for {sorted(missing)}")
        B, G, O, mu = m.B.copy(), m.Gamma.copy(), m.Omega.copy(), m.mu.copy()
        B[idx, :] = 0.0
        G[idx, :] = 0.0
        O[idx, :] = 0.0
        O[:, idx] = 0.0
        for i, v in zip(idx, w):
            mu[i] = values[v]
        return LinearScm(m.outputs, m.inputs, B, G, O, mu, m.input_cov)
    keep = [i for i in range(len(m.outputs)) if i not in set(idx)]
    outputs = [m.outputs[i] for i in keep]
    inputs = list(m.inputs) + w
    B = m.B[np.ix_(keep, keep)]
    G = np.hstack([m.Gamma[keep], m.B[np.ix_(keep, idx)]])
    O = m.Omega[np.ix_(keep, keep)]
    k = len(m.inputs)
    cov = np.eye(k + len(w))
    cov[:k, :k] = m.input_cov
    return LinearScm(outputs, inputs, B, G, O, m.mu[keep], cov)


def _joint_cov(m: LinearScm, random_inputs: bool):
    k = law_kernel(m)
    if not random_inputs:
        return list(m.outputs), k.S
    names = list(m.outputs) + list(m.inputs)
    SJ = m.input_cov
    top = np.hstack([k.S + k.A @ SJ @ k.A.T, k.A @ SJ])
    bot = np.hstack([SJ @ k.A.T, SJ])
    return names, np.vstack([top, bot])


def partial_correlations(m: LinearScm, a, b, c=(), *, random_inputs: bool = False) -> np.ndarray:
    """Partial correlations ``ρ(u, v | c)`` for ``u ∈ a`` and ``v ∈ b``.

    The conditional covariance is the Schur complement of the ``c`` block.
    With ``random_inputs`` the inputs are Gaussian with covariance
    ``m.input_cov`` and may appear in the query sets.
    """
    a, b, c = (sorted([s]) if isinstance(s, str) else sorted(s) for s in (a, b, c))
    names, cov = _joint_cov(m, random_inputs)
    pos = {v: i for i, v in enumerate(names)}
    bad = set(a + b + c) - set(pos)
    if bad:
        raise MalformedQuery(f"nodes {sorted(bad)} are not random variables of the model")
    ab = a + [v for v in b if v not in set(a)]
    i = [pos[v] for v in ab]
    j = [pos[v] for v in c]
    K = cov[np.ix_(i, i)]
    if j:
        Scc = cov[np.ix_(j, j)]
        if np.linalg.matrix_rank(Scc, tol=1e-12 * max(1.0, float(np.abs(Scc).max()))) < len(j):
            raise SingularConditioning(f"covariance of {c} is singular")
        K = K - cov[np.ix_(i, j)] @ np.linalg.solve(Scc, cov[np.ix_(j, i)])
    d = np.sqrt(np.clip(np.diag(K), 0.0, None))
    out = np.zeros((len(a), len(b)))
    for r, u in enumerate(a):
        for s, v in enumerate(b):
            iu, iv = ab.index(u), ab.index(v)
            if u == v:
                out[r, s] = 1.0 if d[iu] > 0 else 0.0
            elif d[iu] > 0 and d[iv] > 0:
                out[r, s] = K[iu, iv] / (d[iu] * d[iv])
    return out


def ci_gaussian(m: LinearScm, a, b, c=(), *, random_inputs: bool = False, tol: float = PCORR_TOL) -> bool:
    """True iff every partial correlation between ``a`` and ``b`` given ``c``
    is below ``tol`` in magnitude."""
    r = partial_correlations(m, a, b, c, random_inputs=random_inputs)
    return bool(np.all(np.abs(r) < tol))


def sample_linear(m: LinearScm, xj: Mapping[str, float] | None = None, n: int = 1, seed=None) -> dict:
    """``n`` i.i.d. draws of ``X_V`` under ``do(x_J)``, as name -> array."""
    if n < 1:
        raise MalformedQuery("n must be at least 1")
    xj = dict(xj or {})
    rng = as_rng(seed)
    R = m.solver()
    x = np.array([xj.get(j, 0.0) for j in m.inputs])
    eps = rng.multivariate_normal(m.mu, m.Omega, size=n, method="eigh")
    X = (eps + m.Gamma @ x) @ R.T
    return {v: X[:, i] for i, v in enumerate(m.outputs)}


def random_linear_scm(
    rng,
    g: Dmg,
    *,
    coef_range=(0.3, 1.0),
    max_radius: float = 0.9,
    mu_scale: float = 1.0,
) -> LinearScm:
    """Random model whose sparsity matches the induced DMG ``g`` exactly.

    Coefficients have random sign and magnitude in ``coef_range``; ``B`` is
    rescaled to spectral radius at most ``max_radius``. ``Ω`` is a positive
    diagonal plus one rank-one latent factor per bidirected edge.
    """
    rng = as_rng(rng)
    if g.latents:
        raise MalformedSpec("expected an induced DMG without latent nodes")
    outputs = sorted(g.outputs)
    inputs = sorted(g.inputs)
    pos = {v: i for i, v in enumerate(outputs)}
    jpos = {j: i for i, j in enumerate(inputs)}
    n = len(outputs)
    lo, hi = coef_range

    def coef():
        return float(rng.choice([-1.0, 1.0]) * rng.uniform(lo, hi))

    B = np.zeros((n, n))
    G = np.zeros((n, len(inputs)))
    for a, b in sorted(g.directed):
        if a == b:
            continue
        if a in jpos:
            G[pos[b], jpos[a]] = coef()
        else:
            B[pos[b], pos[a]] = coef()
    rad = max(np.abs(np.linalg.eigvals(B)).max(initial=0.0), 0.0)
    if rad > max_radius:
        B *= max_radius / rad
    O = np.diag(rng.uniform(0.5, 1.5, size=n))
    for e in sorted(tuple(sorted(e)) for e in g.bidirected):
        lam = np.zeros(n)
        lam[pos[e[0]]] = coef()
        lam[pos[e[1]]] = coef()
        O += np.outer(lam, lam)
    mu = rng.normal(0.0, mu_scale, size=n)
    return LinearScm(outputs, inputs, B, G, O, mu)
