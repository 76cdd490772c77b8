"""Affine Gaussian kernels: ``targets | params ~ N(A @ params + b, S)``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import MalformedQuery, SingularConditioning

__all__ = ["GaussianKernel"]


@dataclass(frozen=True)
class GaussianKernel:
    """Gaussian kernel whose mean is affine in the parameters and whose
    covariance does not depend on them.

    Attributes
    ----------
    targets, params : tuple of str
    A : ndarray, shape (len(targets), len(params))
    b : ndarray, shape (len(targets),)
    S : ndarray, shape (len(targets), len(targets))
    """

    targets: tuple
    params: tuple
    A: np.ndarray
    b: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        t, p = tuple(self.targets), tuple(self.params)
        object.__setattr__(self, "targets", t)
        object.__setattr__(self, "params", p)
        A = np.asarray(self.A, dtype=float).reshape(len(t), len(p))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(len(t)))
        object.__setattr__(self, "S", np.asarray(self.S, dtype=float).reshape(len(t), len(t)))
        if set(t) & set(p):
            raise MalformedQuery("kernel targets and parameters overlap")

    def _ti(self, names) -> list[int]:
        try:
            return [self.targets.index(v) for v in names]
        except ValueError:
            raise MalformedQuery(f"{sorted(set(names) - set(self.targets))} are not kernel targets") from None

    def marginal(self, keep: Sequence[str]) -> "GaussianKernel":
        keep = [v for v in self.targets if v in set(keep)]
        i = self._ti(keep)
        return GaussianKernel(keep, self.params, self.A[i], self.b[i], self.S[np.ix_(i, i)])

    def conditional(self, target: Sequence[str], given: Sequence[str]) -> "GaussianKernel":
        """Kernel of ``target`` given ``given`` (targets) and the parameters."""
        target = [v for v in self.targets if v in set(target)]
        given = [v for v in self.targets if v in set(given)]
        if set(target) & set(given):
            raise MalformedQuery("target and conditioning sets overlap")
        t, g = self._ti(target), self._ti(given)
        if not g:
            return self.marginal(target)
        Sgg = self.S[np.ix_(g, g)]
        if np.linalg.matrix_rank(Sgg, tol=1e-12 * max(1.0, float(np.abs(Sgg).max()))) < len(g):
            raise SingularConditioning(f"covariance of {given} is singular")
        K = np.linalg.solve(Sgg, self.S[np.ix_(g, t)]).T  # S_tg S_gg^-1
        A = np.hstack([self.A[t] - K @ self.A[g], K])
        b = self.b[t] - K @ self.b[g]
        S = self.S[np.ix_(t, t)] - K @ self.S[np.ix_(g, t)]
        return GaussianKernel(target, self.params + tuple(given), A, b, (S + S.T) / 2)

    def integrate(self, mixing: "GaussianKernel") -> "GaussianKernel":
        """``∫ self(· | z, r) d mixing(z | p)`` for ``z = mixing.targets``.

        The result is a kernel over ``self.targets`` with parameters
        ``r ∪ p``.
        """
        z = list(mixing.targets)
        missing = set(z) - set(self.params)
        if missing:
            raise MalformedQuery(f"mixing targets {sorted(missing)} are not kernel parameters")
        rest = [v for v in self.params if v not in set(z)]
        params = rest + [v for v in mixing.params if v not in set(rest)]
        col = {v: i for i, v in enumerate(params)}
        Az = self.A[:, [self.params.index(v) for v in z]]
        A = np.zeros((len(self.targets), len(params)))
        for v in rest:
            A[:, col[v]] += self.A[:, self.params.index(v)]
        for k, v in enumerate(mixing.params):
            A[:, col[v]] += Az @ mixing.A[:, k]
        b = self.b + Az @ mixing.b
        S = self.S + Az @ mixing.S @ Az.T
        return GaussianKernel(self.targets, params, A, b, (S + S.T) / 2)

    def aligned(self, targets: Sequence[str], params: Sequence[str]) -> "GaussianKernel":
        """Reorder targets and params; parameters absent here get zero columns."""
        i = self._ti(targets)
        A = np.zeros((len(i), len(params)))
        for k, v in enumerate(params):
            if v in self.params:
                A[:, k] = self.A[i, self.params.index(v)]
        extra = set(self.params) - set(params)
        if extra and np.any(np.abs(self.A[:, [self.params.index(v) for v in extra]]) > 0):
            raise MalformedQuery(f"kernel depends on parameters {sorted(extra)} outside the alignment")
        return GaussianKernel(tuple(targets), tuple(params), A, self.b[i], self.S[np.ix_(i, i)])

    def max_abs_diff(self, other: "GaussianKernel") -> float:
        """Largest entrywise difference of mean maps and covariances, after
        aligning on the union of parameters."""
        params = sorted(set(self.params) | set(other.params))
        a = self.aligned(self.targets, params)
        b = other.aligned(self.targets, params)
        return float(max(np.abs(a.A - b.A).max(initial=0.0), np.abs(a.b - b.b).max(initial=0.0),
                         np.abs(a.S - b.S).max(initial=0.0)))

    def mean(self, values=None) -> np.ndarray:
        values = values or {}
        x = np.array([values.get(v, 0.0) for v in self.params], dtype=float)
        return self.A @ x + self.b
