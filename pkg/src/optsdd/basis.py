"""Measure-consistent orthonormal B-splines and the S-variate tensor basis.

Each coordinate's raw spline vector ``P = (1, B_2, ..., B_n)`` is whitened
against its marginal: with ``G = E[P P^T] = L L^T`` the orthonormal vector is
``psi = L^{-1} P``. Lower-triangular whitening keeps ``psi_1 = 1``, so every
other ``psi_i`` has zero mean. Multivariate terms are products of
non-constant univariate functions over variable subsets of size at most S.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg

from .bspline import KnotVector, eval_basis_matrix
from .distributions import Marginal
from .errors import NumericalError

MAX_CONDITION = 1e12


def quadrature_nodes(p: int) -> int:
    return math.ceil((2 * p + 2) / 2) + 4


def span_quadrature(kv: KnotVector, nodes: int | None = None,
                    max_width: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre points and weights on every non-empty knot span.

    ``max_width`` splits wide spans into equal pieces; polynomial-only
    integrands are exact without it, smooth densities converge with it.
    """
    q = quadrature_nodes(kv.degree) if nodes is None else nodes
    gx, gw = np.polynomial.legendre.leggauss(q)
    brk = np.unique(kv.array)
    if max_width is not None:
        pieces = [np.linspace(lo, hi, int(np.ceil((hi - lo) / max_width)) + 1)[:-1] for lo, hi in zip(brk[:-1], brk[1:])]
        brk = np.append(np.concatenate(pieces), brk[-1])
    lo, hi = brk[:-1, None], brk[1:, None]
    half = 0.5 * (hi - lo)
    x = (lo + hi) * 0.5 + half * gx[None, :]
    w = half * gw[None, :]
    return x.ravel(), w.ravel()


def raw_vector(kv: KnotVector, x) -> np.ndarray:
    """Auxiliary vector ``(1, B_2(x), ..., B_n(x))`` per point."""
    P = eval_basis_matrix(kv, x)
    P[:, 0] = 1.0
    return P


def moment_matrix(kv: KnotVector, marginal: Marginal, coordinate: int | None = None) -> np.ndarray:
    """``G = E[P P^T]`` under ``marginal`` by per-span Gauss-Legendre quadrature."""
    if not (np.isclose(marginal.lower, kv.a) and np.isclose(marginal.upper, kv.b)):
        raise ValueError(f"knot range [{kv.a}, {kv.b}] does not match the marginal support {marginal.bounds}")
    # the uniform density is constant per span; others get sub-spans a fraction of a std wide
    x, w = span_quadrature(kv, max_width=None if marginal.kind == "uniform" else 0.25 * marginal.scale)
    w = w * marginal.pdf(x)
    P = raw_vector(kv, x)
    G = (P * w[:, None]).T @ P
    # renormalize the density mass so psi_1 == 1 exactly
    G /= G[0, 0]
    G = 0.5 * (G + G.T)
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        t = np.unique(kv.array)
        j = int(np.argmin(np.diff(t)))
        where = f"coordinate {coordinate}: " if coordinate is not None else ""
        raise NumericalError(
            f"{where}spline moment matrix is ill-conditioned (cond {cond:.3g}); "
            f"closest knot pair {float(t[j])!r}, {float(t[j + 1])!r}"
        )
    return G


def whiten(G: np.ndarray) -> np.ndarray:
    """Lower-triangular ``W`` with ``W G W^T = I`` (inverse Cholesky factor)."""
    G = np.asarray(G, dtype=float)
    try:
        Lf = linalg.cholesky(G, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"Cholesky factorization of the moment matrix failed: {exc}") from None
    return linalg.solve_triangular(Lf, np.eye(G.shape[0]), lower=True)


@dataclass(frozen=True)
class UnivariateOrthonormalBasis:
    knots: KnotVector
    marginal: Marginal
    W: np.ndarray

    @classmethod
    def build(cls, kv: KnotVector, marginal: Marginal, coordinate: int | None = None) -> "UnivariateOrthonormalBasis":
        W = whiten(moment_matrix(kv, marginal, coordinate))
        W.setflags(write=False)
        return cls(kv, marginal, W)

    @property
    def n(self) -> int:
        return self.knots.n

    def __call__(self, x) -> np.ndarray:
        """Values ``psi_1..psi_n`` at each point, shape ``(len(x), n)``."""
        return raw_vector(self.knots, x) @ self.W.T


class MultiIndexSet:
    """Constant term plus all ``(u, i_u)`` with ``1 <= |u| <= S`` and every index >= 2.

    Subsets are enumerated by size and then lexicographically; index tuples
    lexicographically with the last coordinate varying fastest. Indices are
    stored 0-based, so non-constant univariate functions carry indices
    ``1..n_k - 1``.
    """

    def __init__(self, n: Sequence[int], S: int):
        n = tuple(int(v) for v in n)
        N = len(n)
        if N < 1:
            raise ValueError("need at least one coordinate")
        if not 1 <= S <= N:
            raise ValueError(f"interaction order S={S} must satisfy 1 <= S <= N={N}")
        if min(n) < 1:
            raise ValueError("each coordinate needs at least one basis function")
        self.n, self.N, self.S = n, N, int(S)
        self.subsets = [u for s in range(1, self.S + 1) for u in itertools.combinations(range(N), s)]

    def __len__(self) -> int:
        return basis_count(self.N, self.S, self.n)

    def terms(self):
        """Yield ``(u, i_u)`` pairs, starting with ``((), ())`` for the constant."""
        yield (), ()
        for u in self.subsets:
            for idx in itertools.product(*(range(1, self.n[k]) for k in u)):
                yield u, idx

    def __eq__(self, other):
        return isinstance(other, MultiIndexSet) and (self.n, self.S) == (other.n, other.S)

    def __repr__(self):
        return f"MultiIndexSet(n={self.n}, S={self.S})"


def basis_count(N: int, S: int, n: Sequence[int]) -> int:
    """Number of S-variate terms: ``1 + sum_{1<=|u|<=S} prod_{k in u} (n_k - 1)``."""
    if len(n) != N:
        raise ValueError(f"expected {N} basis counts, got {len(n)}")
    if not 1 <= S <= N:
        raise ValueError(f"interaction order S={S} must satisfy 1 <= S <= N={N}")
    total = 1
    for s in range(1, S + 1):
        for u in itertools.combinations(range(N), s):
            total += math.prod(n[k] - 1 for k in u)
    return total


@dataclass(frozen=True)
class OrthonormalBasis:
    """Per-coordinate orthonormal bases together with the S-variate index set."""

    univariate: tuple[UnivariateOrthonormalBasis, ...]
    index: MultiIndexSet

    @classmethod
    def build(cls, knots: Sequence[KnotVector], marginals: Sequence[Marginal], S: int) -> "OrthonormalBasis":
        if len(knots) != len(marginals):
            raise ValueError("one knot vector per marginal is required")
        uni = tuple(UnivariateOrthonormalBasis.build(kv, m, k) for k, (kv, m) in enumerate(zip(knots, marginals)))
        return cls(uni, MultiIndexSet([b.n for b in uni], S))

    def __len__(self) -> int:
        return len(self.index)

    @property
    def N(self) -> int:
        return len(self.univariate)

    def __call__(self, X) -> np.ndarray:
        return eval_multivariate(self, X)


def eval_multivariate(basis: OrthonormalBasis, X) -> np.ndarray:
    """Evaluate every S-variate basis function at each row of ``X``.

    Returns shape ``(len(X), len(basis))`` in canonical term order.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != basis.N:
        raise ValueError(f"points have {X.shape[1]} coordinates, basis expects {basis.N}")
    rows = X.shape[0]
    psi = [b(X[:, k])[:, 1:] for k, b in enumerate(basis.univariate)]
    blocks = [np.ones((rows, 1))]
    for u in basis.index.subsets:
        block = psi[u[0]]
        for k in u[1:]:
            block = (block[:, :, None] * psi[k][:, None, :]).reshape(rows, -1)
        blocks.append(block)
    return np.hstack(blocks)
