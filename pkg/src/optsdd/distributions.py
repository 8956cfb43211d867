"""Independent input random variables and seeded sampling.

Two marginal families are supported: uniform on ``[lower, upper]`` and a
Gaussian truncated to ``[lower, upper]``. Sampling is inverse-transform so
every draw lies in the support box by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

KINDS = ("uniform", "truncated-gaussian")


@dataclass(frozen=True)
class Marginal:
    """One-dimensional marginal on a bounded support.

    ``location``/``scale`` are the mean and standard deviation of the parent
    Gaussian for ``truncated-gaussian``; they are ignored for ``uniform``.
    """

    kind: str
    lower: float
    upper: float
    location: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown marginal kind {self.kind!r}, expected one of {KINDS}")
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ValueError("marginal bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"lower bound {self.lower} must be below upper bound {self.upper}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @classmethod
    def uniform(cls, lower: float, upper: float) -> "Marginal":
        return cls("uniform", float(lower), float(upper), 0.5 * (lower + upper), (upper - lower) / np.sqrt(12.0))

    @classmethod
    def truncated_gaussian(cls, mean: float, std: float, lower: float, upper: float) -> "Marginal":
        return cls("truncated-gaussian", float(lower), float(upper), float(mean), float(std))

    @property
    def bounds(self) -> tuple[float, float]:
        return (self.lower, self.upper)

    # standardized truncation points of the parent Gaussian
    def _alpha_beta(self):
        return ((self.lower - self.location) / self.scale, (self.upper - self.location) / self.scale)

    def _mass(self):
        alpha, beta = self._alpha_beta()
        return special.ndtr(beta) - special.ndtr(alpha)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lower) & (x <= self.upper)
        if self.kind == "uniform":
            out = np.where(inside, 1.0 / (self.upper - self.lower), 0.0)
        else:
            z = (x - self.location) / self.scale
            dens = np.exp(-0.5 * z * z) / (np.sqrt(2.0 * np.pi) * self.scale * self._mass())
            out = np.where(inside, dens, 0.0)
        return out if out.ndim else float(out)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "uniform":
            out = (x - self.lower) / (self.upper - self.lower)
        else:
            alpha, _ = self._alpha_beta()
            z = (x - self.location) / self.scale
            out = (special.ndtr(z) - special.ndtr(alpha)) / self._mass()
        out = np.clip(out, 0.0, 1.0)
        return out if out.ndim else float(out)

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        if np.any((q < 0) | (q > 1)):
            raise ValueError("quantile levels must lie in [0, 1]")
        if self.kind == "uniform":
            out = self.lower + q * (self.upper - self.lower)
        else:
            alpha, _ = self._alpha_beta()
            z = special.ndtri(special.ndtr(alpha) + q * self._mass())
            out = self.location + self.scale * z
        out = np.clip(out, self.lower, self.upper)
        return out if out.ndim else float(out)

    def mean(self) -> float:
        if self.kind == "uniform":
            return 0.5 * (self.lower + self.upper)
        alpha, beta = self._alpha_beta()
        phi = lambda t: np.exp(-0.5 * t * t) / np.sqrt(2.0 * np.pi)
        return float(self.location + self.scale * (phi(alpha) - phi(beta)) / self._mass())

    def variance(self) -> float:
        if self.kind == "uniform":
            return (self.upper - self.lower) ** 2 / 12.0
        alpha, beta = self._alpha_beta()
        phi = lambda t: np.exp(-0.5 * t * t) / np.sqrt(2.0 * np.pi)
        z = self._mass()
        term = (alpha * phi(alpha) - beta * phi(beta)) / z
        shift = (phi(alpha) - phi(beta)) / z
        return float(self.scale**2 * (1.0 + term - shift**2))


@dataclass(frozen=True)
class InputSpec:
    """Ordered collection of independent marginals."""

    marginals: tuple[Marginal, ...]

    def __init__(self, marginals: Sequence[Marginal]):
        marginals = tuple(marginals)
        if len(marginals) < 1:
            raise ValueError("an input spec needs at least one marginal")
        object.__setattr__(self, "marginals", marginals)

    @property
    def N(self) -> int:
        return len(self.marginals)

    @property
    def lower(self) -> np.ndarray:
        return np.array([m.lower for m in self.marginals])

    @property
    def upper(self) -> np.ndarray:
        return np.array([m.upper for m in self.marginals])

    def pdf(self, x) -> np.ndarray:
        """Joint density, the product of the marginal densities."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.ones(x.shape[0])
        for k, m in enumerate(self.marginals):
            out *= m.pdf(x[:, k])
        return out

    def contains(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.all((x >= self.lower) & (x <= self.upper), axis=1)


def sample(spec: InputSpec, L: int, scheme: str = "mcs", seed: int = 0) -> np.ndarray:
    """Draw an ``L x N`` input matrix.

    ``scheme`` is ``"mcs"`` (plain Monte Carlo) or ``"lhs"`` (Latin hypercube,
    one point per equiprobable stratum and coordinate, jittered inside the
    stratum). The result depends only on ``(spec, L, scheme, seed)``.
    """
    L = int(L)
    if L < 1:
        raise ValueError("sample size L must be at least 1")
    rng = np.random.default_rng(seed)
    N = spec.N
    if scheme == "mcs":
        u = rng.random((L, N))
    elif scheme == "lhs":
        u = np.empty((L, N))
        for k in range(N):
            strata = rng.permutation(L)
            u[:, k] = (strata + rng.random(L)) / L
    else:
        raise ValueError(f"unknown sampling scheme {scheme!r}, expected 'mcs' or 'lhs'")
    x = np.empty((L, N))
    for k, m in enumerate(spec.marginals):
        x[:, k] = m.quantile(u[:, k])
    return x
