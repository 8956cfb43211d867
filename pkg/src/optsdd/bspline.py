"""Open knot vectors and univariate B-spline evaluation (Cox-de Boor)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class KnotVector:
    """A (p+1)-open knot sequence on ``[a, b]``.

    The first and last ``p + 1`` entries equal ``a`` and ``b``; interior knots
    may repeat at most ``p + 1`` times.
    """

    degree: int
    knots: tuple[float, ...]

    def __init__(self, degree: int, knots: Sequence[float]):
        p = int(degree)
        t = tuple(float(v) for v in knots)
        if p < 0:
            raise ValueError("degree must be non-negative")
        if len(t) < 2 * (p + 1):
            raise ValueError(f"a degree-{p} open knot vector needs at least {2 * (p + 1)} entries, got {len(t)}")
        arr = np.asarray(t)
        if not np.all(np.isfinite(arr)):
            raise ValueError("knots must be finite")
        if np.any(np.diff(arr) < 0):
            raise ValueError("knots must be non-decreasing")
        a, b = arr[0], arr[-1]
        if not a < b:
            raise ValueError("knot vector must span a non-empty interval")
        if np.any(arr[: p + 1] != a) or np.any(arr[-(p + 1):] != b):
            raise ValueError(f"knot vector is not {p + 1}-open: first and last {p + 1} knots must equal the bounds")
        inner = arr[(arr > a) & (arr < b)]
        if inner.size:
            _, counts = np.unique(inner, return_counts=True)
            if counts.max() > p + 1:
                raise ValueError(f"interior knot multiplicity {counts.max()} exceeds p+1={p + 1}")
        # boundary multiplicity above p+1 would create empty leading basis functions
        if np.count_nonzero(arr == a) > p + 1 or np.count_nonzero(arr == b) > p + 1:
            raise ValueError(f"boundary knot multiplicity exceeds p+1={p + 1}")
        object.__setattr__(self, "degree", p)
        object.__setattr__(self, "knots", t)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.knots)

    @property
    def a(self) -> float:
        return self.knots[0]

    @property
    def b(self) -> float:
        return self.knots[-1]

    @property
    def n(self) -> int:
        """Number of basis functions."""
        return len(self.knots) - self.degree - 1

    @property
    def I(self) -> int:
        """Number of non-empty subintervals."""
        return len(set(self.knots)) - 1

    @property
    def interior(self) -> np.ndarray:
        arr = self.array
        return arr[(arr > self.a) & (arr < self.b)]

    def to_text(self) -> str:
        return "".join(f"{v!r}\n" for v in self.knots)

    @classmethod
    def from_text(cls, text: str) -> "KnotVector":
        """Parse one knot per line; the degree is read off the boundary multiplicity."""
        vals = [float(line) for line in text.split() if line.strip()]
        if not vals:
            raise ValueError("empty knot list")
        p = sum(1 for v in vals if v == vals[0]) - 1
        return cls(p, vals)


def open_knot_vector(a: float, b: float, p: int, interior: Sequence[float] = ()) -> KnotVector:
    """Wrap sorted interior knots with ``p + 1`` copies of each bound."""
    interior = [float(v) for v in interior]
    return KnotVector(p, [float(a)] * (p + 1) + interior + [float(b)] * (p + 1))


def make_open_uniform(a: float, b: float, p: int, I: int) -> KnotVector:
    """Open knot vector with ``I`` equal subintervals (``I - 1`` simple interior knots)."""
    if int(I) < 1:
        raise ValueError("subinterval count I must be at least 1")
    if not a < b:
        raise ValueError("need a < b")
    interior = np.linspace(a, b, int(I) + 1)[1:-1]
    return open_knot_vector(a, b, p, interior)


def find_span(kv: KnotVector, x) -> np.ndarray:
    """Index ``i`` (0-based) with ``t[i] <= x < t[i+1]``; ``x = b`` maps to the last span."""
    t = kv.array
    span = np.searchsorted(t, x, side="right") - 1
    return np.clip(span, kv.degree, kv.n - 1)


def eval_basis_matrix(kv: KnotVector, x) -> np.ndarray:
    """Evaluate all ``n`` basis functions at each point of ``x``.

    Returns an array of shape ``(len(x), n)``. Uses the triangular recursion
    over the ``p + 1`` functions active on each point's span.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise ValueError("x must be one-dimensional")
    if np.any(~np.isfinite(x)) or np.any(x < kv.a) or np.any(x > kv.b):
        bad = x[~((x >= kv.a) & (x <= kv.b))]
        raise ValueError(f"evaluation point(s) outside [{kv.a}, {kv.b}]: {bad[:5]}")
    p, t = kv.degree, kv.array
    span = find_span(kv, x)
    m = x.size
    N = np.zeros((m, p + 1))
    N[:, 0] = 1.0
    left = np.zeros((m, p + 1))
    right = np.zeros((m, p + 1))
    for j in range(1, p + 1):
        left[:, j] = x - t[span + 1 - j]
        right[:, j] = t[span + j] - x
        saved = np.zeros(m)
        for r in range(j):
            temp = N[:, r] / (right[:, r + 1] + left[:, j - r])
            N[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        N[:, j] = saved
    out = np.zeros((m, kv.n))
    cols = span[:, None] - p + np.arange(p + 1)[None, :]
    np.put_along_axis(out, cols, N, axis=1)
    return out


def eval_basis(kv: KnotVector, x: float) -> np.ndarray:
    """Values ``B_1..B_n`` at a single point."""
    return eval_basis_matrix(kv, [x])[0]
