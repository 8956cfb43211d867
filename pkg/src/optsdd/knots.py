"""Interior-knot placement from sampled data.

The optimal rule sorts the design along one coordinate, treats the sorted
pairs as a piecewise-linear profile, and in each of ``m`` equal-width
reference regions keeps the sample point that ends the steepest profile
segment. No extra model evaluations are needed. A seeded random placement
is provided as a comparison baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bspline import KnotVector, make_open_uniform, open_knot_vector
from .dataset import Dataset
from .errors import DataError

BOUNDARY_NUDGE = 1e-9


@dataclass(frozen=True)
class CoordinateProfile:
    k: int
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if self.x.size < 2:
            raise DataError(f"coordinate {self.k}: need at least 2 distinct abscissae, got {self.x.size}")
        if np.any(np.diff(self.x) <= 0):
            raise DataError("profile abscissae must be strictly increasing")

    @property
    def slopes(self) -> np.ndarray:
        """Slope of each segment; segment ``i`` ends at ``x[i + 1]``."""
        return np.diff(self.y) / np.diff(self.x)

    def __call__(self, t):
        return np.interp(t, self.x, self.y)


@dataclass(frozen=True)
class ReferenceRegions:
    """``m`` equal-width regions tiling ``[a, b]``; region ``j`` is ``(e_j, e_{j+1}]``."""

    a: float
    b: float
    m: int

    @property
    def edges(self) -> np.ndarray:
        e = self.a + np.arange(self.m + 1) * (self.b - self.a) / self.m
        e[0], e[-1] = self.a, self.b  # exact tiling despite rounding
        return e

    def locate(self, x) -> np.ndarray:
        """0-based region index of each point (left end ``a`` goes to region 0)."""
        x = np.asarray(x, dtype=float)
        # searchsorted on interior edges with side="left" puts an edge value in the region it closes
        return np.searchsorted(self.edges[1:-1], x, side="left")


def build_profile(dataset: Dataset, k: int) -> CoordinateProfile:
    """Sort the design along coordinate ``k``; repeated abscissae keep their mean output."""
    if dataset.L < 2:
        raise DataError("need at least 2 samples to build a profile")
    x = dataset.inputs[:, k]
    y = dataset.outputs
    if not np.all(np.isfinite(y)):
        raise DataError("profile outputs must be finite")
    ux, inv = np.unique(x, return_inverse=True)
    sums = np.bincount(inv, weights=y, minlength=ux.size)
    counts = np.bincount(inv, minlength=ux.size)
    return CoordinateProfile(k, ux, sums / counts)


def select_internal_knots(profile: CoordinateProfile, regions: ReferenceRegions) -> np.ndarray:
    """One knot per region at the right end of the steepest profile segment.

    Segments are assigned to the region holding their right endpoint; equal
    slopes resolve to the leftmost candidate. A region without candidates
    gets its midpoint. Knots landing on ``a`` or ``b`` are moved inward by a
    relative ``1e-9`` so they stay simple interior knots.
    """
    if regions.m < 1:
        raise ValueError("need at least one reference region")
    slopes = np.abs(profile.slopes)
    if not np.all(np.isfinite(slopes)):
        raise DataError(f"coordinate {profile.k}: non-finite profile slopes")
    right_ends = profile.x[1:]
    inside = (right_ends > regions.a) & (right_ends <= regions.b)
    owner = regions.locate(right_ends)
    edges = regions.edges
    taus = np.empty(regions.m)
    for j in range(regions.m):
        cand = np.flatnonzero(inside & (owner == j))
        if cand.size == 0:
            taus[j] = 0.5 * (edges[j] + edges[j + 1])
        else:
            # argmax returns the first maximum, i.e. the leftmost candidate
            taus[j] = right_ends[cand[np.argmax(slopes[cand])]]
    eps = BOUNDARY_NUDGE * (regions.b - regions.a)
    taus = np.clip(taus, regions.a + eps, regions.b - eps)
    if np.any(np.diff(taus) <= 0):
        raise DataError(f"coordinate {profile.k}: selected knots are not strictly increasing: {taus}")
    return taus


def build_optimal_knots(dataset: Dataset, k: int, p: int, I: int, bounds: tuple[float, float]) -> KnotVector:
    """Open knot vector with ``I`` subintervals whose ``I - 1`` interior knots come from the data."""
    I = int(I)
    if I < 1:
        raise ValueError("subinterval count I must be at least 1")
    a, b = float(bounds[0]), float(bounds[1])
    if I == 1:
        return open_knot_vector(a, b, p)
    profile = build_profile(dataset, k)
    taus = select_internal_knots(profile, ReferenceRegions(a, b, I - 1))
    return open_knot_vector(a, b, p, taus)


def random_knots(a: float, b: float, p: int, I: int, seed: int = 0) -> KnotVector:
    """Baseline: ``I - 1`` sorted uniform draws as interior knots.

    Draws closer than ``1e-6 (b - a)`` to a neighbour or to a bound are
    redrawn so the interior knots stay simple.
    """
    I = int(I)
    if I < 1:
        raise ValueError("subinterval count I must be at least 1")
    rng = np.random.default_rng(seed)
    gap = 1e-6 * (b - a)
    need = I - 1
    taus = np.empty(0)
    while taus.size < need:
        draws = rng.uniform(a, b, need - taus.size)
        cand = np.sort(np.concatenate([taus, draws]))
        keep = [c for c in cand if c - a >= gap and b - c >= gap]
        kept: list[float] = []
        for c in keep:
            if not kept or c - kept[-1] >= gap:
                kept.append(c)
        taus = np.array(kept)
    return open_knot_vector(a, b, p, taus)


def knot_vector_for_mode(mode: str, dataset: Dataset | None, k: int, p: int, I: int,
                         bounds: tuple[float, float], seed: int = 0) -> KnotVector:
    a, b = bounds
    if mode == "uniform":
        return make_open_uniform(a, b, p, I)
    if mode == "random":
        return random_knots(a, b, p, I, seed)
    if mode == "optimal":
        if dataset is None:
            raise ValueError("optimal knots need the fitting dataset")
        return build_optimal_knots(dataset, k, p, I, bounds)
    raise ValueError(f"unknown knot mode {mode!r}")
