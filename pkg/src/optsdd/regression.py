"""Coefficient estimation: least squares by QR and LASSO with k-fold CV.

The LASSO objective is ``||b - A c||^2 + lam * sum_{j >= 1} |c_j|``; column 0
(the constant basis function) is never penalized so its coefficient keeps
estimating the mean.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np
from scipy import linalg

from .errors import ConfigError, NumericalError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitConfig:
    method: str = "lasso-cv"
    n_folds: int = 10
    n_lambdas: int = 100
    lambda_ratio: float = 1e-4
    lambdas: tuple[float, ...] | None = None
    seed: int = 0
    tol: float = 1e-8
    max_iter: int = 20_000
    fdev: float = 1e-5

    def __post_init__(self):
        if self.method not in ("sls", "lasso-cv"):
            raise ConfigError(f"unknown fit method {self.method!r}, expected 'sls' or 'lasso-cv'")
        if self.n_folds < 2:
            raise ConfigError("n_folds must be at least 2")
        if self.lambdas is not None:
            lam = np.asarray(self.lambdas, dtype=float)
            if lam.size == 0:
                raise ConfigError("empty lambda grid")
            if np.any(lam <= 0) or np.any(np.diff(lam) >= 0):
                raise ConfigError("lambda grid must be strictly positive and strictly decreasing")
            object.__setattr__(self, "lambdas", tuple(float(v) for v in lam))
        elif self.n_lambdas < 1 or not 0 < self.lambda_ratio < 1:
            raise ConfigError("need n_lambdas >= 1 and 0 < lambda_ratio < 1")


def fit_sls(A, b) -> np.ndarray:
    """Least-squares coefficients via column-pivoted QR."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    L, P = A.shape
    if L < P:
        raise NumericalError(f"underdetermined least squares: {L} samples for {P} basis functions")
    Q, R, piv = linalg.qr(A, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    if d[0] == 0 or d[-1] <= max(L, P) * np.finfo(float).eps * d[0]:
        raise NumericalError(f"design matrix is rank deficient (smallest pivot {d[-1]:.3g}, largest {d[0]:.3g})")
    z = linalg.solve_triangular(R, Q.T @ b)
    c = np.empty(P)
    c[piv] = z
    return c


@numba.njit(cache=True)
def _cd_sweep(G, g, c, half, scale, active_only):
    """One cyclic pass; returns the largest change in fitted-value units."""
    P = c.shape[0]
    delta_max = 0.0
    for j in range(P):
        if active_only and j > 0 and c[j] == 0.0:
            continue
        gjj = G[j, j]
        if gjj <= 0.0:
            continue
        rho = g[j] + gjj * c[j]
        if j == 0:
            new = rho / gjj
        elif rho > half:
            new = (rho - half) / gjj
        elif rho < -half:
            new = (rho + half) / gjj
        else:
            new = 0.0
        delta = new - c[j]
        if delta != 0.0:
            for k in range(P):
                g[k] -= G[k, j] * delta
            c[j] = new
            step = abs(delta) * scale[j]
            if step > delta_max:
                delta_max = step
    return delta_max


@numba.njit(cache=True)
def _cd_path(G, q, lambdas, c_init, scale, tol, max_iter, bb, tss, fdev):
    """Cyclic coordinate descent on the Gram form, warm-started along ``lambdas``.

    Minimizes ``c^T G c - 2 q^T c + lam * sum_{j>=1} |c_j|`` for each ``lam``.
    Full sweeps alternate with sweeps restricted to the active set. When the
    explained fraction of ``tss`` moves by less than ``fdev`` between grid
    points, the remaining grid points reuse the current solution.
    """
    P = q.shape[0]
    m = lambdas.shape[0]
    coefs = np.zeros((m, P))
    iters = np.zeros(m, dtype=np.int64)
    c = c_init.copy()
    g = q - G @ c
    prev = 0.0
    for i in range(m):
        half = 0.5 * lambdas[i]
        it = 0
        while it < max_iter:
            it += 1
            if _cd_sweep(G, g, c, half, scale, False) < tol:
                break
            while it < max_iter:
                it += 1
                if _cd_sweep(G, g, c, half, scale, True) < tol:
                    break
        coefs[i] = c
        iters[i] = it
        if fdev > 0.0 and tss > 0.0:
            rss = bb - 2.0 * (q @ c) + c @ (G @ c)
            explained = 1.0 - rss / tss
            if i > 0 and abs(explained - prev) < fdev:
                for r in range(i + 1, m):
                    coefs[r] = c
                break
            prev = explained
    return coefs, iters


def default_lambdas(A, b, n: int = 100, ratio: float = 1e-4) -> np.ndarray:
    """Log-spaced grid from the smallest all-zero penalty down to ``ratio`` of it."""
    lam_max = lambda_max(A, b)
    if lam_max <= 0:
        lam_max = 1.0
    return np.geomspace(lam_max, ratio * lam_max, n)


def lambda_max(A, b) -> float:
    """Smallest penalty at which every penalized coefficient is zero."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    a0 = A[:, 0]
    c0 = (a0 @ b) / (a0 @ a0) if a0 @ a0 > 0 else 0.0
    r = b - a0 * c0
    if A.shape[1] == 1:
        return 0.0
    return float(2.0 * np.max(np.abs(A[:, 1:].T @ r)))


def _tolerance(b, tol):
    b = np.asarray(b, dtype=float)
    scale = np.std(b)
    if scale == 0:
        scale = np.max(np.abs(b)) if b.size else 1.0
    return tol * (scale if scale > 0 else 1.0)


def lasso_path(A, b, lambdas: Sequence[float], tol: float = 1e-8, max_iter: int = 20_000,
               fdev: float = 0.0) -> np.ndarray:
    """Coefficients for each penalty in ``lambdas`` (rows follow the grid order).

    ``fdev > 0`` ends the path early once the explained-variance fraction
    stalls, copying the last solution into the remaining rows.
    """
    A = np.ascontiguousarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    lam = np.ascontiguousarray(lambdas, dtype=float)
    if lam.size == 0:
        raise ConfigError("empty lambda grid")
    G = A.T @ A
    q = A.T @ b
    # coefficient steps are measured by their effect on the fitted values
    scale = np.sqrt(np.diag(G) / max(A.shape[0], 1))
    tss = float(np.sum((b - b.mean()) ** 2))
    coefs, iters = _cd_path(G, q, lam, np.zeros(A.shape[1]), scale, _tolerance(b, tol), int(max_iter),
                            float(b @ b), tss, float(fdev))
    if np.any(iters >= max_iter):
        log.warning("coordinate descent hit max_iter=%d on %d grid point(s)", max_iter, np.sum(iters >= max_iter))
    return coefs


def cv_folds(L: int, n_folds: int, seed: int) -> list[np.ndarray]:
    """Seeded disjoint partition of ``0..L-1`` into ``n_folds`` near-equal folds."""
    if L < n_folds:
        raise ConfigError(f"{L} samples cannot be split into {n_folds} folds")
    perm = np.random.default_rng(seed).permutation(L)
    return [np.sort(f) for f in np.array_split(perm, n_folds)]


@dataclass(frozen=True)
class LassoCVResult:
    coef: np.ndarray
    lam: float
    lambdas: np.ndarray
    cv_error: np.ndarray


def fit_lasso_cv(A, b, cfg: FitConfig | None = None) -> LassoCVResult:
    """LASSO with the penalty chosen by minimum k-fold CV error.

    The CV error for each penalty is the fold-averaged sum of squared
    held-out residuals. Ties resolve to the larger penalty.
    """
    cfg = cfg or FitConfig()
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    L = A.shape[0]
    if cfg.lambdas is not None:
        lambdas = np.asarray(cfg.lambdas)
    else:
        lambdas = default_lambdas(A, b, cfg.n_lambdas, cfg.lambda_ratio)
    folds = cv_folds(L, cfg.n_folds, cfg.seed)
    err = np.zeros(lambdas.size)
    for held in folds:
        train = np.setdiff1d(np.arange(L), held, assume_unique=True)
        coefs = lasso_path(A[train], b[train], lambdas, cfg.tol, cfg.max_iter, cfg.fdev)
        resid = b[held][None, :] - coefs @ A[held].T
        err += np.sum(resid**2, axis=1)
    err /= cfg.n_folds
    if not np.all(np.isfinite(err)):
        raise NumericalError("non-finite cross-validation error")
    best = int(np.argmin(err))
    coef = lasso_path(A, b, lambdas[: best + 1], cfg.tol, cfg.max_iter, cfg.fdev)[-1]
    log.debug("lasso-cv picked lambda %.4g (index %d of %d)", lambdas[best], best, lambdas.size)
    return LassoCVResult(coef, float(lambdas[best]), lambdas, err)


def fit(A, b, cfg: FitConfig | None = None) -> np.ndarray:
    cfg = cfg or FitConfig()
    if cfg.method == "sls":
        return fit_sls(A, b)
    return fit_lasso_cv(A, b, cfg).coef
