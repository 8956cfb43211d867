"""Fitted S-variate spline surrogate: prediction, statistics and persistence."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__
from .basis import OrthonormalBasis, UnivariateOrthonormalBasis, MultiIndexSet, eval_multivariate
from .bspline import KnotVector
from .dataset import Dataset
from .distributions import InputSpec, Marginal, sample
from .errors import DataError
from .knots import knot_vector_for_mode
from .regression import FitConfig, fit_lasso_cv, fit_sls

FORMAT = "optsdd-model"
FORMAT_VERSION = 1
CHUNK = 50_000


@dataclass(frozen=True)
class SddModel:
    spec: InputSpec
    basis: OrthonormalBasis
    coef: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        c = np.asarray(self.coef, dtype=float).reshape(-1)
        if c.size != len(self.basis):
            raise ValueError(f"{c.size} coefficients for {len(self.basis)} basis functions")
        c.setflags(write=False)
        object.__setattr__(self, "coef", c)

    @property
    def knots(self) -> list[KnotVector]:
        return [b.knots for b in self.basis.univariate]

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.spec.N:
            raise ValueError(f"points have {X.shape[1]} coordinates, model expects {self.spec.N}")
        if not np.all(self.spec.contains(X)):
            raise DataError("prediction point(s) outside the input support box")
        out = np.empty(X.shape[0])
        for s in range(0, X.shape[0], CHUNK):
            out[s:s + CHUNK] = eval_multivariate(self.basis, X[s:s + CHUNK]) @ self.coef
        return out

    def __call__(self, X) -> np.ndarray:
        return self.predict(X)

    def mean(self) -> float:
        """Mean of the surrogate: the constant-term coefficient."""
        return float(self.coef[0])

    def variance(self) -> float:
        """Variance of the surrogate: sum of squared non-constant coefficients."""
        return float(np.sum(self.coef[1:] ** 2))

    def resample(self, L: int, seed: int = 0, scheme: str = "mcs") -> np.ndarray:
        return self.predict(sample(self.spec, L, scheme, seed))

    def resample_cdf(self, L: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Sorted resampled predictions and plotting positions ``i / L``."""
        y = np.sort(self.resample(L, seed))
        return y, np.arange(1, y.size + 1) / y.size

    def pfail(self, threshold: float, sense: str = "exceed", L: int = 1_000_000, seed: int = 0) -> tuple[float, float]:
        """Resampled failure probability and its binomial standard error.

        ``sense="exceed"`` counts predictions above ``threshold``;
        ``"fall-below"`` counts predictions below it.
        """
        y = self.resample(L, seed)
        return failure_fraction(y, threshold, sense)

    # persistence -----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "package_version": __version__,
            "inputs": [_marginal_to_dict(m) for m in self.spec.marginals],
            "S": self.basis.index.S,
            "coordinates": [
                {"degree": b.knots.degree, "knots": list(b.knots.knots), "whitening": b.W.tolist()}
                for b in self.basis.univariate
            ],
            "coefficients": self.coef.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SddModel":
        if d.get("format") != FORMAT:
            raise ValueError("not an optsdd model file")
        if d.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {d.get('version')}")
        spec = InputSpec([_marginal_from_dict(m) for m in d["inputs"]])
        uni = []
        for m, c in zip(spec.marginals, d["coordinates"]):
            W = np.array(c["whitening"], dtype=float)
            W.setflags(write=False)
            uni.append(UnivariateOrthonormalBasis(KnotVector(c["degree"], c["knots"]), m, W))
        basis = OrthonormalBasis(tuple(uni), MultiIndexSet([b.n for b in uni], d["S"]))
        return cls(spec, basis, np.array(d["coefficients"], dtype=float), d.get("meta", {}))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "SddModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def coefficient_table(self) -> str:
        return "".join(f"{i + 1}\t{float(v)!r}\n" for i, v in enumerate(self.coef))


def _marginal_to_dict(m: Marginal) -> dict:
    return {"kind": m.kind, "lower": m.lower, "upper": m.upper, "mean": m.location, "std": m.scale}


def _marginal_from_dict(d: dict) -> Marginal:
    return Marginal(d["kind"], float(d["lower"]), float(d["upper"]), float(d["mean"]), float(d["std"]))


def failure_fraction(y, threshold: float, sense: str = "exceed") -> tuple[float, float]:
    y = np.asarray(y)
    if sense == "exceed":
        hits = np.count_nonzero(y > threshold)
    elif sense == "fall-below":
        hits = np.count_nonzero(y < threshold)
    else:
        raise ValueError(f"unknown failure sense {sense!r}, expected 'exceed' or 'fall-below'")
    pf = hits / y.size
    return float(pf), float(np.sqrt(pf * (1 - pf) / y.size))


def _per_coordinate(v, N, name):
    if np.isscalar(v):
        return [int(v)] * N
    v = [int(t) for t in v]
    if len(v) != N:
        raise ValueError(f"{name} needs one entry per coordinate ({N}), got {len(v)}")
    return v


def design_matrix(ds: Dataset, basis: OrthonormalBasis) -> np.ndarray:
    """Rows of basis evaluations at the design inputs; column 0 is all ones."""
    return eval_multivariate(basis, ds.inputs)


def build_knots(ds: Dataset, spec: InputSpec, p, I, knot_mode: str = "optimal", seed: int = 0,
                explicit: Sequence[KnotVector] | None = None) -> list[KnotVector]:
    N = spec.N
    p, I = _per_coordinate(p, N, "p"), _per_coordinate(I, N, "I")
    if knot_mode == "explicit":
        if explicit is None or len(explicit) != N:
            raise ValueError("explicit knot mode needs one knot vector per coordinate")
        return list(explicit)
    return [knot_vector_for_mode(knot_mode, ds, k, p[k], I[k], spec.marginals[k].bounds, seed) for k in range(N)]


def fit_sdd(ds: Dataset, spec: InputSpec, S: int = 1, p=1, I=8, knot_mode: str = "optimal",
            fit: FitConfig | None = None, knot_seed: int = 0,
            explicit: Sequence[KnotVector] | None = None) -> SddModel:
    """Knot selection, orthonormal basis, coefficient fit, in that order."""
    fit = fit or FitConfig()
    ds.check_support(spec)
    knots = build_knots(ds, spec, p, I, knot_mode, knot_seed, explicit)
    basis = OrthonormalBasis.build(knots, spec.marginals, S)
    A = design_matrix(ds, basis)
    meta = {"method": fit.method, "knot_mode": knot_mode, "training_size": ds.L,
            "fit_seed": fit.seed, "knot_seed": knot_seed, "source": ds.source}
    if fit.method == "sls":
        coef = fit_sls(A, ds.outputs)
    else:
        res = fit_lasso_cv(A, ds.outputs, fit)
        coef = res.coef
        meta["lambda"] = res.lam
    return SddModel(spec, basis, coef, meta)


# accuracy metrics ----------------------------------------------------------

def r2_score(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    ss_tot = np.sum((y_true - y_true.mean()) ** 2)
    if ss_tot == 0:
        raise ValueError("reference outputs have zero variance")
    return float(1.0 - np.sum((y_true - y_pred) ** 2) / ss_tot)


def rel_variance_error(var_model: float, var_ref: float) -> float:
    """Percent relative error of the variance (the "error of std" column convention)."""
    if var_ref == 0:
        raise ValueError("reference variance is zero")
    return float(abs(var_model - var_ref) / var_ref * 100.0)


def mean_abs_error(curve_model, curve_ref) -> float:
    """Average absolute deviation between two curves on a common grid."""
    a = np.asarray(curve_model, dtype=float)
    b = np.asarray(curve_ref, dtype=float)
    if a.shape != b.shape or a.size == 0:
        raise ValueError("curves must be non-empty and share a grid")
    return float(np.mean(np.abs(a - b)))


def metrics(model: SddModel, reference: Dataset) -> dict:
    """R^2 on held-out pairs, variance error (%) and mean absolute prediction error."""
    if reference.L == 0:
        raise ValueError("empty reference")
    pred = model.predict(reference.inputs)
    var_ref = float(np.var(reference.outputs, ddof=1)) if reference.L > 1 else 0.0
    return {
        "r2": r2_score(reference.outputs, pred),
        "rel_std_error": rel_variance_error(model.variance(), var_ref),
        "mean_abs_error": float(np.mean(np.abs(pred - reference.outputs))),
    }
