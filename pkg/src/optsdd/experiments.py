"""Frequency-sweep workflows on the 2-DOF benchmark."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .distributions import sample
from .dynamics import case_input_spec, case_system, hz_to_rad, response
from .regression import FitConfig
from .surrogate import SddModel, fit_sdd


@dataclass(frozen=True)
class SigmaCurve:
    freqs_hz: np.ndarray
    mean: np.ndarray
    std: np.ndarray


def training_inputs(case: str, L: int, seed: int = 0, scheme: str = "lhs") -> np.ndarray:
    return sample(case_input_spec(case), L, scheme, seed)


def fit_at_frequency(case: str, freq_hz: float, x: np.ndarray, S: int, p, I, knot_mode: str,
                     fit: FitConfig | None = None, knot_seed: int = 0, cov: float | None = None,
                     literal: bool = False) -> SddModel:
    """Fit a surrogate of ``|Z1|`` at one frequency on the given design inputs."""
    sys = case_system(case, cov, literal)
    ds = Dataset(x, response(sys, hz_to_rad(freq_hz), x), source=f"{case}@{freq_hz}Hz")
    return fit_sdd(ds, case_input_spec(case), S, p, I, knot_mode, fit, knot_seed)


def sigma_curve(case: str, freqs_hz, x: np.ndarray, S: int, p, I, knot_mode: str,
                fit: FitConfig | None = None, knot_seed: int = 0, cov: float | None = None,
                literal: bool = False) -> SigmaCurve:
    """Surrogate mean and standard deviation of ``|Z1|`` at every frequency.

    One surrogate is fitted per frequency, all on the same design inputs, so
    knot selection sees a different response profile at each frequency.
    """
    f = np.atleast_1d(np.asarray(freqs_hz, dtype=float))
    mean = np.empty(f.size)
    std = np.empty(f.size)
    for i, fi in enumerate(f):
        m = fit_at_frequency(case, fi, x, S, p, I, knot_mode, fit, knot_seed, cov, literal)
        mean[i] = m.mean()
        std[i] = np.sqrt(m.variance())
    return SigmaCurve(f, mean, std)
