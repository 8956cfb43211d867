"""Analytic two-degree-of-freedom spring-mass-damper benchmark.

Chain layout: mass 1 is tied to ground by spring/damper 1 and to mass 2 by
spring/damper 2. Both masses, both dampers and both springs share one random
factor each::

    M1 = M2 = M0 (1 + dM XM),  C1 = C2 = C0 (1 + dC XC),  K1 = K2 = K0 (1 + dK XK)

A harmonic force ``F = (1, 0)`` N drives mass 1; the steady-state amplitude
solves a 2x2 complex system in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .distributions import InputSpec, Marginal, sample
from .errors import DataError

PARAMS = ("M", "C", "K")


@dataclass(frozen=True)
class TwoDofSystem:
    """Nominal parameters, COVs, and which parameters the input vector drives.

    ``random`` lists the parameter names (``"M"``, ``"C"``, ``"K"``) mapped,
    in order, to the columns of a realization matrix. Parameters not listed
    stay at their nominal values.
    """

    mass: float = 1.0
    damping: float = 1.0
    stiffness: float = 15000.0
    cov: dict = field(default_factory=lambda: {"M": 0.05, "C": 0.05, "K": 0.05})
    random: tuple[str, ...] = ("M", "C", "K")
    force: tuple[float, float] = (1.0, 0.0)

    def __post_init__(self):
        for name in self.random:
            if name not in PARAMS:
                raise ValueError(f"unknown random parameter {name!r}")

    @property
    def N(self) -> int:
        return len(self.random)

    def parameters(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Realized ``(M, C, K)`` arrays for each row of ``x``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.N:
            raise ValueError(f"realization has {x.shape[1]} columns, system expects {self.N}")
        nominal = {"M": self.mass, "C": self.damping, "K": self.stiffness}
        out = {}
        for name in PARAMS:
            if name in self.random:
                col = x[:, self.random.index(name)]
                out[name] = nominal[name] * (1.0 + self.cov.get(name, 0.0) * col)
            else:
                out[name] = np.full(x.shape[0], nominal[name])
        M, C, K = out["M"], out["C"], out["K"]
        if np.any(M <= 0):
            raise DataError("realized mass is not positive")
        if np.any(K <= 0):
            raise DataError("realized stiffness is not positive (COV too large for the input range)")
        return M, C, K


def dynamic_stiffness(sys: TwoDofSystem, omega, x) -> np.ndarray:
    """``-w^2 M + i w C + K`` with shape ``(len(omega), len(x), 2, 2)``."""
    M, C, K = sys.parameters(x)
    w = np.atleast_1d(np.asarray(omega, dtype=float))[:, None]
    d11 = -w**2 * M + 1j * w * (2 * C) + 2 * K
    d12 = -1j * w * C - K
    d22 = -w**2 * M + 1j * w * C + K
    D = np.empty(d11.shape + (2, 2), dtype=complex)
    D[..., 0, 0] = d11
    D[..., 0, 1] = D[..., 1, 0] = d12
    D[..., 1, 1] = d22
    return D


def frf(sys: TwoDofSystem, omega, x) -> tuple[np.ndarray, np.ndarray]:
    """Complex amplitudes ``(Z1, Z2)``, each shaped ``(len(omega), len(x))``."""
    D = dynamic_stiffness(sys, omega, x)
    d11, d12, d22 = D[..., 0, 0], D[..., 0, 1], D[..., 1, 1]
    det = d11 * d22 - d12 * d12
    if np.any(det == 0):
        raise ZeroDivisionError("singular dynamic stiffness (undamped resonance)")
    F1, F2 = sys.force
    Z1 = (d22 * F1 - d12 * F2) / det
    Z2 = (d11 * F2 - d12 * F1) / det
    return Z1, Z2


def response(sys: TwoDofSystem, omega: float, x) -> np.ndarray:
    """``|Z1|`` at a single angular frequency for each realization."""
    return np.abs(frf(sys, [omega], x)[0][0])


def natural_frequencies(sys: TwoDofSystem, x) -> np.ndarray:
    """Undamped natural frequencies in Hz, ascending, shape ``(len(x), 2)``.

    Roots of ``det(K - w^2 M) = 0`` for the chain with equal masses and
    equal springs: ``w^2 = (K/M)(3 -+ sqrt 5)/2``.
    """
    M, _, K = sys.parameters(x)
    root5 = np.sqrt(5.0)
    w2 = (K / M)[:, None] * np.array([(3.0 - root5) / 2.0, (3.0 + root5) / 2.0])[None, :]
    return np.sqrt(w2) / (2.0 * np.pi)


def case_system(case: str, cov: float | None = None, literal: bool = False) -> TwoDofSystem:
    """Case 1: random stiffness only. Case 2: random mass, damping and stiffness.

    ``literal=True`` reproduces the Case 1 stiffness ``K0 (1 + X)``, which is
    negative for a third of the input range and is therefore rejected when
    evaluated there.
    """
    if case == "case1":
        d = 1.0 if literal else (0.05 if cov is None else cov)
        return TwoDofSystem(cov={"M": 0.0, "C": 0.0, "K": d}, random=("K",))
    if case == "case2":
        d = 0.05 if cov is None else cov
        return TwoDofSystem(cov={"M": d, "C": d, "K": d}, random=("M", "C", "K"))
    raise ValueError(f"unknown case {case!r}, expected 'case1' or 'case2'")


def case_input_spec(case: str) -> InputSpec:
    if case == "case1":
        return InputSpec([Marginal.uniform(-3.0, 3.0)])
    if case == "case2":
        return InputSpec([Marginal.truncated_gaussian(0.0, 1.0, -3.0, 3.0)] * 3)
    raise ValueError(f"unknown case {case!r}, expected 'case1' or 'case2'")


def hz_to_rad(f):
    return 2.0 * np.pi * np.asarray(f, dtype=float)


def default_frequency_grid() -> np.ndarray:
    """10 to 35 Hz in 0.1 Hz steps."""
    return np.round(np.arange(100, 351) * 0.1, 10)


def generate_dataset(case: str, omega: float, L: int, seed: int = 0, scheme: str = "lhs",
                     cov: float | None = None, literal: bool = False) -> Dataset:
    """Sample the case's inputs and record ``|Z1(omega)|`` for each row."""
    sys = case_system(case, cov, literal)
    x = sample(case_input_spec(case), L, scheme, seed)
    return Dataset(x, response(sys, omega, x), source=f"{case}:{scheme}:seed={seed}")


@dataclass(frozen=True)
class McsReference:
    freqs_hz: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    std_se: np.ndarray
    L: int
    seed: int


def mcs_reference(case: str, freqs_hz, L: int = 100_000, seed: int = 0, cov: float | None = None,
                  literal: bool = False, chunk: int = 20) -> McsReference:
    """Crude Monte Carlo mean and standard deviation of ``|Z1|`` per frequency.

    ``std_se`` is the delta-method standard error of each standard deviation.
    """
    if L < 1000:
        raise ValueError("reference runs need at least 1000 samples")
    sys = case_system(case, cov, literal)
    x = sample(case_input_spec(case), L, "mcs", seed)
    f = np.atleast_1d(np.asarray(freqs_hz, dtype=float))
    mean = np.empty(f.size)
    std = np.empty(f.size)
    se = np.empty(f.size)
    for s in range(0, f.size, chunk):
        z = np.abs(frf(sys, hz_to_rad(f[s:s + chunk]), x)[0])
        mu = z.mean(axis=1)
        dev2 = (z - mu[:, None]) ** 2
        var = dev2.sum(axis=1) / (L - 1)
        mean[s:s + chunk] = mu
        std[s:s + chunk] = np.sqrt(var)
        with np.errstate(divide="ignore", invalid="ignore"):
            se[s:s + chunk] = np.where(var > 0, np.std(dev2, axis=1) / np.sqrt(L) / (2 * np.sqrt(var)), 0.0)
    return McsReference(f, mean, std, se, L, seed)


def mcs_failure_probability(case: str, freq_hz: float, threshold: float, L: int = 1_000_000, seed: int = 0,
                            sense: str = "exceed", cov: float | None = None, literal: bool = False,
                            chunk: int = 200_000) -> tuple[float, float]:
    """Crude Monte Carlo ``P[|Z1| > threshold]`` (or ``<`` for ``fall-below``) and its standard error."""
    sys = case_system(case, cov, literal)
    x = sample(case_input_spec(case), L, "mcs", seed)
    hits = 0
    for s in range(0, L, chunk):
        y = response(sys, hz_to_rad(freq_hz), x[s:s + chunk])
        hits += int(np.count_nonzero(y > threshold if sense == "exceed" else y < threshold))
    pf = hits / L
    return pf, float(np.sqrt(pf * (1 - pf) / L))
