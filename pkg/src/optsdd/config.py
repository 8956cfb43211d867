"""Run configuration: an INI file with one section per concern.

Example::

    [input.x1]
    kind = uniform
    lower = -3
    upper = 3

    [model]
    S = 1
    p = 2
    I = 16
    knot_mode = optimal

    [fit]
    method = lasso-cv
    folds = 10
    seed = 0

    [data]
    benchmark = case1          ; or: dataset = train.csv
    frequency_hz = 31.465
    L = 90

    [task]
    threshold = 1e-4
    resamples = 1000000

Relative paths resolve against the directory holding the config file.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import InputSpec, Marginal
from .errors import ConfigError
from .regression import FitConfig

KNOT_MODES = ("uniform", "random", "optimal", "explicit")


@dataclass
class ModelConfig:
    S: int = 1
    p: list[int] = field(default_factory=lambda: [1])
    I: list[int] = field(default_factory=lambda: [8])
    knot_mode: str = "optimal"
    knot_files: list[Path] = field(default_factory=list)
    knot_seed: int = 0


@dataclass
class DataConfig:
    dataset: Path | None = None
    benchmark: str | None = None
    frequency_hz: float = 31.465
    L: int | None = None
    scheme: str = "lhs"
    seed: int = 0
    cov: float | None = None
    literal: bool = False
    holdout: Path | None = None


@dataclass
class TaskConfig:
    threshold: float = 1e-4
    sense: str = "exceed"
    resamples: int = 1_000_000
    resample_seed: int = 0
    frequencies: np.ndarray | None = None
    reference_samples: int = 100_000
    reference_seed: int = 1
    model: Path | None = None
    out_dir: Path = Path("out")


@dataclass
class RunConfig:
    spec: InputSpec | None
    model: ModelConfig
    fit: FitConfig
    data: DataConfig
    task: TaskConfig
    source_text: str = ""

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.source_text.encode()).hexdigest()


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.replace(",", " ").split()]


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def parse_frequencies(text: str) -> np.ndarray:
    """``start:stop:step`` (inclusive stop) or an explicit list, in Hz."""
    text = text.strip()
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        count = int(round((stop - start) / step)) + 1
        return np.round(start + step * np.arange(count), 10)
    return np.array(_floats(text))


def parse_marginal(sec: configparser.SectionProxy) -> Marginal:
    kind = sec.get("kind", "uniform").strip()
    lower, upper = sec.getfloat("lower"), sec.getfloat("upper")
    if lower is None or upper is None:
        raise ConfigError(f"[{sec.name}] needs lower and upper")
    if kind == "uniform":
        return Marginal.uniform(lower, upper)
    if kind == "truncated-gaussian":
        mean = sec.getfloat("mean", 0.0)
        if "std" in sec:
            std = sec.getfloat("std")
        elif "cov" in sec:
            std = sec.getfloat("cov") * abs(mean)
        else:
            raise ConfigError(f"[{sec.name}] truncated-gaussian needs std or cov")
        return Marginal.truncated_gaussian(mean, std, lower, upper)
    raise ConfigError(f"[{sec.name}] unknown kind {kind!r}")


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(), base=path.parent)


def parse_config(text: str, base: Path = Path(".")) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None

    def resolve(p: str | None) -> Path | None:
        if not p:
            return None
        q = Path(p.strip())
        return q if q.is_absolute() else base / q

    try:
        names = sorted((s for s in cp.sections() if s.startswith("input.")), key=lambda s: int(s.split(".x")[-1]))
    except ValueError:
        raise ConfigError("input sections must be named [input.x1], [input.x2], ...") from None
    spec = InputSpec([parse_marginal(cp[s]) for s in names]) if names else None

    m = cp["model"] if cp.has_section("model") else {}
    model = ModelConfig(
        S=int(m.get("S", 1)),
        p=_ints(m.get("p", "1")),
        I=_ints(m.get("I", "8")),
        knot_mode=m.get("knot_mode", "optimal").strip(),
        knot_files=[resolve(v) for v in m.get("knot_files", "").replace(",", " ").split()],
        knot_seed=int(m.get("knot_seed", 0)),
    )
    if model.knot_mode not in KNOT_MODES:
        raise ConfigError(f"[model] knot_mode must be one of {KNOT_MODES}, got {model.knot_mode!r}")

    f = cp["fit"] if cp.has_section("fit") else {}
    lambdas = f.get("lambdas")
    try:
        fit = FitConfig(
            method=f.get("method", "lasso-cv").strip(),
            n_folds=int(f.get("folds", 10)),
            n_lambdas=int(f.get("n_lambdas", 100)),
            lambda_ratio=float(f.get("lambda_ratio", 1e-4)),
            lambdas=tuple(_floats(lambdas)) if lambdas else None,
            seed=int(f.get("seed", 0)),
        )
    except ValueError as exc:
        raise ConfigError(f"[fit] {exc}") from None

    d = cp["data"] if cp.has_section("data") else {}
    data = DataConfig(
        dataset=resolve(d.get("dataset")),
        benchmark=(d.get("benchmark") or "").strip() or None,
        frequency_hz=float(d.get("frequency_hz", 31.465)),
        L=int(d["L"]) if "L" in d else None,
        scheme=d.get("scheme", "lhs").strip(),
        seed=int(d.get("seed", 0)),
        cov=float(d["cov"]) if "cov" in d else None,
        literal=str(d.get("literal", "false")).strip().lower() in ("1", "true", "yes"),
        holdout=resolve(d.get("holdout")),
    )

    t = cp["task"] if cp.has_section("task") else {}
    task = TaskConfig(
        threshold=float(t.get("threshold", 1e-4)),
        sense=t.get("sense", "exceed").strip(),
        resamples=int(float(t.get("resamples", 1_000_000))),
        resample_seed=int(t.get("resample_seed", 0)),
        frequencies=parse_frequencies(t["frequencies"]) if "frequencies" in t else None,
        reference_samples=int(float(t.get("reference_samples", 100_000))),
        reference_seed=int(t.get("reference_seed", 1)),
        model=resolve(t.get("model")),
        out_dir=resolve(t.get("out_dir", "out")),
    )
    cfg = RunConfig(spec, model, fit, data, task, text)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    d = cfg.data
    if d.dataset is not None and d.benchmark is not None:
        raise ConfigError("[data] set either dataset or benchmark, not both")
    if d.benchmark is not None and d.benchmark not in ("case1", "case2"):
        raise ConfigError(f"[data] benchmark must be case1 or case2, got {d.benchmark!r}")
    if d.dataset is not None:
        if not d.dataset.is_file():
            raise ConfigError(f"[data] dataset file not found: {d.dataset}")
        if cfg.spec is None:
            raise ConfigError("a dataset needs [input.xK] sections describing its inputs")
    if d.holdout is not None and not d.holdout.is_file():
        raise ConfigError(f"[data] holdout file not found: {d.holdout}")
    if cfg.task.model is not None and not cfg.task.model.is_file():
        raise ConfigError(f"[task] model file not found: {cfg.task.model}")
    if cfg.model.knot_mode == "explicit":
        N = cfg.spec.N if cfg.spec is not None else (1 if d.benchmark == "case1" else 3)
        if len(cfg.model.knot_files) != N:
            raise ConfigError(f"[model] knot_mode=explicit needs {N} knot_files, got {len(cfg.model.knot_files)}")
        for p in cfg.model.knot_files:
            if not p.is_file():
                raise ConfigError(f"[model] knot file not found: {p}")
    if cfg.task.sense not in ("exceed", "fall-below"):
        raise ConfigError("[task] sense must be exceed or fall-below")
    if d.scheme not in ("mcs", "lhs"):
        raise ConfigError("[data] scheme must be mcs or lhs")
