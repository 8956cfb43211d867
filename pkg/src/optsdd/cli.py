"""Command-line front end.

Subcommands share one INI configuration (see :mod:`optsdd.config`); flags
override selected keys. Exit codes: 0 success, 2 configuration error,
3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import platform
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .basis import basis_count
from .bspline import KnotVector
from .config import KNOT_MODES, RunConfig, load_config
from .dataset import Dataset, ingest, write_csv
from .distributions import InputSpec
from .dynamics import (
    case_input_spec,
    default_frequency_grid,
    generate_dataset,
    hz_to_rad,
    mcs_failure_probability,
    mcs_reference,
)
from .errors import ConfigError, DataError, NumericalError
from .experiments import sigma_curve, training_inputs
from .surrogate import SddModel, build_knots, fit_sdd, mean_abs_error, metrics

log = logging.getLogger("optsdd")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


def _spec(cfg: RunConfig) -> InputSpec:
    if cfg.data.benchmark is not None:
        return case_input_spec(cfg.data.benchmark)
    if cfg.spec is None:
        raise ConfigError("no [input.xK] sections and no benchmark case")
    return cfg.spec


def _default_L(cfg: RunConfig, spec: InputSpec) -> int:
    """Five samples per basis function unless L is given."""
    if cfg.data.L is not None:
        return cfg.data.L
    N = spec.N
    p = cfg.model.p * N if len(cfg.model.p) == 1 else cfg.model.p
    I = cfg.model.I * N if len(cfg.model.I) == 1 else cfg.model.I
    return 5 * basis_count(N, cfg.model.S, [pi + ii for pi, ii in zip(p, I)])


def load_dataset(cfg: RunConfig) -> Dataset:
    spec = _spec(cfg)
    d = cfg.data
    if d.dataset is not None:
        return ingest(d.dataset, spec)
    if d.benchmark is not None:
        return generate_dataset(d.benchmark, float(hz_to_rad(d.frequency_hz)), _default_L(cfg, spec),
                                d.seed, d.scheme, d.cov, d.literal)
    raise ConfigError("[data] needs a dataset path or a benchmark case")


def _coord(values: list[int], N: int, name: str) -> list[int]:
    if len(values) == 1:
        return values * N
    if len(values) != N:
        raise ConfigError(f"[model] {name} needs 1 or {N} values, got {len(values)}")
    return values


def _explicit_knots(cfg: RunConfig):
    if cfg.model.knot_mode != "explicit":
        return None
    return [KnotVector.from_text(Path(p).read_text()) for p in cfg.model.knot_files]


def fit_model(cfg: RunConfig, ds: Dataset) -> SddModel:
    spec = _spec(cfg)
    p = _coord(cfg.model.p, spec.N, "p")
    I = _coord(cfg.model.I, spec.N, "I")
    model = fit_sdd(ds, spec, cfg.model.S, p, I, cfg.model.knot_mode, cfg.fit, cfg.model.knot_seed,
                    _explicit_knots(cfg))
    model.meta["config_sha256"] = cfg.digest
    return model


def write_manifest(cfg: RunConfig, out: Path, command: str, extra: dict | None = None) -> None:
    lines = {
        "command": command,
        "config_sha256": cfg.digest,
        "optsdd": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
        "data_seed": cfg.data.seed,
        "fit_seed": cfg.fit.seed,
        "knot_seed": cfg.model.knot_seed,
        "resample_seed": cfg.task.resample_seed,
        "reference_seed": cfg.task.reference_seed,
    }
    lines.update(extra or {})
    (out / "config.ini").write_text(cfg.source_text)
    with open(out / "manifest.txt", "w") as fh:
        for k, v in lines.items():
            fh.write(f"{k} = {v}\n")


def _load_or_fit(cfg: RunConfig) -> SddModel:
    if cfg.task.model is not None:
        return SddModel.load(cfg.task.model)
    return fit_model(cfg, load_dataset(cfg))


def _write_two_column(path: Path, header: tuple[str, str], a, b) -> None:
    with open(path, "w") as fh:
        fh.write(f"{header[0]},{header[1]}\n")
        for u, v in zip(a, b):
            fh.write(f"{float(u)!r},{float(v)!r}\n")


# subcommands ---------------------------------------------------------------

def cmd_fit(cfg: RunConfig, out: Path) -> dict:
    ds = load_dataset(cfg)
    model = fit_model(cfg, ds)
    model.save(out / "model.json")
    (out / "coefficients.txt").write_text(model.coefficient_table())
    write_csv(ds, out / "train.csv")
    result = {"basis_functions": len(model.coef), "training_size": ds.L,
              "mean": model.mean(), "variance": model.variance()}
    if cfg.data.holdout is not None:
        result.update(metrics(model, ingest(cfg.data.holdout, model.spec)))
    _write_metrics(out / "metrics.txt", result)
    return result


def cmd_knots(cfg: RunConfig, out: Path) -> dict:
    spec = _spec(cfg)
    ds = load_dataset(cfg) if cfg.model.knot_mode == "optimal" else None
    p = _coord(cfg.model.p, spec.N, "p")
    I = _coord(cfg.model.I, spec.N, "I")
    knots = build_knots(ds, spec, p, I, cfg.model.knot_mode, cfg.model.knot_seed, _explicit_knots(cfg))
    result = {}
    for k, kv in enumerate(knots):
        (out / f"knots_x{k + 1}.txt").write_text(kv.to_text())
        result[f"x{k + 1}"] = " ".join(repr(v) for v in kv.knots)
    return result


def cmd_stats(cfg: RunConfig, out: Path) -> dict:
    model = _load_or_fit(cfg)
    y, pos = model.resample_cdf(cfg.task.resamples, cfg.task.resample_seed)
    _write_two_column(out / "cdf.csv", ("y", "cdf"), y, pos)
    result = {"mean": model.mean(), "variance": model.variance(), "std": float(np.sqrt(model.variance())),
              "resampled_mean": float(y.mean()), "resampled_variance": float(y.var(ddof=1)),
              "resamples": cfg.task.resamples}
    _write_metrics(out / "stats.txt", result)
    return result


def cmd_pfail(cfg: RunConfig, out: Path) -> dict:
    model = _load_or_fit(cfg)
    pf, se = model.pfail(cfg.task.threshold, cfg.task.sense, cfg.task.resamples, cfg.task.resample_seed)
    result = {"threshold": cfg.task.threshold, "threshold_units": "same units as the model output",
              "sense": cfg.task.sense, "pfail": pf, "pfail_se": se, "resamples": cfg.task.resamples}
    if cfg.data.benchmark is not None and cfg.task.model is None:
        ref, ref_se = mcs_failure_probability(cfg.data.benchmark, cfg.data.frequency_hz, cfg.task.threshold,
                                              cfg.task.resamples, cfg.task.reference_seed, cfg.task.sense,
                                              cfg.data.cov, cfg.data.literal)
        result.update({"threshold_units": "m (|Z1| displacement amplitude)", "mcs_pfail": ref, "mcs_pfail_se": ref_se})
    _write_metrics(out / "pfail.txt", result)
    return result


def cmd_frf_sweep(cfg: RunConfig, out: Path) -> dict:
    case = cfg.data.benchmark
    if case is None:
        raise ConfigError("frf-sweep needs [data] benchmark = case1 or case2")
    freqs = cfg.task.frequencies if cfg.task.frequencies is not None else default_frequency_grid()
    spec = case_input_spec(case)
    x = training_inputs(case, _default_L(cfg, spec), cfg.data.seed, cfg.data.scheme)
    ref = mcs_reference(case, freqs, cfg.task.reference_samples, cfg.task.reference_seed, cfg.data.cov, cfg.data.literal)
    _write_two_column(out / "sigma_mcs.csv", ("freq_hz", "std"), ref.freqs_hz, ref.std)
    p = _coord(cfg.model.p, spec.N, "p")
    I = _coord(cfg.model.I, spec.N, "I")
    curve = sigma_curve(case, freqs, x, cfg.model.S, p, I, cfg.model.knot_mode, cfg.fit,
                        cfg.model.knot_seed, cfg.data.cov, cfg.data.literal)
    _write_two_column(out / f"sigma_{cfg.model.knot_mode}.csv", ("freq_hz", "std"), curve.freqs_hz, curve.std)
    result = {"knot_mode": cfg.model.knot_mode, "training_size": x.shape[0], "frequencies": freqs.size,
              "mean_abs_error": mean_abs_error(curve.std, ref.std), "reference_samples": ref.L}
    _write_metrics(out / "sweep.txt", result)
    return result


def cmd_ingest(cfg: RunConfig, out: Path) -> dict:
    if cfg.data.dataset is None:
        raise ConfigError("ingest needs [data] dataset = <path>")
    ds = ingest(cfg.data.dataset, _spec(cfg))
    write_csv(ds, out / "dataset.csv")
    return {"rows": ds.L, "inputs": ds.N, "y_mean": float(ds.outputs.mean()),
            "y_var": float(ds.outputs.var(ddof=1)) if ds.L > 1 else 0.0}


def cmd_report(cfg: RunConfig, out: Path) -> dict:
    model = _load_or_fit(cfg)
    result = {"basis_functions": len(model.coef), "mean": model.mean(), "variance": model.variance()}
    result.update({f"meta_{k}": v for k, v in model.meta.items()})
    if cfg.data.holdout is not None:
        result.update(metrics(model, ingest(cfg.data.holdout, model.spec)))
    _write_metrics(out / "report.txt", result)
    return result


COMMANDS = {
    "fit": cmd_fit,
    "knots": cmd_knots,
    "stats": cmd_stats,
    "pfail": cmd_pfail,
    "frf-sweep": cmd_frf_sweep,
    "ingest": cmd_ingest,
    "report": cmd_report,
}


def _write_metrics(path: Path, result: dict) -> None:
    with open(path, "w") as fh:
        for k, v in result.items():
            fh.write(f"{k} = {float(v)!r}\n" if isinstance(v, float) else f"{k} = {v}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="optsdd", description="Spline dimensional decomposition surrogates.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="INI run configuration")
        sp.add_argument("--seed", type=int, help="override the data, fit and knot seeds")
        sp.add_argument("--out-dir", help="output directory (default from config)")
        sp.add_argument("--knot-mode", choices=KNOT_MODES)
        sp.add_argument("--threshold", type=float)
        sp.add_argument("--resamples", type=int)
        sp.add_argument("--model", help="use a saved model instead of fitting")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def apply_overrides(cfg: RunConfig, args) -> None:
    if args.seed is not None:
        cfg.data.seed = args.seed
        cfg.model.knot_seed = args.seed
        cfg.fit = replace(cfg.fit, seed=args.seed)
        cfg.source_text += f"\n; --seed {args.seed}\n"
    if args.knot_mode is not None:
        cfg.model.knot_mode = args.knot_mode
        cfg.source_text += f"\n; --knot-mode {args.knot_mode}\n"
    if args.threshold is not None:
        cfg.task.threshold = args.threshold
        cfg.source_text += f"\n; --threshold {args.threshold!r}\n"
    if args.resamples is not None:
        cfg.task.resamples = args.resamples
        cfg.source_text += f"\n; --resamples {args.resamples}\n"
    if args.model is not None:
        cfg.task.model = Path(args.model)
        if not cfg.task.model.is_file():
            raise ConfigError(f"model file not found: {args.model}")
    if args.out_dir is not None:
        cfg.task.out_dir = Path(args.out_dir)


def run(cfg: RunConfig, command: str) -> dict:
    """Execute one subcommand and write its artifacts under ``cfg.task.out_dir``."""
    out = Path(cfg.task.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = COMMANDS[command](cfg, out)
    write_manifest(cfg, out, command)
    return result


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    stage = "config"
    try:
        cfg = load_config(args.config)
        apply_overrides(cfg, args)
        stage = args.command
        result = run(cfg, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error ({stage}): {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, np.linalg.LinAlgError, ZeroDivisionError) as exc:
        print(f"numerical failure ({stage}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error ({stage}): {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"# seeds: data={cfg.data.seed} fit={cfg.fit.seed} knots={cfg.model.knot_seed} "
          f"resample={cfg.task.resample_seed} reference={cfg.task.reference_seed}")
    for k, v in result.items():
        print(f"{k} = {float(v)!r}" if isinstance(v, float) else f"{k} = {v}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
