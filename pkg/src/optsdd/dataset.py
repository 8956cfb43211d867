"""Experimental designs: paired input rows and scalar outputs, plus CSV I/O."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distributions import InputSpec
from .errors import DataError


@dataclass(frozen=True)
class Dataset:
    inputs: np.ndarray
    outputs: np.ndarray
    source: str = field(default="", compare=False)

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        y = np.asarray(self.outputs, dtype=float).reshape(-1)
        if x.shape[0] != y.shape[0]:
            raise DataError(f"{x.shape[0]} input rows but {y.shape[0]} outputs")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
            raise DataError("dataset contains non-finite values")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "outputs", y)

    @property
    def L(self) -> int:
        return self.inputs.shape[0]

    @property
    def N(self) -> int:
        return self.inputs.shape[1]

    def check_support(self, spec: InputSpec) -> None:
        if spec.N != self.N:
            raise DataError(f"dataset has {self.N} inputs but the input spec defines {spec.N}")
        outside = np.flatnonzero(~spec.contains(self.inputs))
        if outside.size:
            rows = ", ".join(str(r + 1) for r in outside[:10])
            raise DataError(f"{outside.size} row(s) outside the support box (data rows {rows})")


def write_csv(ds: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{k + 1}" for k in range(ds.N)] + ["y"])
        for xrow, yv in zip(ds.inputs, ds.outputs):
            w.writerow([repr(float(v)) for v in xrow] + [repr(float(yv))])


def ingest(path, spec: InputSpec | None = None) -> Dataset:
    """Read a delimited table with header ``x1..xN,y``.

    Row numbers in error messages count data rows from 1 (the header is not
    counted). When ``spec`` is given, the input count and support box are
    validated against it.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        first = fh.readline()
        fh.seek(0)
        delim = "," if "," in first else ("\t" if "\t" in first else ";")
        rows = list(csv.reader(fh, delimiter=delim))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    N = len(header) - 1
    expected = [f"x{k + 1}" for k in range(N)] + ["y"]
    if N < 1 or header != expected:
        raise DataError(f"{path}: header must be {','.join(expected) if N >= 1 else 'x1,...,xN,y'}, got {','.join(header)}")
    data = []
    for i, row in enumerate(rows[1:], start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != N + 1:
            raise DataError(f"{path}: row {i} has {len(row)} fields, expected {N + 1}")
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise DataError(f"{path}: row {i} is not numeric: {row}") from None
        if not all(np.isfinite(vals)):
            raise DataError(f"{path}: row {i} contains non-finite values")
        data.append(vals)
    if not data:
        raise DataError(f"{path}: no data rows")
    arr = np.array(data)
    ds = Dataset(arr[:, :N], arr[:, N], source=f"file:{path}")
    if spec is not None:
        ds.check_support(spec)
    return ds
