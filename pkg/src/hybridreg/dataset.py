"""Tabular sensor data: CSV ingestion, MinMax scaling, splitting, synthesis."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, SchemaError

log = logging.getLogger(__name__)

FEATURES = ("s1_temp", "s2_temp", "flow_rate", "solar_radiation")
TARGET = "s4_temp"
COLUMNS = FEATURES + (TARGET,)


def _frozen(a, ndim):
    a = np.array(a, dtype=np.float64, ndmin=ndim)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (N x 4) plus target vector, immutable after construction."""

    features: np.ndarray
    target: np.ndarray
    column_names: tuple = COLUMNS

    def __post_init__(self):
        X = _frozen(self.features, 2)
        y = _frozen(self.target, 1).ravel()
        y.setflags(write=False)
        if X.shape[0] < 1:
            raise DataError("dataset is empty")
        if X.shape[0] != y.shape[0]:
            raise DataError(f"{X.shape[0]} feature rows but {y.shape[0]} targets")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise DataError("dataset contains NaN or infinite values")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "target", y)
        object.__setattr__(self, "column_names", tuple(self.column_names))

    def __len__(self):
        return self.features.shape[0]

    def subset(self, index) -> "Dataset":
        return Dataset(self.features[index], self.target[index], self.column_names)

    def to_csv(self, path):
        write_csv(path, self.column_names, np.column_stack([self.features, self.target]))


def write_csv(path, header: Sequence[str], rows: np.ndarray):
    """Write rows with shortest round-trip float formatting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in np.asarray(rows, dtype=np.float64):
            w.writerow([repr(float(v)) for v in row])


def _read_matrix(path, columns: Sequence[str], on_invalid: str):
    if on_invalid not in ("error", "drop"):
        raise ValueError(f"on_invalid must be 'error' or 'drop', got {on_invalid!r}")
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: missing header row")
        header = [h.strip() for h in header]
        missing = [c for c in columns if c not in header]
        if missing:
            raise SchemaError(missing)
        idx = [header.index(c) for c in columns]
        rows = []
        dropped = 0
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not v.strip() for v in rec):
                continue
            vals = []
            bad = None
            for c, j in zip(columns, idx):
                try:
                    v = float(rec[j])
                except (IndexError, ValueError):
                    bad = c
                    break
                if not math.isfinite(v):
                    bad = c
                    break
                vals.append(v)
            if bad is not None:
                if on_invalid == "error":
                    raise DataError(f"{path}: row {lineno}, column {bad!r}: invalid value")
                dropped += 1
                continue
            rows.append(vals)
    if dropped:
        log.warning("%s: dropped %d invalid row(s)", path, dropped)
    M = np.array(rows, dtype=np.float64).reshape(len(rows), len(columns))
    return M, dropped


def ingest_csv(path, schema: Sequence[str] = COLUMNS, on_invalid: str = "error") -> Dataset:
    """Load a CSV whose header contains ``schema`` (any order, extra columns ignored).

    The last schema column is the target. ``on_invalid='drop'`` skips rows
    with unparseable or non-finite values instead of raising.
    """
    M, _ = _read_matrix(path, schema, on_invalid)
    if M.shape[0] == 0:
        raise DataError(f"{path}: no data rows")
    return Dataset(M[:, :-1], M[:, -1], tuple(schema))


def read_features(path, schema: Sequence[str] = FEATURES, on_invalid: str = "error") -> np.ndarray:
    """Feature-only CSV loader for prediction input; may return zero rows."""
    M, _ = _read_matrix(path, schema, on_invalid)
    return M


@dataclass(frozen=True)
class ScalerParams:
    """Per-column MinMax state. Zero-range columns map to 0.0."""

    mins: np.ndarray
    maxs: np.ndarray
    degenerate: np.ndarray = field(default=None)

    def __post_init__(self):
        mins = _frozen(self.mins, 1)
        maxs = _frozen(self.maxs, 1)
        if mins.shape != maxs.shape:
            raise ValueError("mins and maxs differ in length")
        if np.any(mins > maxs):
            raise ValueError("mins must not exceed maxs")
        deg = np.array(maxs == mins)
        deg.setflags(write=False)
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)
        object.__setattr__(self, "degenerate", deg)

    @property
    def n_columns(self):
        return self.mins.shape[0]

    def _check(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.n_columns:
            raise DataError(f"expected {self.n_columns} column(s), got {X.shape[-1]}")
        return X

    def transform(self, X) -> np.ndarray:
        X = self._check(X)
        span = np.where(self.degenerate, 1.0, self.maxs - self.mins)
        out = (X - self.mins) / span
        return np.where(self.degenerate, 0.0, out)

    def inverse_transform(self, Z) -> np.ndarray:
        Z = self._check(Z)
        span = np.where(self.degenerate, 0.0, self.maxs - self.mins)
        return Z * span + self.mins


def fit_minmax(X) -> ScalerParams:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] < 1:
        raise DataError("cannot fit a scaler on zero rows")
    return ScalerParams(X.min(axis=0), X.max(axis=0))


def fit_scaler(train: Dataset) -> ScalerParams:
    """Exact column extrema of the training features."""
    return fit_minmax(train.features)


def apply_scaler(params: ScalerParams, data: Dataset) -> Dataset:
    """Scale the features of ``data``; the target is left untouched. No clamping."""
    return Dataset(params.transform(data.features), data.target, data.column_names)


@dataclass(frozen=True)
class SplitSpec:
    validation_fraction: float = 0.2
    seed: int = 42

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError(
                f"validation_fraction must lie in (0, 1), got {self.validation_fraction}"
            )
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


def split_indices(n: int, spec: SplitSpec):
    n_val = int(round(spec.validation_fraction * n))
    if n_val < 1 or n_val > n - 1:
        raise ValueError(
            f"validation fraction {spec.validation_fraction} leaves an empty partition for N={n}"
        )
    perm = np.random.default_rng(spec.seed).permutation(n)
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def split(data: Dataset, spec: SplitSpec):
    """Seeded shuffle then cut; both partitions keep file order internally."""
    tr, va = split_indices(len(data), spec)
    return data.subset(tr), data.subset(va)


# Regime layout of the synthetic generator: centre and spread of
# (s1_temp, s2_temp, flow_rate, solar_radiation) per operating regime.
_REGIME_CENTRES = np.array([
    [12.0, 13.0, 40.0, 20.0],      # overnight, pump almost idle
    [28.0, 30.0, 420.0, 380.0],    # morning ramp-up
    [45.0, 48.0, 820.0, 850.0],    # midday, full flow
    [62.0, 66.0, 180.0, 980.0],    # high irradiance, throttled flow
])
_REGIME_SPREAD = np.array([
    [1.0, 1.0, 8.0, 8.0],
    [1.5, 1.5, 25.0, 30.0],
    [1.5, 1.5, 30.0, 35.0],
    [1.5, 1.5, 15.0, 30.0],
])
_REGIME_WEIGHTS = np.array([0.3, 0.25, 0.25, 0.2])


def _regime_response(r, X, Z):
    """Outlet temperature for regime ``r``; Z holds within-regime z-scores."""
    s2, flow, rad = X[:, 1], X[:, 2], X[:, 3]
    heat = rad / (flow / 60.0 + 1.0)
    if r == 0:
        return s2 - 0.8 + 0.04 * heat + 1.6 * np.sin(1.3 * Z[:, 0] + 0.7 * Z[:, 3])
    if r == 1:
        return s2 + 0.02 * heat + 2.0 * np.tanh(Z[:, 2]) * Z[:, 3] - 0.6 * Z[:, 0] ** 2
    if r == 2:
        return s2 + 0.05 * heat + 1.8 * np.cos(1.1 * Z[:, 1] - 0.9 * Z[:, 2])
    return s2 + 0.01 * heat + 2.2 * np.sin(0.9 * Z[:, 3]) * np.cos(0.8 * Z[:, 0]) + 0.8 * Z[:, 2]


def synthesize(n: int, seed: int = 42, noise: float = 0.2):
    """Piecewise-regime solar-collector-like data.

    Four regimes differ in flow and radiation level; within each regime the
    outlet temperature is its own smooth nonlinear function of the inputs.
    Returns ``(Dataset, regime_labels)``.
    """
    if n < 10:
        raise ValueError(f"synthesize needs n >= 10, got {n}")
    rng = np.random.default_rng(seed)
    regimes = rng.choice(len(_REGIME_WEIGHTS), size=n, p=_REGIME_WEIGHTS)
    Z = rng.standard_normal((n, 4))
    X = _REGIME_CENTRES[regimes] + _REGIME_SPREAD[regimes] * Z
    X[:, 2] = np.maximum(X[:, 2], 0.0)
    X[:, 3] = np.maximum(X[:, 3], 0.0)
    y = np.empty(n)
    for r in range(len(_REGIME_WEIGHTS)):
        m = regimes == r
        y[m] = _regime_response(r, X[m], Z[m])
    y += noise * rng.standard_normal(n)
    return Dataset(X, y), regimes.astype(np.int64)
