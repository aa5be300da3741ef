"""Hybrid regressor: a clustering stage routing each input to its own local MLP."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import clustering as cl
from . import mlp
from .dataset import Dataset, ScalerParams, fit_minmax, fit_scaler
from .errors import ClusterTooSmallError, DataError, HybridRegError
from .metrics import METRICS, ErrorReport, build_report

log = logging.getLogger(__name__)

MODES = ("local_models", "label_feature")


@dataclass(frozen=True)
class HybridModel:
    """Scalers, a fitted clustering and one MLP per cluster.

    In ``label_feature`` mode ``locals`` holds a single network that takes
    the scaled cluster id as an extra input.
    """

    scaler: ScalerParams
    cluster_model: cl.ClusterModel
    locals: tuple
    target_scaler: ScalerParams
    mode: str = "local_models"
    mase_scales: tuple = ()
    train_sizes: tuple = ()
    grid_results: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        expected = self.cluster_model.k if self.mode == "local_models" else 1
        if len(self.locals) != expected:
            raise ValueError(f"{self.mode} needs {expected} local model(s), got {len(self.locals)}")

    @property
    def k(self):
        return self.cluster_model.k


def _label_column(labels, k):
    return np.asarray(labels, dtype=np.float64) / (k - 1) if k > 1 else np.zeros(len(labels))


def train_hybrid(train: Dataset, kind: str, k: int, grid: mlp.GridSpec, seed: int = 42,
                 mode: str = "local_models", cluster_options: Optional[dict] = None
                 ) -> HybridModel:
    """Scale, cluster, then grid-search and fit one MLP per cluster.

    Raises ``ClusterTooSmallError`` naming the first cluster with fewer
    samples than ``grid.folds``.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    scaler = fit_scaler(train)
    Xs = scaler.transform(train.features)
    t_scaler = fit_minmax(train.target)
    ys = t_scaler.transform(train.target[:, None]).ravel()

    cmodel, asg = cl.fit(kind, Xs, k, seed=seed, **(cluster_options or {}))
    for j, size in enumerate(asg.sizes):
        if size < grid.folds:
            raise ClusterTooSmallError(j, int(size), grid.folds)

    mase = []
    for j in range(k):
        yj = train.target[asg.labels == j]
        mase.append(float(np.mean(np.abs(yj - yj.mean()))))

    locals_, results = [], []
    if mode == "local_models":
        for j in range(k):
            sel = asg.labels == j
            res = mlp.grid_search(Xs[sel], ys[sel], grid)
            model, _ = mlp.train(Xs[sel], ys[sel], res.neurons, res.activation, res.solver,
                                 seed=grid.seed, max_iter=grid.max_iter,
                                 provenance_cv=res.cv_mse)
            log.info("cluster %d: n=%d, %d neurons, %s, %s, cv mse %.3g", j, sel.sum(),
                     res.neurons, res.activation, res.solver, res.cv_mse)
            locals_.append(model)
            results.append(res)
    else:
        Xa = np.column_stack([Xs, _label_column(asg.labels, k)])
        res = mlp.grid_search(Xa, ys, grid)
        model, _ = mlp.train(Xa, ys, res.neurons, res.activation, res.solver,
                             seed=grid.seed, max_iter=grid.max_iter, provenance_cv=res.cv_mse)
        locals_.append(model)
        results.append(res)
    return HybridModel(scaler, cmodel, tuple(locals_), t_scaler, mode, tuple(mase),
                       tuple(int(s) for s in asg.sizes), tuple(results))


def predict_detailed(model: HybridModel, X):
    """Predictions in physical units plus the routed cluster id of every row."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.scaler.n_columns:
        raise DataError(f"expected rows of {model.scaler.n_columns} features")
    n = X.shape[0]
    if n == 0:
        return np.empty(0), np.empty(0, dtype=np.int64)
    Xs = model.scaler.transform(X)
    clusters = cl.route_many(model.cluster_model, Xs)
    out = np.empty(n)
    if model.mode == "local_models":
        for j in range(model.k):
            sel = clusters == j
            if sel.any():
                out[sel] = model.locals[j].predict(Xs[sel])
    else:
        Xa = np.column_stack([Xs, _label_column(clusters, model.k)])
        out = model.locals[0].predict(Xa)
    return model.target_scaler.inverse_transform(out[:, None]).ravel(), clusters


def predict(model: HybridModel, x):
    """Predicted outlet temperature for one raw row (float) or a matrix (array)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return float(predict_detailed(model, x[None, :])[0][0])
    return predict_detailed(model, x)[0]


def error_report(model: HybridModel, validation: Dataset) -> ErrorReport:
    """Per-cluster and size-weighted errors on ``validation`` in physical units."""
    y_hat, clusters = predict_detailed(model, validation.features)
    return build_report(validation.target, y_hat, clusters, model.k, model.mase_scales)


@dataclass(frozen=True)
class MethodResult:
    kind: str
    k: int
    model: Optional[HybridModel]
    report: Optional[ErrorReport]
    error: Optional[str] = None


@dataclass(frozen=True)
class Comparison:
    results: tuple
    reference: Optional[str]   # kind with the lowest weighted MSE
    deltas: tuple              # per result: metric -> % difference from the reference, or None


def compare_methods(train: Dataset, validation: Dataset, kinds: Sequence[str], k,
                    grid: mlp.GridSpec, seed: int = 42, mode: str = "local_models"
                    ) -> Comparison:
    """Train one hybrid per clustering kind on the same split and rank them.

    ``k`` is an int or a mapping kind -> k. A kind that fails is recorded
    with its error message and left out of the ranking.
    """
    results = []
    for kind in kinds:
        kk = k[kind] if isinstance(k, dict) else int(k)
        try:
            model = train_hybrid(train, kind, kk, grid, seed=seed, mode=mode)
            results.append(MethodResult(kind, kk, model, error_report(model, validation)))
        except (HybridRegError, ValueError) as exc:
            log.warning("%s failed: %s", kind, exc)
            results.append(MethodResult(kind, kk, None, None, str(exc)))
    ok = [i for i, r in enumerate(results)
          if r.report is not None and math.isfinite(r.report.value("MSE"))]
    ref = min(ok, key=lambda i: results[i].report.value("MSE")) if ok else None
    deltas = []
    for i, r in enumerate(results):
        if ref is None or i not in ok:
            deltas.append(None)
            continue
        base = results[ref].report.weighted_average
        with np.errstate(divide="ignore", invalid="ignore"):
            pct = 100.0 * (r.report.weighted_average - base) / base
        deltas.append({m: float(v) for m, v in zip(METRICS, pct)})
    return Comparison(tuple(results), results[ref].kind if ref is not None else None,
                      tuple(deltas))
