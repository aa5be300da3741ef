"""Regression error measures and size-weighted per-cluster error reports."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Row order of the per-cluster error tables; NMSE is appended after them.
METRICS = ("MSE", "MAE", "LMLS", "MAPE", "MASE", "SMAPE", "NMSE")
SMAPE_FLOOR = 1e-9


def regression_errors(y, y_hat, mase_scale=None):
    """All seven measures for one group of samples.

    Returns ``(values, skipped)``. MAPE is a fraction (1.0 == 100 %). Rows
    that make MAPE or SMAPE undefined are skipped and counted; NMSE is NaN
    when mean(y) * mean(y_hat) <= 0. MASE divides MAE by ``mase_scale`` (the
    in-sample mean absolute deviation of the training targets).
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    y_hat = np.asarray(y_hat, dtype=np.float64).ravel()
    if y.shape != y_hat.shape:
        raise ValueError("observed and predicted lengths differ")
    m = y.shape[0]
    nan = math.nan
    skipped = {"MAPE": 0, "SMAPE": 0, "NMSE": 0}
    if m == 0:
        return {k: nan for k in METRICS}, skipped
    e = y - y_hat
    ae = np.abs(e)
    vals = {
        "MSE": float(np.mean(e * e)),
        "MAE": float(np.mean(ae)),
        "LMLS": float(np.mean(np.log1p(0.5 * e * e))),
    }

    ok = y != 0
    skipped["MAPE"] = int(m - ok.sum())
    vals["MAPE"] = float(np.mean(ae[ok] / np.abs(y[ok]))) if ok.any() else nan

    denom = y + y_hat
    ok = denom > SMAPE_FLOOR
    skipped["SMAPE"] = int(m - ok.sum())
    vals["SMAPE"] = float(2.0 * np.mean(ae[ok] / denom[ok])) if ok.any() else nan

    scale = float(np.mean(y_hat)) * float(np.mean(y))
    if scale > 0:
        vals["NMSE"] = float(np.mean(e * e) / scale)
    else:
        vals["NMSE"] = nan
        skipped["NMSE"] = m

    if mase_scale is not None and mase_scale > 0:
        vals["MASE"] = vals["MAE"] / mase_scale
    else:
        vals["MASE"] = nan
    return {k: vals[k] for k in METRICS}, skipped


def weighted_average(per_cluster, sizes):
    """Size-weighted mean over clusters that received at least one sample."""
    P = np.asarray(per_cluster, dtype=np.float64)
    w = np.asarray(sizes, dtype=np.float64)
    keep = w > 0
    if not keep.any():
        return np.full(P.shape[1], math.nan)
    return (w[keep, None] * P[keep]).sum(axis=0) / w[keep].sum()


@dataclass(frozen=True)
class ErrorReport:
    per_cluster: np.ndarray      # K x len(METRICS)
    weighted_average: np.ndarray
    cluster_sizes: np.ndarray
    skipped: tuple               # one dict per cluster
    metrics: tuple = METRICS

    @property
    def k(self):
        return self.per_cluster.shape[0]

    def value(self, metric, cluster=None):
        j = self.metrics.index(metric)
        if cluster is None:
            return float(self.weighted_average[j])
        return float(self.per_cluster[cluster, j])


def build_report(y, y_hat, clusters, k, mase_scales=None) -> ErrorReport:
    """Group samples by cluster id and compute every measure per group."""
    y = np.asarray(y, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    clusters = np.asarray(clusters, dtype=np.int64)
    rows, skipped, sizes = [], [], []
    for j in range(k):
        sel = clusters == j
        scale = None if mase_scales is None else mase_scales[j]
        vals, skip = regression_errors(y[sel], y_hat[sel], scale)
        rows.append([vals[m] for m in METRICS])
        skipped.append(skip)
        sizes.append(int(sel.sum()))
    per = np.array(rows, dtype=np.float64).reshape(k, len(METRICS))
    sizes = np.array(sizes, dtype=np.int64)
    return ErrorReport(per, weighted_average(per, sizes), sizes, tuple(skipped))
