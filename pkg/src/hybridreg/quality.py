"""Unsupervised clustering indices (Silhouette, Calinski-Harabasz, Davies-Bouldin)
and the scan over candidate cluster counts."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from . import clustering as cl
from .errors import HybridRegError, NumericError

log = logging.getLogger(__name__)


def _labels_of(assignment):
    if isinstance(assignment, cl.ClusterAssignment):
        return assignment.labels, assignment.k
    labels = np.asarray(assignment, dtype=np.int64)
    _, labels = np.unique(labels, return_inverse=True)
    return labels.astype(np.int64), int(labels.max()) + 1 if labels.size else 0


def _prepare(data, assignment):
    X = np.ascontiguousarray(data, dtype=np.float64)
    labels, k = _labels_of(assignment)
    if X.shape[0] != labels.shape[0]:
        raise ValueError(f"{X.shape[0]} rows but {labels.shape[0]} labels")
    if k < 2:
        raise ValueError(f"index needs at least 2 clusters, got {k}")
    return X, labels, k


def silhouette(data, assignment):
    """Mean and per-sample silhouette; samples in singleton clusters score 0."""
    X, labels, k = _prepare(data, assignment)
    sizes = np.bincount(labels, minlength=k).astype(np.float64)
    S = _kernels.cluster_distance_sums(X, labels, k)
    n = X.shape[0]
    own = sizes[labels]
    with np.errstate(divide="ignore", invalid="ignore"):
        a = S[np.arange(n), labels] / (own - 1.0)
        mean_other = S / sizes
    mean_other[np.arange(n), labels] = np.inf
    b = mean_other.min(axis=1)
    denom = np.maximum(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (b - a) / denom
    s = np.where((own > 1) & (denom > 0), s, 0.0)
    return float(s.mean()), s


def _barycentres(X, labels, k):
    C, counts = _kernels.update_centroids(X, labels, k)
    return C, counts


def calinski_harabasz(data, assignment):
    """(N-K)/(K-1) * BGSS/WGSS. Returns +inf when WGSS = 0 < BGSS."""
    X, labels, k = _prepare(data, assignment)
    n = X.shape[0]
    G = X.mean(axis=0)
    Gj, nj = _barycentres(X, labels, k)
    bgss = float((nj * ((Gj - G) ** 2).sum(axis=1)).sum())
    wgss = float(((X - Gj[labels]) ** 2).sum())
    if wgss == 0.0:
        if bgss == 0.0:
            raise NumericError("all points identical: BGSS and WGSS are both zero")
        return math.inf
    return (n - k) / (k - 1) * bgss / wgss


def davies_bouldin(data, assignment):
    """Mean over clusters of the worst (delta_j + delta_j') / distance(G_j, G_j')."""
    X, labels, k = _prepare(data, assignment)
    Gj, _ = _barycentres(X, labels, k)
    dist = np.sqrt(((X - Gj[labels]) ** 2).sum(axis=1))
    delta = np.bincount(labels, weights=dist, minlength=k) / np.bincount(labels, minlength=k)
    sep = np.sqrt(((Gj[:, None, :] - Gj[None, :, :]) ** 2).sum(axis=2))
    off = ~np.eye(k, dtype=bool)
    if np.any(sep[off] == 0.0):
        raise NumericError("two cluster barycentres coincide")
    ratio = (delta[:, None] + delta[None, :]) / np.where(off, sep, 1.0)
    ratio[~off] = -np.inf
    return float(ratio.max(axis=1).mean())


@dataclass(frozen=True)
class QualityReport:
    k: int
    silhouette: float
    calinski_harabasz: float
    davies_bouldin: float
    per_sample_silhouette: np.ndarray = field(repr=False)


def evaluate(data, assignment) -> QualityReport:
    _, k = _labels_of(assignment)
    mean_s, per = silhouette(data, assignment)
    return QualityReport(k, mean_s, calinski_harabasz(data, assignment),
                         davies_bouldin(data, assignment), per)


@dataclass(frozen=True)
class ScanEntry:
    k: int
    report: Optional[QualityReport] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class ScanResult:
    kind: str
    entries: tuple
    best_silhouette_k: Optional[int]
    best_calinski_harabasz_k: Optional[int]
    best_davies_bouldin_k: Optional[int]
    best_k: Optional[int]

    def report_for(self, k) -> Optional[QualityReport]:
        for e in self.entries:
            if e.k == k:
                return e.report
        return None

    @property
    def best(self) -> Optional[QualityReport]:
        return None if self.best_k is None else self.report_for(self.best_k)


def scan_k(data, kind, k_range, seed=42, **options) -> ScanResult:
    """Fit ``kind`` for each k in the inclusive ``k_range`` and score it.

    A failed fit is recorded on its entry and the scan continues. The best k
    maximises silhouette, ties broken by the larger Calinski-Harabasz.
    Each k is fitted with seed ``seed + k``.
    """
    X = np.asarray(data, dtype=np.float64)
    k_lo, k_hi = k_range
    n = X.shape[0]
    if not 2 <= k_lo <= k_hi <= n - 1:
        raise ValueError(f"k range [{k_lo}, {k_hi}] must lie within [2, {n - 1}]")
    entries = []
    for k in range(k_lo, k_hi + 1):
        try:
            _, asg = cl.fit(kind, X, k, seed=seed + k, **options)
            entries.append(ScanEntry(k, evaluate(X, asg)))
        except (HybridRegError, ValueError, np.linalg.LinAlgError) as exc:
            log.warning("%s k=%d failed: %s", kind, k, exc)
            entries.append(ScanEntry(k, error=str(exc)))
    ok = [e for e in entries if e.report is not None]

    def pick(key, sign):
        if not ok:
            return None
        return max(ok, key=lambda e: (sign * key(e.report), -e.k)).k

    best = None
    if ok:
        best = max(ok, key=lambda e: (e.report.silhouette, e.report.calinski_harabasz, -e.k)).k
    return ScanResult(
        kind,
        tuple(entries),
        pick(lambda r: r.silhouette, 1),
        pick(lambda r: r.calinski_harabasz, 1),
        pick(lambda r: r.davies_bouldin, -1),
        best,
    )
