"""Two-dimensional Fisher LDA projection with cluster ids as classes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .linalg import _fix_signs, inv_sqrt_psd, top_eigh

WITHIN_REG = 1e-8


@dataclass(frozen=True)
class LdaProjection:
    basis: np.ndarray          # n_features x 2
    class_means: np.ndarray    # K x n_features
    global_mean: np.ndarray
    eigenvalues: np.ndarray


def scatter_matrices(X, labels):
    """Within-class and between-class scatter."""
    k = int(labels.max()) + 1
    mu = X.mean(axis=0)
    d = X.shape[1]
    Sw = np.zeros((d, d))
    Sb = np.zeros((d, d))
    means = np.empty((k, d))
    for c in range(k):
        Xc = X[labels == c]
        means[c] = Xc.mean(axis=0)
        D = Xc - means[c]
        Sw += D.T @ D
        m = (means[c] - mu)[:, None]
        Sb += Xc.shape[0] * (m @ m.T)
    return Sw, Sb, means, mu


def fisher_criterion(data, labels, basis):
    """trace((B' Sw B)^-1 B' Sb B) for a projection basis B."""
    X = np.asarray(data, dtype=np.float64)
    Sw, Sb, _, _ = scatter_matrices(X, np.asarray(labels))
    W = basis.T @ Sw @ basis
    B = basis.T @ Sb @ basis
    return float(np.trace(np.linalg.solve(W, B)))


def fit_lda(data, labels) -> LdaProjection:
    """Top-2 generalised eigenvectors of (Sb, Sw).

    With two classes Sb has rank one; the second axis is then the leading
    principal direction of the data after removing the first axis.
    """
    X = np.asarray(data, dtype=np.float64)
    labels = np.asarray(getattr(labels, "labels", labels), dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != labels.shape[0]:
        raise ValueError("data and labels disagree in length")
    counts = np.bincount(labels)
    k = counts.shape[0]
    if k < 2 or np.count_nonzero(counts) < 2:
        raise ValueError("LDA needs at least two classes")
    if counts.min() < 2:
        raise ValueError("every class needs at least two members")
    d = X.shape[1]
    if d < 2:
        raise ValueError("need at least two features for a 2-D projection")

    Sw, Sb, means, mu = scatter_matrices(X, labels)
    Sw = Sw + WITHIN_REG * np.eye(d)
    try:
        W = inv_sqrt_psd(Sw)
    except NumericError as exc:
        raise NumericError("within-class scatter is singular") from exc
    M = W @ Sb @ W
    M = 0.5 * (M + M.T)
    n_disc = min(k - 1, 2)
    vals, U = top_eigh(M, n_disc)
    dirs = W @ U
    dirs /= np.linalg.norm(dirs, axis=0)
    if n_disc == 1:
        first = dirs[:, 0]
        R = (X - mu) - np.outer((X - mu) @ first, first)
        _, V = top_eigh(R.T @ R, 1)
        second = V[:, 0] - (V[:, 0] @ first) * first
        nrm = np.linalg.norm(second)
        if nrm < 1e-12:
            raise NumericError("cannot find a second projection axis")
        dirs = np.column_stack([first, second / nrm])
        vals = np.append(vals, 0.0)
    return LdaProjection(_fix_signs(dirs), means, mu, vals)


def project(p: LdaProjection, data) -> np.ndarray:
    X = np.asarray(data, dtype=np.float64)
    if X.size == 0:
        return np.empty((0, 2))
    if X.ndim != 2 or X.shape[1] != p.global_mean.shape[0]:
        raise ValueError(f"expected {p.global_mean.shape[0]} columns")
    return (X - p.global_mean) @ p.basis
