"""Symmetric eigen helpers shared by spectral clustering and LDA."""

import numpy as np
import scipy.linalg

from .errors import NumericError


def top_eigh(M, m):
    """The ``m`` largest eigenpairs of symmetric ``M``, eigenvalues descending.

    Eigenvector signs are fixed so the largest-magnitude entry is positive.
    """
    n = M.shape[0]
    if not 1 <= m <= n:
        raise ValueError(f"cannot take {m} eigenpairs of a {n}x{n} matrix")
    try:
        w, V = scipy.linalg.eigh(M, subset_by_index=[n - m, n - 1])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"symmetric eigensolver failed: {exc}") from exc
    w, V = w[::-1], V[:, ::-1]
    return w, _fix_signs(V)


def _fix_signs(V):
    V = np.array(V)
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def inv_sqrt_psd(S):
    """S^(-1/2) for a symmetric positive definite matrix."""
    w, V = np.linalg.eigh(S)
    if w.min() <= 0:
        raise NumericError("matrix is not positive definite")
    return (V / np.sqrt(w)) @ V.T
