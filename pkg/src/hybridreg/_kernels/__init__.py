"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment
variable ``HYBRIDREG_DISABLE_NUMBA`` is unset or ``0``. Both backends are
importable directly (``numba_impl`` / ``numpy_impl``) for benchmarking and
equivalence tests.
"""

import logging
import os

from . import numpy_impl
from .codes import ACTIVATION_CODES, LINKAGE_CODES

log = logging.getLogger(__name__)

ENV_FLAG = "HYBRIDREG_DISABLE_NUMBA"


def _want_numba():
    return os.environ.get(ENV_FLAG, "0").strip().lower() in ("", "0", "false", "no")


_impl = numpy_impl
if _want_numba():
    try:
        from . import numba_impl as _impl
    except ImportError:  # pragma: no cover - numba is a declared dependency
        log.warning("numba unavailable, using numpy kernels")
        _impl = numpy_impl

BACKEND = "numba" if _impl is not numpy_impl else "numpy"

assign_labels = _impl.assign_labels
update_centroids = _impl.update_centroids
cluster_distance_sums = _impl.cluster_distance_sums
linkage_merges = _impl.linkage_merges
# The compiled loop beats BLAS-backed numpy only while a batch is small
# (see benchmarks/bench_kernels.py); the cut-off is on samples x hidden units.
SMALL_BATCH_WORK = 1500


def mlp_loss_grad(theta, X, y, n_hidden, act):
    if _impl is not numpy_impl and X.shape[0] * n_hidden <= SMALL_BATCH_WORK:
        return _impl.mlp_loss_grad(theta, X, y, n_hidden, act)
    return numpy_impl.mlp_loss_grad(theta, X, y, n_hidden, act)

__all__ = [
    "ACTIVATION_CODES",
    "BACKEND",
    "ENV_FLAG",
    "LINKAGE_CODES",
    "assign_labels",
    "cluster_distance_sums",
    "linkage_merges",
    "mlp_loss_grad",
    "update_centroids",
]
