"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--n 2000]

The first numba call compiles; it is timed separately and excluded from
the steady-state figures.
"""

import argparse
import time

import numpy as np

from hybridreg._kernels import numba_impl, numpy_impl
from hybridreg._kernels.codes import ACTIVATION_CODES, LINKAGE_CODES


def cases(n, rng):
    X = rng.standard_normal((n, 4))
    C = X[rng.choice(n, 8, replace=False)]
    labels = rng.integers(0, 8, n)
    small = X[: min(n, 600)]
    hidden = 20
    theta = rng.standard_normal(hidden * 4 + 2 * hidden + 1) * 0.3
    y = rng.standard_normal(n)
    return [
        ("assign_labels", lambda m: m.assign_labels(X, C)),
        ("update_centroids", lambda m: m.update_centroids(X, labels, 8)),
        ("cluster_distance_sums", lambda m: m.cluster_distance_sums(X, labels, 8)),
        (f"linkage_merges (ward, n={small.shape[0]})",
         lambda m: m.linkage_merges(small, LINKAGE_CODES["ward"])),
        (f"mlp_loss_grad (tanh, m={n})",
         lambda m: m.mlp_loss_grad(theta, X, y, hidden, ACTIVATION_CODES["tanh"])),
        ("mlp_loss_grad (tanh, m=64)",
         lambda m: m.mlp_loss_grad(theta, X[:64], y[:64], hidden, ACTIVATION_CODES["tanh"])),
    ]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':<34}{'compile s':>11}{'numba ms':>11}{'numpy ms':>11}{'speedup':>9}")
    for name, call in cases(args.n, rng):
        t = time.perf_counter()
        call(numba_impl)
        compile_s = time.perf_counter() - t
        fast = best_of(lambda: call(numba_impl), args.repeat)
        slow = best_of(lambda: call(numpy_impl), args.repeat)
        print(f"{name:<34}{compile_s:>11.2f}{fast * 1e3:>11.2f}{slow * 1e3:>11.2f}"
              f"{slow / fast:>8.1f}x")


if __name__ == "__main__":
    main()
