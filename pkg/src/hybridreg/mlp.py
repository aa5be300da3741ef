"""One-hidden-layer MLP regressor, its trainers, and grid-search cross-validation."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import NumericError
from .optim import lbfgs

log = logging.getLogger(__name__)

ACTIVATIONS = ("tanh", "relu")
SOLVERS = ("lbfgs", "sgd", "adam")
# "identity" is accepted by the trainers for testing the optimiser on a linear model.
_ALL_ACTIVATIONS = ACTIVATIONS + ("identity",)

SGD_LR = 1e-2
SGD_MOMENTUM = 0.9
ADAM_LR = 1e-3
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8
BATCH_SIZE = 32


@dataclass(frozen=True)
class Provenance:
    solver: str
    neurons: int
    cv_mse: Optional[float]
    seed: int


@dataclass(frozen=True)
class MlpModel:
    w1: np.ndarray     # hidden x features
    b1: np.ndarray
    w2: np.ndarray     # hidden
    b2: float
    activation: str
    provenance: Optional[Provenance] = None

    def __post_init__(self):
        if self.activation not in _ALL_ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        for name in ("w1", "b1", "w2"):
            a = np.array(getattr(self, name), dtype=np.float64)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        object.__setattr__(self, "b2", float(self.b2))
        H, F = self.w1.shape
        if self.b1.shape != (H,) or self.w2.shape != (H,):
            raise ValueError("inconsistent layer shapes")

    @property
    def n_hidden(self):
        return self.w1.shape[0]

    @property
    def n_features(self):
        return self.w1.shape[1]

    @property
    def theta(self):
        return pack(self.w1, self.b1, self.w2, self.b2)

    @classmethod
    def from_theta(cls, theta, n_features, n_hidden, activation, provenance=None):
        return cls(*unpack(theta, n_features, n_hidden), activation, provenance)

    def is_finite(self):
        return bool(np.isfinite(self.theta).all())

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected rows of {self.n_features} features")
        if not self.is_finite():
            raise NumericError("model has non-finite parameters")
        # fixed-order accumulation instead of BLAS, so a row's prediction is
        # bit-identical whatever batch it arrives in
        Z = np.broadcast_to(self.b1, (X.shape[0], self.n_hidden)).copy()
        for f in range(self.n_features):
            Z += X[:, f:f + 1] * self.w1[:, f]
        A = _activate(Z, self.activation)
        out = np.full(X.shape[0], self.b2)
        for h in range(self.n_hidden):
            out += A[:, h] * self.w2[h]
        return out


def _activate(Z, activation):
    if activation == "tanh":
        return np.tanh(Z)
    if activation == "relu":
        return np.maximum(Z, 0.0)
    return Z


def pack(w1, b1, w2, b2):
    return np.concatenate([np.ravel(w1), b1, w2, [b2]]).astype(np.float64)


def unpack(theta, n_features, n_hidden):
    H, F = n_hidden, n_features
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (H * F + 2 * H + 1,):
        raise ValueError("parameter vector has the wrong length")
    w1 = theta[:H * F].reshape(H, F)
    b1 = theta[H * F:H * F + H]
    w2 = theta[H * F + H:H * F + 2 * H]
    return w1, b1, w2, float(theta[-1])


def forward(model: MlpModel, x) -> float:
    """Network output for one feature row."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("forward expects a single row")
    return float(model.predict(x[None, :])[0])


def _objective(X, y, n_hidden, activation):
    code = _kernels.ACTIVATION_CODES[activation]
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)

    def fun(theta):
        return _kernels.mlp_loss_grad(theta, X, y, n_hidden, code)

    return fun


def loss(model: MlpModel, X, y) -> float:
    return float(_objective(X, y, model.n_hidden, model.activation)(model.theta)[0])


def gradient(model: MlpModel, X, y) -> dict:
    """Exact gradient of the batch MSE, keyed like the model's parameters."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    if X.shape[1] != model.n_features or X.shape[0] != y.shape[0]:
        raise ValueError("batch dimensions do not match the model")
    _, g = _objective(X, y, model.n_hidden, model.activation)(model.theta)
    w1, b1, w2, b2 = unpack(g, model.n_features, model.n_hidden)
    return {"w1": w1, "b1": b1, "w2": w2, "b2": b2}


def init_theta(n_features, n_hidden, rng):
    """Uniform(+-sqrt(6 / (fan_in + fan_out))) per layer, biases included."""
    b_in = math.sqrt(6.0 / (n_features + n_hidden))
    b_out = math.sqrt(6.0 / (n_hidden + 1))
    w1 = rng.uniform(-b_in, b_in, size=(n_hidden, n_features))
    b1 = rng.uniform(-b_in, b_in, size=n_hidden)
    w2 = rng.uniform(-b_out, b_out, size=n_hidden)
    b2 = rng.uniform(-b_out, b_out)
    return pack(w1, b1, w2, b2)


@dataclass(frozen=True)
class TrainReport:
    final_train_mse: float
    iterations: int
    converged: bool
    loss_history: tuple
    diverged: bool = False


def _train_minibatch(fun, X, y, theta, n_hidden, activation, solver, rng, max_iter,
                     learning_rate, batch_size, gtol, ftol):
    m = X.shape[0]
    code = _kernels.ACTIVATION_CODES[activation]
    if solver == "sgd":
        lr = SGD_LR if learning_rate is None else learning_rate
        vel = np.zeros_like(theta)
    else:
        lr = ADAM_LR if learning_rate is None else learning_rate
        m1 = np.zeros_like(theta)
        m2 = np.zeros_like(theta)
        beta1, beta2 = ADAM_BETAS
    f, g = fun(theta)
    history = [f]
    best_f, best_theta = f, theta.copy()
    converged = diverged = False
    t = 0
    epoch = 0
    for epoch in range(1, max_iter + 1):
        perm = rng.permutation(m)
        for start in range(0, m, batch_size):
            idx = perm[start:start + batch_size]
            _, gb = _kernels.mlp_loss_grad(theta, X[idx], y[idx], n_hidden, code)
            if solver == "sgd":
                vel = SGD_MOMENTUM * vel - lr * gb
                theta = theta + vel
            else:
                t += 1
                m1 = beta1 * m1 + (1 - beta1) * gb
                m2 = beta2 * m2 + (1 - beta2) * gb * gb
                mhat = m1 / (1 - beta1 ** t)
                vhat = m2 / (1 - beta2 ** t)
                theta = theta - lr * mhat / (np.sqrt(vhat) + ADAM_EPS)
        f_prev = f
        f, g = fun(theta)
        history.append(f)
        if not (math.isfinite(f) and np.isfinite(theta).all()):
            diverged = True
            break
        if f < best_f:
            best_f, best_theta = f, theta.copy()
        if np.linalg.norm(g) < gtol or abs(f_prev - f) <= ftol * max(abs(f_prev), abs(f)):
            converged = True
            break
    return best_theta, best_f, epoch, converged, diverged, history


def train(X, y, neurons, activation="tanh", solver="lbfgs", seed=42, max_iter=500,
          learning_rate=None, batch_size=BATCH_SIZE, gtol=1e-6, ftol=1e-8,
          provenance_cv=None):
    """Fit a one-hidden-layer network to (X, y) by minimising the MSE.

    Returns ``(MlpModel, TrainReport)``; the model holds the lowest-loss
    parameters seen. A run whose loss becomes non-finite is reported with
    ``converged=False, diverged=True``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[0] != y.shape[0]:
        raise ValueError("training data must be a non-empty matrix with matching targets")
    if neurons < 1:
        raise ValueError("neurons must be >= 1")
    if activation not in _ALL_ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}")
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}")
    rng = np.random.default_rng(seed)
    F = X.shape[1]
    theta0 = init_theta(F, neurons, rng)
    fun = _objective(X, y, neurons, activation)

    if solver == "lbfgs":
        res = lbfgs(fun, theta0, max_iter=max_iter, gtol=gtol, ftol=ftol)
        theta, best_f, iters = res.x, res.fun, res.n_iter
        history = res.history
        diverged = not math.isfinite(best_f)
        converged = res.converged and not diverged
    else:
        theta, best_f, iters, converged, diverged, history = _train_minibatch(
            fun, X, y, theta0, neurons, activation, solver, rng, max_iter,
            learning_rate, batch_size, gtol, ftol)
    prov = Provenance(solver, int(neurons), provenance_cv, int(seed))
    model = MlpModel.from_theta(theta, F, neurons, activation, prov)
    report = TrainReport(float(best_f), int(iters), bool(converged),
                         tuple(float(v) for v in history), bool(diverged))
    return model, report


# ----------------------------------------------------------------- grid search


@dataclass(frozen=True)
class GridSpec:
    neuron_range: tuple = (12, 30)
    activations: tuple = ACTIVATIONS
    solvers: tuple = SOLVERS
    folds: int = 5
    seed: int = 42
    max_iter: int = 500

    def __post_init__(self):
        lo, hi = self.neuron_range
        if not 1 <= lo <= hi:
            raise ValueError(f"invalid neuron range {self.neuron_range}")
        acts = tuple(a for a in ACTIVATIONS if a in self.activations)
        sols = tuple(s for s in SOLVERS if s in self.solvers)
        unknown = set(self.activations) - set(ACTIVATIONS) | set(self.solvers) - set(SOLVERS)
        if unknown:
            raise ValueError(f"unknown grid value(s): {sorted(unknown)}")
        if not acts or not sols:
            raise ValueError("grid must contain at least one activation and one solver")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        # canonical order doubles as the tie-break order
        object.__setattr__(self, "neuron_range", (int(lo), int(hi)))
        object.__setattr__(self, "activations", acts)
        object.__setattr__(self, "solvers", sols)

    def candidates(self):
        lo, hi = self.neuron_range
        return list(itertools.product(range(lo, hi + 1), self.activations, self.solvers))


@dataclass(frozen=True)
class CvRow:
    neurons: int
    activation: str
    solver: str
    fold_mse: tuple
    mean_mse: float
    failed: bool = False


@dataclass(frozen=True)
class GridResult:
    neurons: int
    activation: str
    solver: str
    cv_mse: float
    table: tuple = field(repr=False)


def kfold_indices(n, folds, seed):
    """Seeded shuffled folds; returns a list of sorted validation index arrays."""
    if folds > n:
        raise ValueError(f"{folds} folds need at least {folds} samples, got {n}")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(perm, folds)]


def cross_validate(X, y, neurons, activation, solver, folds, seed, max_iter=500):
    """Validation MSE per fold, all folds trained with the same seed."""
    n = X.shape[0]
    out = []
    failed = False
    for val in folds:
        mask = np.ones(n, dtype=bool)
        mask[val] = False
        model, rep = train(X[mask], y[mask], neurons, activation, solver, seed=seed,
                           max_iter=max_iter)
        if rep.diverged or not model.is_finite():
            failed = True
            out.append(math.inf)
            continue
        r = model.predict(X[val]) - y[val]
        mse = float(np.mean(r * r))
        failed |= not math.isfinite(mse)
        out.append(mse)
    return tuple(out), failed


def grid_search(X, y, grid: GridSpec) -> GridResult:
    """Exhaustive (neurons, activation, solver) search scored by k-fold CV MSE.

    Folds are shared by every candidate. Ties go to fewer neurons, then
    tanh before relu, then lbfgs < sgd < adam.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    folds = kfold_indices(X.shape[0], grid.folds, grid.seed)
    rows = []
    best = None
    for neurons, act, solver in grid.candidates():
        fold_mse, failed = cross_validate(X, y, neurons, act, solver, folds, grid.seed,
                                          grid.max_iter)
        mean = math.inf if failed else float(np.mean(fold_mse))
        row = CvRow(neurons, act, solver, fold_mse, mean, failed)
        rows.append(row)
        if not failed and (best is None or mean < best.mean_mse):
            best = row
    if best is None:
        raise NumericError("every grid candidate diverged")
    return GridResult(best.neurons, best.activation, best.solver, best.mean_mse, tuple(rows))
