"""Kernel SVM trainer: objective, gradient, mini-batch NAG loop, predictor.

The model is the representer-form expansion ``f(x) = sum_j beta_j
K(x_j, x)`` over all training points, with no intercept. Training
minimizes

    f(beta) = 0.5 * beta' K beta + (C/n) * sum_k L(xi_k),
    xi_k = 1 - y_k * (K beta)_k,

with the configured margin loss ``L`` (the saturating family by
default; hinge and pinball run through the same loop as subgradient
baselines). The optimizer is Nesterov-accelerated mini-batch descent:
each iteration samples ``s`` indices without replacement, evaluates the
gradient at the look-ahead point ``beta + r*v`` (full-vector ``K beta``
regularizer term, batch-restricted loss term scaled by ``C/s``), and
applies the velocity update. The learning rate follows the recurrence
``alpha <- alpha * exp(-eta * t)`` after each iteration, which collapses
to ~0 within roughly 15 iterations at the default ``eta=0.1``; this is
faithful to the published schedule and is surfaced here rather than
silently softened.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NumericError, ParameterError, ShapeError
from .kernel import KernelMatrix, KernelSpec, gram_matrix, kernel_vector
from .loss import LossSpec, loss_derivative, loss_value

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainerConfig:
    """Hyperparameters for one training run.

    Defaults are the reference constants: ``beta0 = v0 = 0.01``,
    ``alpha0 = eta = 0.1``, momentum ``r = 0.6``, 1000 iterations, and a
    batch size resolved at fit time to 4 when n < 100 and 32 otherwise.
    """

    C: float = 1.0
    loss: LossSpec = field(default_factory=LossSpec.expsat)
    kernel: KernelSpec = field(default_factory=KernelSpec.gaussian)
    beta0: float = 0.01
    v0: float = 0.01
    alpha0: float = 0.1
    eta: float = 0.1
    r: float = 0.6
    batch_size: int | None = None
    max_iters: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not self.C > 0:
            raise ParameterError(f"trade-off C must be > 0, got {self.C}")
        if not self.alpha0 > 0:
            raise ParameterError(f"initial learning rate must be > 0, got {self.alpha0}")
        if not self.eta > 0:
            raise ParameterError(f"learning-rate decay eta must be > 0, got {self.eta}")
        if not 0.0 <= self.r < 1.0:
            raise ParameterError(f"momentum r must lie in [0, 1), got {self.r}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ParameterError(f"batch size must be >= 1, got {self.batch_size}")
        if self.max_iters < 1:
            raise ParameterError(f"max_iters must be >= 1, got {self.max_iters}")

    def resolved_batch_size(self, n: int) -> int:
        if self.batch_size is not None:
            return self.batch_size
        return 4 if n < 100 else 32


@dataclass(frozen=True)
class TrainedModel:
    beta: np.ndarray
    support_points: np.ndarray
    kernel: KernelSpec
    config_snapshot: TrainerConfig
    iterations_run: int
    final_objective: float
    scaler: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        pts = np.asarray(self.support_points, dtype=float)
        if beta.shape != (pts.shape[0],):
            raise ShapeError("one coefficient per support point", beta.shape, pts.shape)
        if not np.isfinite(beta).all():
            raise ParameterError("model coefficients contain NaN or Inf")
        beta = beta.copy()
        pts = pts.copy()
        beta.setflags(write=False)
        pts.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "support_points", pts)


def _check_labels(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ParameterError("labels must be exactly -1 or +1")
    return y


def objective(config: TrainerConfig, K: KernelMatrix, y, beta) -> float:
    """Regularized empirical risk 0.5*b'Kb + (C/n) * sum L(1 - y*(Kb))."""
    y = _check_labels(y)
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (K.n,) or y.shape != (K.n,):
        raise ShapeError("beta and y must match the kernel matrix", beta.shape, y.shape, K.n)
    kb = K.entries @ beta
    xi = 1.0 - y * kb
    return float(0.5 * (beta @ kb) + (config.C / K.n) * np.sum(loss_value(config.loss, xi)))


def full_gradient(config: TrainerConfig, K: KernelMatrix, y, beta) -> np.ndarray:
    """Exact gradient of :func:`objective` at ``beta``.

    ``K beta - (C/n) * sum_k L'(xi_k) y_k K_k``; samples on or past the
    margin (xi_k <= 0) contribute nothing for losses that vanish there.
    """
    y = _check_labels(y)
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (K.n,) or y.shape != (K.n,):
        raise ShapeError("beta and y must match the kernel matrix", beta.shape, y.shape, K.n)
    kb = K.entries @ beta
    xi = 1.0 - y * kb
    w = loss_derivative(config.loss, xi) * y
    return kb - (config.C / K.n) * (K.entries @ w)


def learning_rate_sequence(alpha0: float, eta: float, n_iters: int):
    """Yield the learning rate used at iterations t = 1..n_iters.

    Iterates ``alpha <- alpha * exp(-eta * t)`` applied after iteration
    ``t``; the closed form is ``alpha0 * exp(-eta * t * (t-1) / 2)``.
    """
    alpha = alpha0
    for t in range(1, n_iters + 1):
        yield alpha
        alpha *= math.exp(-eta * t)


def learning_rate_at(alpha0: float, eta: float, t: int) -> float:
    """Closed form of the decayed learning rate at 1-based iteration t."""
    return alpha0 * math.exp(-eta * t * (t - 1) / 2.0)


def fit(config: TrainerConfig, X, y, gram: KernelMatrix | None = None) -> TrainedModel:
    """Train by mini-batch NAG for exactly ``max_iters`` iterations.

    Deterministic for a fixed (config, data, seed). ``gram`` may be
    supplied to reuse a precomputed kernel matrix over ``X``.
    """
    X = np.asarray(X, dtype=float)
    y = _check_labels(y)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ShapeError("X must be n-by-m with one label per row", X.shape, y.shape)
    n = X.shape[0]
    s = config.resolved_batch_size(n)
    if s > n:
        raise ParameterError(f"batch size {s} exceeds the {n} training samples")
    if gram is None:
        gram = gram_matrix(config.kernel, X)
    elif gram.n != n:
        raise ShapeError("precomputed gram matrix does not match X", gram.n, n)

    K = gram.entries
    scale = config.C / s
    beta = np.full(n, config.beta0, dtype=float)
    v = np.full(n, config.v0, dtype=float)
    rng = np.random.default_rng(config.seed)

    # overflow is detected explicitly and reported as a NumericError
    with np.errstate(over="ignore", invalid="ignore"):
        for t, alpha in enumerate(
            learning_rate_sequence(config.alpha0, config.eta, config.max_iters), start=1
        ):
            batch = rng.choice(n, size=s, replace=False)
            beta_look = beta + config.r * v
            kb = K @ beta_look
            xi = 1.0 - y[batch] * kb[batch]
            w = loss_derivative(config.loss, xi) * y[batch]
            grad = kb - scale * (K[batch].T @ w)
            if not np.isfinite(grad).all():
                raise NumericError(f"non-finite gradient at iteration {t}")
            v = config.r * v - alpha * grad
            beta = beta_look + v

    snapshot = replace(config, batch_size=s)
    final = objective(config, gram, y, beta)
    return TrainedModel(
        beta=beta,
        support_points=X,
        kernel=config.kernel,
        config_snapshot=snapshot,
        iterations_run=config.max_iters,
        final_objective=final,
    )


def decision_value(model: TrainedModel, x_hat) -> float:
    """sum_j beta_j K(x_j, x_hat) over the retained support points."""
    kv = kernel_vector(model.kernel, model.support_points, x_hat)
    return float(model.beta @ kv)


def decision_values(model: TrainedModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.support_points.shape[1]:
        raise ShapeError("query dimension must match support points", X.shape, model.support_points.shape)
    return np.array([decision_value(model, x) for x in X])


def predict(model: TrainedModel, x_hat) -> float:
    """Classify one sample; the zero decision value maps to +1."""
    return 1.0 if decision_value(model, x_hat) >= 0.0 else -1.0


def predict_batch(model: TrainedModel, X) -> np.ndarray:
    d = decision_values(model, X)
    return np.where(d >= 0.0, 1.0, -1.0)


def _loss_to_dict(spec: LossSpec) -> dict:
    return {
        "kind": spec.kind.value,
        "a": spec.a,
        "lam": spec.lam,
        "tau": spec.tau,
        "delta": spec.delta,
        "delta1": spec.delta1,
        "delta2": spec.delta2,
    }


def _config_to_dict(config: TrainerConfig) -> dict:
    return {
        "C": config.C,
        "loss": _loss_to_dict(config.loss),
        "kernel": {"kind": config.kernel.kind.value, "sigma": config.kernel.sigma},
        "beta0": config.beta0,
        "v0": config.v0,
        "alpha0": config.alpha0,
        "eta": config.eta,
        "r": config.r,
        "batch_size": config.batch_size,
        "max_iters": config.max_iters,
        "seed": config.seed,
    }


def config_from_dict(d: dict) -> TrainerConfig:
    return TrainerConfig(
        C=d["C"],
        loss=LossSpec(**d["loss"]),
        kernel=KernelSpec(**d["kernel"]),
        beta0=d["beta0"],
        v0=d["v0"],
        alpha0=d["alpha0"],
        eta=d["eta"],
        r=d["r"],
        batch_size=d["batch_size"],
        max_iters=d["max_iters"],
        seed=d["seed"],
    )


def save_model(model: TrainedModel) -> str:
    """Canonical JSON text for a trained model.

    Floats are emitted at full round-trip precision, so equal models
    serialize to identical bytes.
    """
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "kernel": {"kind": model.kernel.kind.value, "sigma": model.kernel.sigma},
        "beta": [float(b) for b in model.beta],
        "support_points": [[float(v) for v in row] for row in model.support_points],
        "config": _config_to_dict(model.config_snapshot),
        "iterations_run": model.iterations_run,
        "final_objective": model.final_objective,
        "scaler": None if model.scaler is None else [[a, b] for a, b in model.scaler],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def load_model(text: str) -> TrainedModel:
    doc = json.loads(text)
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ParameterError(f"unsupported model format version {doc.get('format_version')}")
    scaler = doc.get("scaler")
    return TrainedModel(
        beta=np.array(doc["beta"], dtype=float),
        support_points=np.array(doc["support_points"], dtype=float),
        kernel=KernelSpec(**doc["kernel"]),
        config_snapshot=config_from_dict(doc["config"]),
        iterations_run=doc["iterations_run"],
        final_objective=doc["final_objective"],
        scaler=None if scaler is None else tuple((float(a), float(b)) for a, b in scaler),
    )
