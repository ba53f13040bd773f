"""From-scratch linear classifiers: L2-regularized logistic regression and
the NB/SVM hybrid (logistic loss over log-count-ratio-scaled features with
weight interpolation toward the mean magnitude).

Training is deterministic mini-batch gradient descent with a seeded shuffle
and a fixed batch size; no adaptive schedules. Fixed seed + fixed data gives
bitwise-identical weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.special import expit

from .features import LogCountRatio, SparseVector, nb_ratios, stack

__all__ = [
    "ModelDivergenceError",
    "Hyper",
    "LinearModel",
    "train_logit",
    "train_nbsvm",
    "predict_proba",
    "predict_many",
    "gradient_check",
    "dump_model",
    "load_model",
]

BATCH_SIZE = 64


class ModelDivergenceError(RuntimeError):
    """Training loss became non-finite."""


@dataclass(frozen=True)
class Hyper:
    learning_rate: float = 0.5
    l2_lambda: float = 1e-4
    epochs: int = 30
    beta: float = 0.25  # nbsvm interpolation weight
    seed: int = 0


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    kind: str  # "logit" | "nbsvm"
    hyper: Hyper
    ratios: Optional[LogCountRatio] = None  # nbsvm feature scaling
    initial_loss: float = field(default=float("nan"), compare=False)
    final_loss: float = field(default=float("nan"), compare=False)

    @property
    def width(self) -> int:
        return len(self.weights)


def _as_csr(X, width: Optional[int] = None) -> sparse.csr_matrix:
    if isinstance(X, sparse.spmatrix):
        return X.tocsr()
    vectors: Sequence[SparseVector] = X
    if width is None:
        width = max((int(v.indices[-1]) + 1 for v in vectors if v.nnz), default=1)
    return stack(vectors, width)


def _loss(X: sparse.csr_matrix, y: np.ndarray, w: np.ndarray, b: float, l2: float) -> float:
    z = np.asarray(X @ w) + b
    data_term = float(np.mean(np.logaddexp(0.0, z) - y * z))
    return data_term + 0.5 * l2 * float(w @ w)


def _fit(X: sparse.csr_matrix, y: np.ndarray, hyper: Hyper) -> tuple[np.ndarray, float, float, float]:
    n, v = X.shape
    if hyper.learning_rate <= 0:
        raise ValueError("learning_rate must be > 0")
    if hyper.epochs < 1:
        raise ValueError("epochs must be >= 1")
    if y.min() == y.max():
        raise ValueError("training labels contain a single class")
    rng = np.random.default_rng(hyper.seed)
    w = np.zeros(v, dtype=np.float64)
    b = 0.0
    lr = hyper.learning_rate
    l2 = hyper.l2_lambda
    initial = _loss(X, y, w, b, l2)
    for epoch in range(hyper.epochs):
        order = rng.permutation(n)
        for start in range(0, n, BATCH_SIZE):
            rows = order[start : start + BATCH_SIZE]
            xb = X[rows]
            z = np.asarray(xb @ w) + b
            g = (expit(z) - y[rows]) / len(rows)
            w -= lr * (np.asarray(xb.T @ g) + l2 * w)
            b -= lr * float(g.sum())
        current = _loss(X, y, w, b, l2)
        if not np.isfinite(current):
            raise ModelDivergenceError(f"training loss non-finite at epoch {epoch}")
    return w, b, initial, current


def train_logit(X, y, hyper: Hyper = Hyper(), width: Optional[int] = None) -> LinearModel:
    """Logistic regression minimizing mean logistic loss + (l2/2)||w||^2.

    The bias is unregularized, so on all-zero features it converges to the
    class-prior log-odds.
    """
    Xc = _as_csr(X, width)
    y = np.asarray(y, dtype=np.float64)
    w, b, initial, final = _fit(Xc, y, hyper)
    return LinearModel(w, b, "logit", hyper, initial_loss=initial, final_loss=final)


def train_nbsvm(X, y, hyper: Hyper = Hyper(), width: Optional[int] = None, alpha: float = 1.0) -> LinearModel:
    """NBSVM: logistic classifier on r-scaled features, then weights
    interpolated toward their mean magnitude:

        w' = (1 - beta) * mean(|w|) + beta * w
    """
    Xc = _as_csr(X, width)
    y = np.asarray(y, dtype=np.float64)
    ratio = nb_ratios(Xc, np.asarray(y, dtype=np.int8), alpha=alpha)
    Xs = Xc.multiply(ratio.r).tocsr()
    w, b, initial, final = _fit(Xs, y, hyper)
    w_bar = float(np.mean(np.abs(w)))
    w_interp = (1.0 - hyper.beta) * w_bar + hyper.beta * w
    return LinearModel(
        w_interp, b, "nbsvm", hyper, ratios=ratio,
        initial_loss=initial, final_loss=final,
    )


def _scores(model: LinearModel, X: sparse.csr_matrix) -> np.ndarray:
    if model.kind == "nbsvm":
        X = X.multiply(model.ratios.r).tocsr()
    return np.asarray(X @ model.weights) + model.bias


def predict_proba(model: LinearModel, x: SparseVector) -> float:
    """P(label=1 | x) via the sigmoid of the linear score."""
    if x.nnz and int(x.indices[-1]) >= model.width:
        raise ValueError("feature index out of range for this model")
    if model.kind == "nbsvm":
        vals = x.values * model.ratios.r[x.indices]
    else:
        vals = x.values
    score = float(model.weights[x.indices] @ vals) + model.bias
    return float(expit(score))


def predict_many(model: LinearModel, X, width: Optional[int] = None) -> np.ndarray:
    return expit(_scores(model, _as_csr(X, width)))


def gradient_check(kind: str, X, y, epsilon: float = 1e-5, seed: int = 0, l2_lambda: float = 0.1) -> float:
    """Max relative error between the analytic loss gradient and central
    finite differences at a seeded random point. Dense-able instances only."""
    Xc = _as_csr(X)
    y = np.asarray(y, dtype=np.float64)
    if kind == "nbsvm":
        ratio = nb_ratios(Xc, np.asarray(y, dtype=np.int8))
        Xc = Xc.multiply(ratio.r).tocsr()
    n, v = Xc.shape
    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, 0.5, size=v)
    b = float(rng.normal(0.0, 0.5))

    def loss_at(wv: np.ndarray, bv: float) -> float:
        return _loss(Xc, y, wv, bv, l2_lambda)

    z = np.asarray(Xc @ w) + b
    g = (expit(z) - y) / n
    grad_w = np.asarray(Xc.T @ g) + l2_lambda * w
    grad_b = float(g.sum())

    errs = []
    for j in range(v):
        bump = np.zeros(v)
        bump[j] = epsilon
        numeric = (loss_at(w + bump, b) - loss_at(w - bump, b)) / (2 * epsilon)
        errs.append(abs(numeric - grad_w[j]) / max(1.0, abs(numeric), abs(grad_w[j])))
    numeric_b = (loss_at(w, b + epsilon) - loss_at(w, b - epsilon)) / (2 * epsilon)
    errs.append(abs(numeric_b - grad_b) / max(1.0, abs(numeric_b), abs(grad_b)))
    return float(np.max(errs))


def dump_model(model: LinearModel, path) -> None:
    """Full-precision text dump for reproducibility audits."""
    h = model.hyper
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("toxprep-model v1\n")
        fh.write(f"kind {model.kind}\n")
        fh.write(
            f"hyper learning_rate={h.learning_rate!r} l2_lambda={h.l2_lambda!r} "
            f"epochs={h.epochs} beta={h.beta!r} seed={h.seed}\n"
        )
        fh.write(f"bias {model.bias!r}\n")
        if model.ratios is not None:
            fh.write(f"alpha {model.ratios.alpha!r}\n")
            fh.write(f"ratios {len(model.ratios.r)}\n")
            for val in model.ratios.r:
                fh.write(f"{val!r}\n")
        fh.write(f"weights {model.width}\n")
        for val in model.weights:
            fh.write(f"{val!r}\n")


def load_model(path) -> LinearModel:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "toxprep-model v1":
        raise ValueError(f"{path}: not a toxprep model dump")
    pos = 1
    kind = lines[pos].split()[1]; pos += 1
    kv = dict(item.split("=", 1) for item in lines[pos].split()[1:]); pos += 1
    hyper = Hyper(
        learning_rate=float(kv["learning_rate"]),
        l2_lambda=float(kv["l2_lambda"]),
        epochs=int(kv["epochs"]),
        beta=float(kv["beta"]),
        seed=int(kv["seed"]),
    )
    bias = float(lines[pos].split()[1]); pos += 1
    ratios = None
    if lines[pos].startswith("alpha "):
        alpha = float(lines[pos].split()[1]); pos += 1
        count = int(lines[pos].split()[1]); pos += 1
        vals = np.array([float(v) for v in lines[pos : pos + count]])
        pos += count
        ratios = LogCountRatio(vals, alpha)
    count = int(lines[pos].split()[1]); pos += 1
    weights = np.array([float(v) for v in lines[pos : pos + count]])
    return LinearModel(weights, bias, kind, hyper, ratios=ratios)
