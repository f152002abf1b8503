"""Linear SVM trained by primal hinge-loss SGD with the 1/(lambda*t) schedule.

Minimizes (lambda/2)*(||w||^2 + b^2) + mean hinge loss over labels mapped to
{-1, +1}. The bias is regularized with the weights (equivalent to a constant
input feature), which keeps the shrinkage step uniform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from morbench.tfidf import DocTermMatrix


@dataclass
class SvmModel:
    weights: np.ndarray
    bias: float
    lam: float


def _as_dense(rows) -> np.ndarray:
    if isinstance(rows, DocTermMatrix):
        return rows.to_dense()
    return np.asarray(rows, dtype=float)


def hinge_objective(model: SvmModel, X: np.ndarray, y_signed: np.ndarray) -> float:
    """Full-batch regularized objective; used as the training progress oracle."""
    margins = y_signed * (X @ model.weights + model.bias)
    hinge = np.maximum(0.0, 1.0 - margins).mean()
    reg = 0.5 * model.lam * (model.weights @ model.weights + model.bias**2)
    return float(reg + hinge)


def svm_train(rows, labels, lam: float = 1e-4, epochs: int = 50, seed: int = 0) -> SvmModel:
    """Pegasos-style SGD over seeded per-epoch shuffles; deterministic per seed."""
    X = _as_dense(rows)
    y = np.asarray(labels, dtype=int)
    if X.shape[0] != y.shape[0]:
        raise ValueError("row/label count mismatch")
    if len(set(y.tolist())) < 2:
        raise ValueError("training requires both classes present")
    y_signed = np.where(y == 1, 1.0, -1.0)

    rng = np.random.default_rng(seed)
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    t = 0
    for _ in range(epochs):
        order = rng.permutation(n)
        for i in order:
            t += 1
            eta = 1.0 / (lam * t)
            shrink = 1.0 - eta * lam
            if y_signed[i] * (X[i] @ w + b) < 1.0:
                w = shrink * w + eta * y_signed[i] * X[i]
                b = shrink * b + eta * y_signed[i]
            else:
                w = shrink * w
                b = shrink * b
    return SvmModel(weights=w, bias=float(b), lam=lam)


def svm_decision(model: SvmModel, row) -> float:
    x = np.asarray(row, dtype=float)
    if x.shape != model.weights.shape:
        raise ValueError(f"feature width {x.shape} != model width {model.weights.shape}")
    return float(x @ model.weights + model.bias)


def svm_predict(model: SvmModel, row) -> int:
    """1 iff w.x + b >= 0 (margin ties map to 1)."""
    return 1 if svm_decision(model, row) >= 0.0 else 0
