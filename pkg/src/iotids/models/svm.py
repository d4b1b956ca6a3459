"""Linear support-vector classifier trained by seeded stochastic subgradient
descent on the primal hinge objective (1/2)||w||^2 + C * sum hinge_i."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SingleClass, WidthMismatch


@dataclass(frozen=True)
class SvmParams:
    C: float = 1.0
    epochs: int = 20
    lr0: float = 0.1
    decay: float = 0.01
    seed: int = 0


@dataclass
class SvmModel:
    w: np.ndarray
    b: float
    C: float
    epochs_trained: int

    def decision(self, X: np.ndarray) -> np.ndarray:
        return predict_svm(self, X)[1]


def svm_objective(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, C: float) -> float:
    margins = y * (X @ w + b)
    return float(0.5 * (w @ w) + C * np.maximum(0.0, 1.0 - margins).sum())


def fit_linear_svm(X: np.ndarray, y: np.ndarray, params: SvmParams = SvmParams()) -> SvmModel:
    """SGD over per-sample subgradients with step lr0 / (1 + t * decay).

    y must be in {-1, +1}.  Row visit order reshuffles each epoch from the
    seeded generator, so training is reproducible and order-contractual.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if set(np.unique(y)) != {-1.0, 1.0}:
        raise SingleClass("labels must contain both -1 and +1")

    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    t = 0
    rng = np.random.default_rng(params.seed)
    for _ in range(params.epochs):
        for i in rng.permutation(n):
            eta = params.lr0 / (1.0 + t * params.decay)
            t += 1
            if y[i] * (X[i] @ w + b) < 1.0:
                w = (1.0 - eta) * w + eta * params.C * y[i] * X[i]
                b = b + eta * params.C * y[i]
            else:
                w = (1.0 - eta) * w
    return SvmModel(w, b, params.C, params.epochs)


def predict_svm(model: SvmModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(labels in {-1,+1}, margins); a zero margin classifies as +1."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.w.shape[0]:
        raise WidthMismatch(model.w.shape[0], X.shape[1] if X.ndim == 2 else -1)
    margins = X @ model.w + model.b
    labels = np.where(margins >= 0.0, 1, -1)
    return labels, margins


@dataclass
class SvmClassifier:
    """Class-index view of an SvmModel: class 1 on non-negative margin."""

    model: SvmModel

    @property
    def n_features(self) -> int:
        return self.model.w.shape[0]

    n_classes: int = 2

    def predict(self, X: np.ndarray) -> np.ndarray:
        labels, _ = predict_svm(self.model, X)
        return ((labels + 1) // 2).astype(np.int64)
