"""Gradient-boosted trees: softmax objective, second-order leaf values,
L2 leaf regularization, and validation-loss early stopping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInput, EmptyValidation, WidthMismatch
from ..numerics import cross_entropy_mean, one_hot, softmax
from .tree import DecisionTree, TreeParams, fit_tree


@dataclass(frozen=True)
class GbmParams:
    max_rounds: int = 100
    learning_rate: float = 0.1
    max_depth: int = 6
    min_samples_leaf: int = 1
    leaf_l2: float = 1.0
    patience: int = 5


@dataclass
class TrainCurve:
    train_loss: list[float]
    val_loss: list[float]
    stopped_at: int

    def to_csv(self) -> str:
        lines = ["round,train_loss,val_loss"]
        for r, (tl, vl) in enumerate(zip(self.train_loss, self.val_loss)):
            lines.append(f"{r},{tl!r},{vl!r}")
        return "\n".join(lines) + "\n"


@dataclass
class GbmModel:
    rounds: list[list[DecisionTree]]  # per round, one score tree per class
    learning_rate: float
    best_round: int
    n_classes: int
    n_features: int
    params: GbmParams

    def predict(self, X: np.ndarray) -> np.ndarray:
        return predict_gbm(self, X)[0]


def _newton_leaf_scores(tree: DecisionTree, leaves: np.ndarray, g: np.ndarray, h: np.ndarray, l2: float) -> None:
    """Overwrite each leaf's score with -sum(g)/(sum(h) + l2) over its rows."""
    n_nodes = tree.n_nodes
    g_sum = np.bincount(leaves, weights=g, minlength=n_nodes)
    h_sum = np.bincount(leaves, weights=h, minlength=n_nodes)
    denom = h_sum + l2
    # internal nodes (and all-zero-Hessian leaves at l2=0) carry no step
    safe = np.where(denom == 0.0, 1.0, denom)
    tree.leaf_score = np.where(denom == 0.0, 0.0, -g_sum / safe)


def fit_gbm(
    X: np.ndarray,
    y: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    params: GbmParams = GbmParams(),
) -> tuple[GbmModel, TrainCurve]:
    """Boost one regression tree per class per round on the softmax gradient.

    Per round and class, with current probabilities p: gradient g = p - y,
    Hessian h = p(1 - p); the tree structure is fit to -g with squared-error
    splits and its leaves replaced by the Newton step -sum(g)/(sum(h)+l2),
    scaled into the scores by the learning rate.  Train/validation mean
    cross-entropy is recorded each round; training stops once validation
    loss has not improved for `patience` rounds, and prediction uses rounds
    0..best_round only.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    X_val = np.asarray(X_val, dtype=float)
    y_val = np.asarray(y_val, dtype=np.int64)
    if X.shape[0] == 0:
        raise EmptyInput("fit_gbm needs at least one training row")
    if X_val.shape[0] == 0:
        raise EmptyValidation("early stopping needs a non-empty validation set")

    n, d = X.shape
    n_classes = int(max(y.max(), y_val.max())) + 1
    Y = one_hot(y, n_classes)
    F_train = np.zeros((n, n_classes))
    F_val = np.zeros((X_val.shape[0], n_classes))
    tree_params = TreeParams(
        max_depth=params.max_depth,
        min_samples_leaf=params.min_samples_leaf,
        task="regression",
    )

    rounds: list[list[DecisionTree]] = []
    train_losses: list[float] = []
    val_losses: list[float] = []
    best_round = 0
    best_val = np.inf
    stopped_at = 0
    for r in range(params.max_rounds):
        P = softmax(F_train)
        round_trees: list[DecisionTree] = []
        for c in range(n_classes):
            g = P[:, c] - Y[:, c]
            h = P[:, c] * (1.0 - P[:, c])
            tree = fit_tree(X, -g, None, tree_params)
            leaves = tree.apply(X)
            _newton_leaf_scores(tree, leaves, g, h, params.leaf_l2)
            F_train[:, c] += params.learning_rate * tree.leaf_score[leaves]
            F_val[:, c] += params.learning_rate * tree.leaf_score[tree.apply(X_val)]
            round_trees.append(tree)
        rounds.append(round_trees)

        train_losses.append(cross_entropy_mean(softmax(F_train), y))
        val_losses.append(cross_entropy_mean(softmax(F_val), y_val))
        stopped_at = r
        if val_losses[-1] < best_val:
            best_val = val_losses[-1]
            best_round = r
        if r - best_round >= params.patience:
            break

    model = GbmModel(rounds, params.learning_rate, best_round, n_classes, d, params)
    return model, TrainCurve(train_losses, val_losses, stopped_at)


def predict_gbm(model: GbmModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(labels, probabilities): softmax over scores accumulated through
    best_round; a zero-round model yields the uniform distribution."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise WidthMismatch(model.n_features, X.shape[1] if X.ndim == 2 else -1)
    F = np.zeros((X.shape[0], model.n_classes))
    for round_trees in model.rounds[: model.best_round + 1]:
        for c, tree in enumerate(round_trees):
            F[:, c] += model.learning_rate * tree.leaf_score[tree.apply(X)]
    probs = softmax(F)
    return np.argmax(probs, axis=1), probs
