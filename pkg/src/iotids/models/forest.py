"""Random forest: bagged CART trees with per-split feature subsampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInput, WidthMismatch
from .tree import DecisionTree, TreeParams, fit_tree


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    features_per_split: int | None = None  # default ceil(sqrt(d))
    bootstrap: bool = True
    seed: int = 0


@dataclass
class ForestModel:
    trees: list[DecisionTree]
    tree_seeds: list[list[int]]
    features_per_split: int
    n_classes: int
    n_features: int
    params: ForestParams

    def predict(self, X: np.ndarray) -> np.ndarray:
        return predict_forest(self, X)[0]


def fit_random_forest(
    X: np.ndarray,
    y: np.ndarray,
    params: ForestParams = ForestParams(),
    bootstrap_indices: list[np.ndarray] | None = None,
) -> ForestModel:
    """Train n_trees CARTs on seeded bootstrap samples.

    Per-tree rngs derive from [seed, tree_index], so bootstraps and per-split
    feature draws are independent of row order and of the other trees.
    bootstrap_indices, when given, overrides the seeded draw (one index array
    per tree); used to pin samples in tests.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise EmptyInput("fit_random_forest needs at least one row")
    if params.n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    n, d = X.shape
    n_classes = int(y.max()) + 1
    mtry = params.features_per_split if params.features_per_split is not None else math.ceil(math.sqrt(d))
    mtry = min(mtry, d)

    trees: list[DecisionTree] = []
    tree_seeds: list[list[int]] = []
    tree_params = TreeParams(
        max_depth=params.max_depth,
        min_samples_leaf=params.min_samples_leaf,
        task="classification",
        n_classes=n_classes,
    )
    for t in range(params.n_trees):
        seed_key = [params.seed, t]
        # independent streams so injected bootstraps leave split draws intact
        bootstrap_rng = np.random.default_rng(seed_key + [0])
        split_rng = np.random.default_rng(seed_key + [1])
        if bootstrap_indices is not None:
            idx = np.asarray(bootstrap_indices[t], dtype=np.int64)
        elif params.bootstrap:
            idx = bootstrap_rng.integers(0, n, size=n)
        else:
            idx = np.arange(n)
        trees.append(
            fit_tree(X[idx], y[idx], None, tree_params, rng=split_rng, features_per_split=mtry)
        )
        tree_seeds.append(seed_key)

    return ForestModel(trees, tree_seeds, mtry, n_classes, d, params)


def predict_forest(model: ForestModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(labels, vote shares); label = modal tree vote, ties to the lowest class."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise WidthMismatch(model.n_features, X.shape[1] if X.ndim == 2 else -1)
    votes = np.zeros((X.shape[0], model.n_classes))
    for tree in model.trees:
        pred = tree.predict(X)
        votes[np.arange(X.shape[0]), pred] += 1.0
    shares = votes / len(model.trees)
    return np.argmax(shares, axis=1), shares
