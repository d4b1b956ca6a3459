"""Hard-majority voting ensembles with first-member-priority tie-breaking."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .errors import SchemaMismatch, WidthMismatch


class Member(Protocol):
    n_features: int
    n_classes: int

    def predict(self, X: np.ndarray) -> np.ndarray: ...


@dataclass
class VotingEnsemble:
    members: list
    member_names: list[str]
    n_features: int
    n_classes: int
    task: str

    def predict(self, X: np.ndarray) -> np.ndarray:
        return vote(self, X)


def _compose(members: Sequence, names: Sequence[str], task: str) -> VotingEnsemble:
    if len(members) < 2:
        raise SchemaMismatch("an ensemble needs at least two members")
    widths = {m.n_features for m in members}
    classes = {m.n_classes for m in members}
    if len(widths) != 1 or len(classes) != 1:
        raise SchemaMismatch(
            f"members disagree on feature width {widths} or class count {classes}"
        )
    return VotingEnsemble(list(members), list(names), widths.pop(), classes.pop(), task)


def build_binary_hybrid(rf, gbm, svm, knn) -> VotingEnsemble:
    """Binary voting hybrid; ties fall to the earliest member in (rf, gbm, svm, knn)."""
    return _compose([rf, gbm, svm, knn], ["rf", "gbm", "svm", "knn"], "binary")


def build_multiclass_hybrid(rf, gbm, ada) -> VotingEnsemble:
    """Multiclass voting hybrid; ties fall to the earliest member in (rf, gbm, ada)."""
    return _compose([rf, gbm, ada], ["rf", "gbm", "ada"], "multiclass")


def mode_with_priority(votes: np.ndarray, n_classes: int) -> int:
    """Modal class of one vote vector; among tied classes, the earliest
    member whose vote is in the tied set decides."""
    counts = np.bincount(votes, minlength=n_classes)
    top = counts.max()
    tied = np.flatnonzero(counts == top)
    if tied.shape[0] == 1:
        return int(tied[0])
    tied_set = set(int(c) for c in tied)
    for v in votes:
        if int(v) in tied_set:
            return int(v)
    raise AssertionError("unreachable: some vote is always in the tied set")


def vote(ensemble: VotingEnsemble, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != ensemble.n_features:
        raise WidthMismatch(ensemble.n_features, X.shape[1] if X.ndim == 2 else -1)
    all_votes = np.stack([m.predict(X) for m in ensemble.members])  # members x rows
    return np.array(
        [mode_with_priority(all_votes[:, i], ensemble.n_classes) for i in range(X.shape[0])],
        dtype=np.int64,
    )
