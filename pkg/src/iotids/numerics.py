"""Small shared numeric kernels (stable softmax, one-hot, cross-entropy)."""

from __future__ import annotations

import numpy as np

PROB_FLOOR = 1e-12


def softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max-subtraction for overflow stability."""
    z = np.asarray(z, dtype=float)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def one_hot(y: np.ndarray, n_classes: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    out = np.zeros((y.shape[0], n_classes))
    out[np.arange(y.shape[0]), y] = 1.0
    return out


def cross_entropy_mean(probs: np.ndarray, y: np.ndarray) -> float:
    """Mean -log p(true class), with p floored at 1e-12 before the log."""
    p_true = probs[np.arange(probs.shape[0]), np.asarray(y, dtype=np.int64)]
    return float(-np.log(np.maximum(p_true, PROB_FLOOR)).mean())
