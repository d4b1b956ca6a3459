"""Central-difference verification of every parameter gradient."""

from __future__ import annotations

import numpy as np

from .network import Network


def grad_check(network: Network, X_small: np.ndarray, y_small: np.ndarray, h: float = 1e-4) -> float:
    """Max over parameters of |analytic - numeric| / max(1, |analytic| + |numeric|).

    Runs entirely in evaluation mode: dropout off, batch norm frozen on its
    running statistics, so the loss is a deterministic function of the
    parameters and central differences are well-defined.
    """
    loss0, grads = network.loss_and_gradients(X_small, y_small, training=False)
    del loss0
    worst = 0.0
    for (i, name, value), analytic in zip(network.parameters(), grads):
        flat = value.ravel()
        a_flat = analytic.ravel()
        for j in range(flat.shape[0]):
            original = flat[j]
            flat[j] = original + h
            hi = network.loss(X_small, y_small, training=False)
            flat[j] = original - h
            lo = network.loss(X_small, y_small, training=False)
            flat[j] = original
            numeric = (hi - lo) / (2.0 * h)
            denom = max(1.0, abs(a_flat[j]) + abs(numeric))
            worst = max(worst, abs(a_flat[j] - numeric) / denom)
    return worst
