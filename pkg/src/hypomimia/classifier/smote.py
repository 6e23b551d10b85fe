"""Synthetic minority oversampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..numcore import RandomStream


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    rng: RandomStream = field(default_factory=lambda: RandomStream(0))


def nearest_neighbors(X, k):
    """Indices of the ``k`` nearest other rows of ``X`` (Euclidean, ties by index)."""
    sq = np.sum(X * X, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.fill_diagonal(d2, np.inf)
    return np.argsort(d2, axis=1, kind="stable")[:, :k]


def smote(minority, n_synthetic, config=SmoteConfig()):
    """Interpolate ``n_synthetic`` new points between minority-class neighbours.

    Each synthetic point is ``x + lam * (nn - x)`` for a uniformly chosen
    minority row ``x``, one of its ``k`` nearest minority neighbours ``nn``
    and ``lam`` uniform on [0, 1).

    Returns
    -------
    synthetic : ndarray, shape (n_synthetic, d)
    pairs : ndarray, shape (n_synthetic, 2)
        Row indices ``(x, nn)`` into ``minority`` that generated each point.
    """
    X = np.asarray(minority, dtype=float)
    if X.ndim != 2:
        raise ConfigError("minority samples must be a 2-D array")
    k = config.k_neighbors
    if k < 1 or X.shape[0] <= k:
        raise ConfigError(f"SMOTE needs more than k={k} minority samples, got {X.shape[0]}")
    if n_synthetic <= 0:
        return np.empty((0, X.shape[1])), np.empty((0, 2), dtype=int)
    nn = nearest_neighbors(X, k)
    g = config.rng.generator()
    base = g.integers(0, X.shape[0], size=n_synthetic)
    which = g.integers(0, k, size=n_synthetic)
    lam = g.random(n_synthetic)[:, None]
    other = nn[base, which]
    a, b = X[base], X[other]
    out = a + lam * (b - a)
    # rounding must not push a point past either end of its segment
    out = np.clip(out, np.minimum(a, b), np.maximum(a, b))
    return out, np.column_stack([base, other])


def balance(X, y, config=SmoteConfig()):
    """Oversample the smaller class of boolean labels ``y`` up to the larger one.

    Returns ``(X_aug, y_aug, synthetic_mask)`` with the originals first.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=bool)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    minority_label = n_pos < n_neg
    n_new = abs(n_neg - n_pos)
    if n_new == 0:
        return X.copy(), y.copy(), np.zeros(y.size, dtype=bool)
    synth, _ = smote(X[y == minority_label], n_new, config)
    X_aug = np.vstack([X, synth])
    y_aug = np.concatenate([y, np.full(n_new, minority_label)])
    flags = np.concatenate([np.zeros(y.size, dtype=bool), np.ones(n_new, dtype=bool)])
    return X_aug, y_aug, flags
