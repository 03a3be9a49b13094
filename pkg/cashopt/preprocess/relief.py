"""Step 5: ReliefF feature ranking."""

from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from .base import ColumnSelector


def relieff_weights(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    n_neighbors: int,
    distance_p: float,
) -> np.ndarray:
    """ReliefF weights accumulated over the given reference rows.

    For each reference row the ``n_neighbors`` nearest hits (same class, row itself
    excluded) and misses (other class) under the Minkowski distance are found;
    weight += mean |diff to misses| - mean |diff to hits|, averaged over rows.
    """
    weights = np.zeros(X.shape[1])
    if rows.size == 0:
        return weights
    distances = cdist(X[rows], X, metric="minkowski", p=float(distance_p))
    for r, i in enumerate(rows):
        d = distances[r].copy()
        d[i] = np.inf
        same = np.flatnonzero(y == y[i])
        same = same[same != i]
        other = np.flatnonzero(y != y[i])
        # Stable sort keeps the lower index first on equal distances.
        hits = same[np.argsort(d[same], kind="stable")[:n_neighbors]]
        misses = other[np.argsort(d[other], kind="stable")[:n_neighbors]]
        if misses.size:
            weights += np.abs(X[misses] - X[i]).mean(axis=0)
        if hits.size:
            weights -= np.abs(X[hits] - X[i]).mean(axis=0)
    return weights / rows.size


class ReliefSelector(ColumnSelector):
    """Keep the ``n_features`` highest-weighted features (clamped to the available count)."""

    kind = "relief"

    def __init__(
        self,
        n_neighbors: int = 3,
        sample_size: float = 0.85,
        distance_p: int = 2,
        n_features: int = 20,
        seed: Optional[int] = None,
    ):
        super().__init__()
        self.n_neighbors = int(n_neighbors)
        self.sample_size = float(sample_size)
        self.distance_p = int(distance_p)
        self.n_features = int(n_features)
        self.seed = seed
        self.weights_ = np.zeros(0)

    def _fit(self, X, y):
        if y is None:
            raise ValueError("RELIEF needs training labels")
        n = X.shape[0]
        m = min(n, max(1, int(round(self.sample_size * n))))
        rng = np.random.default_rng(self.seed)
        rows = np.sort(rng.choice(n, size=m, replace=False))
        self.weights_ = relieff_weights(X, y, rows, self.n_neighbors, self.distance_p)
        n_keep = min(self.n_features, X.shape[1])
        order = np.argsort(-self.weights_, kind="stable")
        mask = np.zeros(X.shape[1], dtype=bool)
        mask[order[:n_keep]] = True
        self._keep(mask)

    def _state(self):
        state = super()._state()
        state.update(
            n_neighbors=self.n_neighbors,
            sample_size=self.sample_size,
            distance_p=self.distance_p,
        )
        return state
