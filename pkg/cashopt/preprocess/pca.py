"""Step 7: principal component projection."""

import numpy as np
from sklearn.decomposition import PCA

from .base import FittedStep

PCA_VARIANTS = {"var95": 0.95, "n10": 10, "n50": 50, "n100": 100}
# Cumulative ratios this close below the target count as reaching it.
RATIO_TOLERANCE = 1e-9


def smallest_k(X: np.ndarray, target: float, rank: int) -> int:
    """Smallest k whose cumulative explained variance ratio is at least ``target``."""
    full = PCA(svd_solver="full").fit(X)
    cumulative = np.cumsum(full.explained_variance_ratio_)
    k = int(np.searchsorted(cumulative, target - RATIO_TOLERANCE)) + 1
    return min(k, rank)


class PCAStep(FittedStep):
    """Project onto the leading principal components of the training covariance.

    ``var95`` keeps the smallest k whose cumulative explained variance is at
    least 0.95; fixed variants keep min(requested, rank) components.
    """

    kind = "pca"

    def __init__(self, variant: str = "var95"):
        super().__init__()
        if variant not in PCA_VARIANTS:
            raise ValueError(f"unknown PCA variant {variant!r}")
        self.variant = variant
        self._pca = None

    def _fit(self, X, y):
        rank = int(np.linalg.matrix_rank(X - X.mean(axis=0))) if X.shape[0] > 1 else 0
        requested = PCA_VARIANTS[self.variant]
        if rank == 0:
            n_components = 1
        elif isinstance(requested, float):
            n_components = smallest_k(X, requested, rank)
        else:
            n_components = min(requested, rank)
        self._pca = PCA(n_components=n_components, svd_solver="full").fit(X)

    def _transform(self, X):
        return self._pca.transform(X)

    def _state(self):
        ratio = self._pca.explained_variance_ratio_ if self._pca is not None else []
        return {
            "variant": self.variant,
            "explained_variance": float(np.nan_to_num(np.sum(ratio))),
        }
