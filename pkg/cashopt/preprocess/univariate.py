"""Step 8: univariate Mann-Whitney U filtering."""

import numpy as np
from scipy.stats import mannwhitneyu

from .base import ColumnSelector

# Per-group size from which the normal approximation replaces exact enumeration.
ASYMPTOTIC_MIN_GROUP = 8


def mann_whitney_pvalues(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Two-sided Mann-Whitney U p-value per feature column.

    Normal approximation with continuity and tie correction when both groups have
    at least 8 samples, exact distribution otherwise. Columns constant over all
    rows get p = 1.
    """
    positives, negatives = X[y == 1], X[y == 0]
    if min(len(positives), len(negatives)) >= ASYMPTOTIC_MIN_GROUP:
        method = "asymptotic"
    else:
        method = "exact"
    with np.errstate(divide="ignore", invalid="ignore"):
        result = mannwhitneyu(
            positives,
            negatives,
            alternative="two-sided",
            use_continuity=True,
            method=method,
            axis=0,
        )
    pvalues = np.nan_to_num(np.asarray(result.pvalue, dtype=float), nan=1.0)
    pvalues[np.ptp(X, axis=0) == 0] = 1.0
    return np.clip(pvalues, 0.0, 1.0)


class UnivariateSelector(ColumnSelector):
    """Keep features with p < threshold; otherwise the single smallest-p feature."""

    kind = "univariate"

    def __init__(self, threshold: float = 0.001):
        super().__init__()
        self.threshold = float(threshold)
        self.pvalues_ = np.zeros(0)

    def _fit(self, X, y):
        if y is None:
            raise ValueError("univariate testing needs training labels")
        self.pvalues_ = mann_whitney_pvalues(X, y)
        self._keep(self.pvalues_ < self.threshold, fallback_index=int(np.argmin(self.pvalues_)))

    def _state(self):
        state = super()._state()
        state["threshold"] = self.threshold
        return state
