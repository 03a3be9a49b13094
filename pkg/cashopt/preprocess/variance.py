"""Step 3: drop near-constant features."""

import numpy as np

from .base import ColumnSelector

VARIANCE_THRESHOLD = 0.01


class VarianceThreshold(ColumnSelector):
    """Remove features whose population variance on training rows is below 0.01.

    If every feature would go, the highest-variance one is kept.
    """

    kind = "variance_threshold"

    def __init__(self, threshold: float = VARIANCE_THRESHOLD):
        super().__init__()
        self.threshold = float(threshold)
        self.variances_ = np.zeros(0)

    def _fit(self, X, y):
        self.variances_ = X.var(axis=0)
        fallback = int(np.argmax(self.variances_))
        self._keep(self.variances_ >= self.threshold, fallback_index=fallback)

    def _state(self):
        state = super()._state()
        state["threshold"] = self.threshold
        return state
