"""Step 4: robust z-scoring."""

import numpy as np

from .base import FittedStep

LOWER_PERCENTILE = 5.0
UPPER_PERCENTILE = 95.0
MIN_STD = 1e-12


class RobustZScore(FittedStep):
    """z-score with mean/std estimated on the 5th-95th percentile band of training values.

    Percentiles use linear interpolation and the band is inclusive at both ends.
    Features with std below 1e-12 map to 0.
    """

    kind = "robust_zscore"

    def __init__(self):
        super().__init__()
        self.mean_ = np.zeros(0)
        self.std_ = np.zeros(0)

    def _fit(self, X, y):
        lower, upper = np.percentile(
            X, [LOWER_PERCENTILE, UPPER_PERCENTILE], axis=0, method="linear"
        )
        inside = (X >= lower) & (X <= upper)
        # Tiny columns (e.g. two distinct values) can have no value inside the band.
        inside[:, inside.sum(axis=0) == 0] = True
        counts = inside.sum(axis=0)
        self.mean_ = np.where(inside, X, 0.0).sum(axis=0) / counts
        centered = np.where(inside, X - self.mean_, 0.0)
        self.std_ = np.sqrt((centered**2).sum(axis=0) / counts)

    def _transform(self, X):
        flat = self.std_ < MIN_STD
        safe_std = np.where(flat, 1.0, self.std_)
        out = (X - self.mean_) / safe_std
        out[:, flat] = 0.0
        return out

    def _state(self):
        return {"n_constant": int((self.std_ < MIN_STD).sum())}
