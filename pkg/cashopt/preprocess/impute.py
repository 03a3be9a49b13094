"""Step 2: missing-value imputation fitted on training rows only."""

from typing import Any, Dict

import numpy as np
from sklearn.impute import KNNImputer, SimpleImputer

from .base import FittedStep

IMPUTATION_METHODS = ("mean", "median", "mode", "constant_zero", "knn")

_SIMPLE_STRATEGIES = {
    "mean": {"strategy": "mean"},
    "median": {"strategy": "median"},
    "mode": {"strategy": "most_frequent"},
    "constant_zero": {"strategy": "constant", "fill_value": 0.0},
}


class Imputer(FittedStep):
    """Fill NaN cells with per-feature training statistics or KNN averages.

    Features with no observed training value are filled with 0. KNN uses the
    NaN-aware Euclidean distance over coordinates observed in both rows and
    averages the ``n_neighbors`` nearest training rows that observe the feature.
    """

    kind = "imputation"

    def __init__(self, method: str = "mean", n_neighbors: int = 5):
        super().__init__()
        if method not in IMPUTATION_METHODS:
            raise ValueError(f"unknown imputation method {method!r}")
        self.method = method
        self.n_neighbors = int(n_neighbors)
        self._imputer = None

    def _fit(self, X, y):
        if self.method == "knn":
            self._imputer = KNNImputer(n_neighbors=self.n_neighbors, keep_empty_features=True)
        else:
            self._imputer = SimpleImputer(
                missing_values=np.nan, keep_empty_features=True, **_SIMPLE_STRATEGIES[self.method]
            )
        self._imputer.fit(X)

    def _transform(self, X):
        if not np.isnan(X).any():
            return X.copy()
        out = self._imputer.transform(X)
        # Features that were fully missing in training come back as 0 already;
        # anything KNN could not reach (no donors) falls back to 0 as well.
        return np.nan_to_num(out, nan=0.0)

    def _state(self) -> Dict[str, Any]:
        state: Dict[str, Any] = {"method": self.method}
        if self.method == "knn":
            state["n_neighbors"] = self.n_neighbors
        elif self._imputer is not None:
            state["fill_values"] = [float(v) for v in np.nan_to_num(self._imputer.statistics_)]
        return state
