"""Gaussian naive Bayes."""

from typing import Optional

import numpy as np
from sklearn.naive_bayes import GaussianNB

from .base import BaseClassifier

# Keeps per-class variances positive when regularisation is 0.
MIN_VAR_SMOOTHING = 1e-9


class GaussianNBClassifier(BaseClassifier):
    """Variance smoothing = ``var_smoothing`` x the largest feature variance.

    A training matrix with no variance at all yields the class-1 prior.
    """

    name = "gaussian_nb"

    def __init__(self, var_smoothing: float = 1e-9, seed: Optional[int] = None):
        super().__init__(seed)
        self.var_smoothing = float(var_smoothing)
        self._model: Optional[GaussianNB] = None
        self.prior_ = 0.5

    def _fit(self, X, y):
        self.prior_ = float(y.mean())
        if X.var(axis=0).max() <= 0:
            self._model = None
            return
        self._model = GaussianNB(var_smoothing=max(self.var_smoothing, MIN_VAR_SMOOTHING)).fit(X, y)

    def _predict_proba(self, X):
        if self._model is None:
            return np.full(X.shape[0], self.prior_)
        return self._model.predict_proba(X)[:, list(self._model.classes_).index(1)]

    def _state(self):
        return {"var_smoothing": self.var_smoothing, "degenerate": self._model is None}
