"""AdaBoost over depth-1 decision stumps (real-valued, SAMME.R style)."""

from typing import List, Optional

import numpy as np
from scipy.special import expit
from sklearn.tree import DecisionTreeClassifier

from .base import BaseClassifier

_PROB_EPS = 1e-10


class AdaBoostClassifier(BaseClassifier):
    """Each stump contributes half its class log-odds, scaled by the learning rate.

    Posterior = sigmoid(2 F(x)) where F is the sum of stump contributions.
    """

    name = "adaboost"

    def __init__(
        self, n_estimators: int = 50, learning_rate: float = 1.0, seed: Optional[int] = None
    ):
        super().__init__(seed)
        self.n_estimators = int(n_estimators)
        self.learning_rate = float(learning_rate)
        self.stumps_: List[DecisionTreeClassifier] = []

    def _stump_output(self, stump: DecisionTreeClassifier, X: np.ndarray) -> np.ndarray:
        proba = stump.predict_proba(X)
        if proba.shape[1] == 1:
            p1 = np.full(X.shape[0], float(stump.classes_[0] == 1))
        else:
            p1 = proba[:, list(stump.classes_).index(1)]
        p1 = np.clip(p1, _PROB_EPS, 1.0 - _PROB_EPS)
        return 0.5 * np.log(p1 / (1.0 - p1))

    def _fit(self, X, y):
        n = len(y)
        signs = np.where(y == 1, 1.0, -1.0)
        weights = np.full(n, 1.0 / n)
        rng = np.random.default_rng(self.seed)
        self.stumps_ = []
        for _ in range(self.n_estimators):
            stump = DecisionTreeClassifier(
                max_depth=1, random_state=int(rng.integers(0, 2**31 - 1))
            ).fit(X, y, sample_weight=weights)
            h = self.learning_rate * self._stump_output(stump, X)
            self.stumps_.append(stump)
            weights = weights * np.exp(-signs * h)
            total = weights.sum()
            if not np.isfinite(total) or total <= 0:
                break
            weights /= total

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        score = np.zeros(X.shape[0])
        for stump in self.stumps_:
            score += self.learning_rate * self._stump_output(stump, X)
        return score

    def _predict_proba(self, X):
        return expit(2.0 * self.decision_function(X))

    def _state(self):
        return {
            "n_estimators": len(self.stumps_),
            "learning_rate": self.learning_rate,
        }
