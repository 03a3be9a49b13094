"""Step 6: feature selection from a fitted model's coefficients or importances."""

import warnings
from typing import Optional

import numpy as np
from sklearn.ensemble import RandomForestClassifier
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import Lasso, LogisticRegression

from .base import ColumnSelector

SFM_MODELS = ("lasso", "logistic_regression", "random_forest")


class SelectFromModel(ColumnSelector):
    """Keep features the model finds important.

    - lasso: nonzero coefficients at penalty ``alpha``
    - logistic_regression: |coefficient| above the mean |coefficient|
    - random_forest: impurity importance above the mean importance

    An empty result keeps the single best feature (for lasso, the one most
    correlated with the centred labels, i.e. the first to enter the path).
    """

    kind = "select_from_model"

    def __init__(
        self,
        model: str = "lasso",
        alpha: float = 1.0,
        n_trees: int = 100,
        seed: Optional[int] = None,
    ):
        super().__init__()
        if model not in SFM_MODELS:
            raise ValueError(f"unknown selection model {model!r}")
        self.model = model
        self.alpha = float(alpha)
        self.n_trees = int(n_trees)
        self.seed = seed
        self.importances_ = np.zeros(0)

    def _fit(self, X, y):
        if y is None:
            raise ValueError("model-based selection needs training labels")
        y = y.astype(float)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", category=ConvergenceWarning)
            if self.model == "lasso":
                fitted = Lasso(alpha=self.alpha, max_iter=10_000).fit(X, y)
                self.importances_ = np.abs(fitted.coef_)
                mask = fitted.coef_ != 0
                fallback_scores = np.abs((X - X.mean(axis=0)).T @ (y - y.mean()))
            elif self.model == "logistic_regression":
                fitted = LogisticRegression(max_iter=1000).fit(X, y.astype(int))
                self.importances_ = np.abs(fitted.coef_.ravel())
                mask = self.importances_ > self.importances_.mean()
                fallback_scores = self.importances_
            else:
                fitted = RandomForestClassifier(
                    n_estimators=self.n_trees, random_state=self.seed, n_jobs=1
                ).fit(X, y.astype(int))
                self.importances_ = fitted.feature_importances_
                mask = self.importances_ > self.importances_.mean()
                fallback_scores = self.importances_
        self._keep(mask, fallback_index=int(np.argmax(fallback_scores)))

    def _state(self):
        state = super()._state()
        state["model"] = self.model
        if self.model == "lasso":
            state["alpha"] = self.alpha
        elif self.model == "random_forest":
            state["n_trees"] = self.n_trees
        return state
