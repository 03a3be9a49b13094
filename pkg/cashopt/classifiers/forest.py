"""Random forest of CART trees on bootstrap samples."""

from typing import Optional

from sklearn.ensemble import RandomForestClassifier

from .base import BaseClassifier


class RandomForest(BaseClassifier):
    """sqrt(p) feature subsampling per split; probability = mean leaf class fraction."""

    name = "random_forest"

    def __init__(
        self,
        n_estimators: int = 100,
        min_samples_split: int = 2,
        max_depth: Optional[int] = None,
        seed: Optional[int] = None,
    ):
        super().__init__(seed)
        self.n_estimators = int(n_estimators)
        self.min_samples_split = int(min_samples_split)
        self.max_depth = max_depth
        self._forest: Optional[RandomForestClassifier] = None

    def _fit(self, X, y):
        # Parallelism lives at the workflow level.
        self._forest = RandomForestClassifier(
            n_estimators=self.n_estimators,
            min_samples_split=self.min_samples_split,
            max_depth=self.max_depth,
            max_features="sqrt",
            bootstrap=True,
            random_state=self.seed,
            n_jobs=1,
        ).fit(X, y)

    def _predict_proba(self, X):
        proba = self._forest.predict_proba(X)
        return proba[:, list(self._forest.classes_).index(1)]

    @property
    def feature_importances_(self):
        return self._forest.feature_importances_

    def _state(self):
        return {
            "n_estimators": self.n_estimators,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
        }
