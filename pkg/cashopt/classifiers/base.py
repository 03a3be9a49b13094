"""Base class for all workflow classifiers (step 10)."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional

import numpy as np


class DimensionMismatchError(ValueError):
    """Raised when a fitted step or classifier sees the wrong number of features."""

    def __init__(self, component: str, expected: int, got: int):
        self.component = component
        self.expected = expected
        self.got = got
        super().__init__(f"{component}: fitted on {expected} features, got {got}")


@dataclass(frozen=True)
class ClassifierConfig:
    """Classifier choice, its Table-style settings and the seed for its randomness."""

    choice: str
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0


class BaseClassifier(ABC):
    """Abstract base class for binary classifiers.

    Subclasses must implement:
    - name: Classifier identifier
    - _fit(): training on a complete numeric matrix with 0/1 labels
    - _predict_proba(): posterior probability of class 1 per row
    """

    name: str = "classifier"

    def __init__(self, seed: Optional[int] = None):
        self.seed = seed
        self.n_features_in_: Optional[int] = None
        self.converged_: bool = True

    @abstractmethod
    def _fit(self, X: np.ndarray, y: np.ndarray) -> None:
        pass

    @abstractmethod
    def _predict_proba(self, X: np.ndarray) -> np.ndarray:
        pass

    def fit(self, X: np.ndarray, y: np.ndarray) -> "BaseClassifier":
        """Train on ``X`` with labels ``y``.

        Raises:
            ValueError: If the input holds NaN/inf or only one class.
        """
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if not np.isfinite(X).all():
            raise ValueError(f"{self.name}: training matrix contains non-finite values")
        if np.unique(y).size != 2:
            raise ValueError(f"{self.name}: training labels must contain both classes")
        self.n_features_in_ = X.shape[1]
        self._fit(X, y)
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Posterior probability of class 1, one value in [0, 1] per row.

        Raises:
            DimensionMismatchError: If the feature count differs from training.
        """
        if self.n_features_in_ is None:
            raise RuntimeError(f"{self.name} used before fit")
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise DimensionMismatchError(self.name, self.n_features_in_, X.shape[-1])
        return np.clip(self._predict_proba(X), 0.0, 1.0)

    def predict(self, X: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        return (self.predict_proba(X) >= threshold).astype(np.int64)

    def _state(self) -> Dict[str, Any]:
        return {}

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.name,
            "n_features_in": self.n_features_in_,
            "converged": self.converged_,
            **self._state(),
        }

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name={self.name})"
