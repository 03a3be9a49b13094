"""Base class for all fitted preprocessing steps."""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

import numpy as np

from ..classifiers.base import DimensionMismatchError


class FittedStep(ABC):
    """Abstract base class for workflow steps 1-8.

    Subclasses must implement:
    - kind: Step identifier used in describe() dumps
    - _fit(): learn state from training rows
    - _transform(): apply the learned state to any rows

    ``fit`` only ever sees training rows; ``transform`` never reads labels.
    """

    kind: str = "step"

    def __init__(self):
        self.n_features_in_: Optional[int] = None
        self.n_features_out_: Optional[int] = None

    @abstractmethod
    def _fit(self, X: np.ndarray, y: Optional[np.ndarray]) -> None:
        pass

    @abstractmethod
    def _transform(self, X: np.ndarray) -> np.ndarray:
        pass

    def fit(self, X: np.ndarray, y: Optional[np.ndarray] = None) -> "FittedStep":
        """Learn the step's state from training rows.

        Args:
            X: Training matrix (n_samples x n_features)
            y: Training labels, for supervised steps

        Returns:
            self
        """
        X = np.asarray(X, dtype=float)
        self.n_features_in_ = X.shape[1]
        self._fit(X, None if y is None else np.asarray(y))
        self.n_features_out_ = self._transform(X[:1]).shape[1]
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        if self.n_features_in_ is None:
            raise RuntimeError(f"{self.kind} step used before fit")
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise DimensionMismatchError(self.kind, self.n_features_in_, X.shape[-1])
        return self._transform(X)

    def fit_transform(self, X: np.ndarray, y: Optional[np.ndarray] = None) -> np.ndarray:
        return self.fit(X, y).transform(X)

    def _state(self) -> Dict[str, Any]:
        """Key learned state for describe(); subclasses extend."""
        return {}

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "n_features_in": self.n_features_in_,
            "n_features_out": self.n_features_out_,
            **self._state(),
        }

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}(in={self.n_features_in_}, out={self.n_features_out_})"
        )


class ColumnSelector(FittedStep):
    """A step whose learned state is a strictly increasing list of kept columns."""

    def __init__(self):
        super().__init__()
        self.kept_: np.ndarray = np.arange(0)
        self.fallback_: bool = False

    def _keep(self, mask: np.ndarray, fallback_index: Optional[int] = None) -> None:
        """Store the kept columns; an empty mask keeps ``fallback_index`` (or everything)."""
        kept = np.flatnonzero(mask)
        if kept.size == 0:
            self.fallback_ = True
            if fallback_index is None:
                kept = np.arange(mask.size)
            else:
                kept = np.array([int(fallback_index)])
        self.kept_ = kept.astype(np.int64)

    def _transform(self, X: np.ndarray) -> np.ndarray:
        return X[:, self.kept_]

    def _state(self) -> Dict[str, Any]:
        return {"kept": [int(i) for i in self.kept_], "fallback": self.fallback_}
