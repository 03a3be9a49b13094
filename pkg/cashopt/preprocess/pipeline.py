"""A complete workflow (steps 1-10) built from one WorkflowConfig."""

import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..classifiers import BaseClassifier, ClassifierConfig, build_classifier
from ..resampling import ResamplePlan, plan_from_config, resample
from ..search_space import (
    CLASSIFICATION,
    GROUPWISE,
    IMPUTATION,
    PCA,
    RELIEF,
    SELECT_FROM_MODEL,
    UNIVARIATE,
    VARIANCE,
    WorkflowConfig,
)
from .base import FittedStep
from .groupwise import GroupwiseSelector
from .impute import Imputer
from .model_selection import SelectFromModel
from .pca import PCAStep
from .relief import ReliefSelector
from .scaling import RobustZScore
from .univariate import UnivariateSelector
from .variance import VarianceThreshold

logger = logging.getLogger(__name__)


def component_seeds(rng_seed: int) -> Dict[str, int]:
    """Independent seeds for the stochastic components of one workflow."""
    state = np.random.SeedSequence(rng_seed).generate_state(4)
    return {
        "relief": int(state[0]),
        "select_from_model": int(state[1]),
        "resampling": int(state[2]),
        "classifier": int(state[3]),
    }


def build_steps(config: WorkflowConfig, group_tags: Sequence[str]) -> List[FittedStep]:
    """Unfitted steps 1-8 in workflow order; inactive optional steps are left out."""
    seeds = component_seeds(config.rng_seed)
    steps: List[FittedStep] = []

    if config.is_active(GROUPWISE):
        steps.append(GroupwiseSelector(group_tags, config.step(GROUPWISE).params))

    imputation = config.step(IMPUTATION)
    steps.append(
        Imputer(imputation.algorithm, imputation.params.get("n_neighbors", 5))
    )

    if config.is_active(VARIANCE):
        steps.append(VarianceThreshold())

    steps.append(RobustZScore())

    if config.is_active(RELIEF):
        p = config.step(RELIEF).params
        steps.append(
            ReliefSelector(
                n_neighbors=p["n_neighbors"],
                sample_size=p["sample_size"],
                distance_p=p["distance_p"],
                n_features=p["n_features"],
                seed=seeds["relief"],
            )
        )

    if config.is_active(SELECT_FROM_MODEL):
        sfm = config.step(SELECT_FROM_MODEL)
        steps.append(
            SelectFromModel(
                model=sfm.algorithm,
                alpha=sfm.params.get("alpha", 1.0),
                n_trees=sfm.params.get("n_trees", 100),
                seed=seeds["select_from_model"],
            )
        )

    if config.is_active(PCA):
        steps.append(PCAStep(config.step(PCA).algorithm))

    if config.is_active(UNIVARIATE):
        steps.append(UnivariateSelector(config.step(UNIVARIATE).params["threshold"]))

    return steps


class WorkflowPipeline:
    """Preprocessing, resampling and classifier fitted together on training rows."""

    def __init__(self, config: WorkflowConfig, group_tags: Sequence[str]):
        self.config = config
        self.group_tags = tuple(group_tags)
        self.steps: List[FittedStep] = []
        self.classifier: Optional[BaseClassifier] = None
        self.resample_plan: Optional[ResamplePlan] = None
        self.resample_note: Optional[str] = None
        self.n_train_rows_: Optional[int] = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "WorkflowPipeline":
        """Fit every step on the training rows only.

        Raises:
            Exception: Anything a step or the classifier raises; random search
                catches these and scores the workflow as failed.
        """
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        self.steps = build_steps(self.config, self.group_tags)
        for step in self.steps:
            X = step.fit_transform(X, y)

        seeds = component_seeds(self.config.rng_seed)
        self.resample_plan = plan_from_config(self.config, seeds["resampling"])
        if self.resample_plan is not None:
            X, y, self.resample_note = resample(X, y, self.resample_plan)
        self.n_train_rows_ = len(y)

        classification = self.config.step(CLASSIFICATION)
        self.classifier = build_classifier(
            ClassifierConfig(
                choice=classification.algorithm,
                params=classification.params,
                seed=seeds["classifier"],
            )
        )
        self.classifier.fit(X, y)
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        """Apply the fitted steps 1-8 (never resampling) to any rows."""
        X = np.asarray(X, dtype=float)
        for step in self.steps:
            X = step.transform(X)
        return X

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        if self.classifier is None:
            raise RuntimeError("workflow used before fit")
        return self.classifier.predict_proba(self.transform(X))

    def predict(self, X: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        return (self.predict_proba(X) >= threshold).astype(np.int64)

    @property
    def n_features_out(self) -> Optional[int]:
        return self.steps[-1].n_features_out_ if self.steps else None

    def describe(self) -> Dict[str, Any]:
        return {
            "steps": [step.describe() for step in self.steps],
            "resampling": (
                None
                if self.resample_plan is None
                else {
                    "method": self.resample_plan.label,
                    "strategy": self.resample_plan.strategy,
                    "n_train_rows": self.n_train_rows_,
                    "note": self.resample_note,
                }
            ),
            "classifier": self.classifier.describe() if self.classifier else None,
        }
