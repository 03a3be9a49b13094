"""Step 9: training-set resampling for class imbalance.

Six families backed by imbalanced-learn: random under/over-sampling, NearMiss
(version 1), neighbourhood cleaning, SMOTE (regular, borderline, +Tomek, +ENN)
and ADASYN. Only ever applied to the rows a workflow is trained on.

Strategies name which classes are resampled: ``minority``, ``not_minority``,
``majority``, ``not_majority``, ``all``. Undersamplers cannot use ``minority``,
oversamplers cannot use ``majority``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from imblearn.combine import SMOTEENN, SMOTETomek
from imblearn.over_sampling import ADASYN, SMOTE, BorderlineSMOTE, RandomOverSampler
from imblearn.under_sampling import NearMiss, NeighbourhoodCleaningRule, RandomUnderSampler

from .search_space import (
    OVERSAMPLING_STRATEGIES,
    RESAMPLING,
    RESAMPLING_METHODS,
    SMOTE_KINDS,
    UNDERSAMPLING_STRATEGIES,
    WorkflowConfig,
)

logger = logging.getLogger(__name__)

UNDERSAMPLERS = ("random_under", "near_miss", "neighborhood_cleaning")
OVERSAMPLERS = ("random_over", "smote", "adasyn")
SYNTHETIC = ("smote", "adasyn")

# NearMiss-1 averages the distance to this many nearest minority samples.
NEAR_MISS_NEIGHBORS = 3


@dataclass(frozen=True)
class ResamplePlan:
    method: str
    strategy: str
    n_neighbors: int = 5
    cleaning_threshold: float = 0.5
    smote_kind: str = "regular"
    seed: int = 0

    def __post_init__(self):
        if self.method not in RESAMPLING_METHODS:
            raise ValueError(f"unknown resampling method {self.method!r}")
        undersampling = self.method in UNDERSAMPLERS
        valid = UNDERSAMPLING_STRATEGIES if undersampling else OVERSAMPLING_STRATEGIES
        if self.strategy not in valid:
            raise ValueError(f"strategy {self.strategy!r} is not valid for {self.method}")
        if self.smote_kind not in SMOTE_KINDS:
            raise ValueError(f"unknown SMOTE kind {self.smote_kind!r}")
        if self.n_neighbors < 1:
            raise ValueError(f"n_neighbors must be >= 1, got {self.n_neighbors}")

    @property
    def label(self) -> str:
        if self.method == "smote":
            return f"smote_{self.smote_kind}"
        return self.method


class ResampleResult(NamedTuple):
    values: np.ndarray
    labels: np.ndarray
    note: Optional[str] = None


def plan_from_config(config: WorkflowConfig, seed: int) -> Optional[ResamplePlan]:
    """Turn a config's resampling block into a plan; None when the step is off."""
    step = config.step(RESAMPLING)
    if not step.active:
        return None
    params = step.params
    return ResamplePlan(
        method=step.algorithm,
        strategy=str(params["strategy"]),
        n_neighbors=int(params.get("n_neighbors", 5)),
        cleaning_threshold=float(params.get("cleaning_threshold", 0.5)),
        smote_kind=str(params.get("kind", "regular")),
        seed=seed,
    )


def _imblearn_strategy(strategy: str) -> str:
    return strategy.replace("_", " ")


def _build_sampler(plan: ResamplePlan, n_minority: int, n_samples: int):
    strategy = _imblearn_strategy(plan.strategy)
    if plan.method == "random_under":
        return RandomUnderSampler(sampling_strategy=strategy, random_state=plan.seed)
    if plan.method == "random_over":
        return RandomOverSampler(sampling_strategy=strategy, random_state=plan.seed)
    if plan.method == "near_miss":
        return NearMiss(
            sampling_strategy=strategy,
            version=1,
            n_neighbors=min(NEAR_MISS_NEIGHBORS, n_minority),
        )
    if plan.method == "neighborhood_cleaning":
        return NeighbourhoodCleaningRule(
            sampling_strategy=strategy,
            n_neighbors=min(plan.n_neighbors, n_samples - 1),
            threshold_cleaning=plan.cleaning_threshold,
        )

    k = min(plan.n_neighbors, n_minority - 1)
    if plan.method == "adasyn":
        return ADASYN(sampling_strategy=strategy, n_neighbors=k, random_state=plan.seed)
    smote = SMOTE(sampling_strategy=strategy, k_neighbors=k, random_state=plan.seed)
    if plan.smote_kind == "regular":
        return smote
    if plan.smote_kind == "borderline":
        return BorderlineSMOTE(
            sampling_strategy=strategy,
            k_neighbors=k,
            m_neighbors=min(10, n_samples - 1),
            kind="borderline-1",
            random_state=plan.seed,
        )
    if plan.smote_kind == "tomek":
        return SMOTETomek(sampling_strategy=strategy, smote=smote, random_state=plan.seed)
    return SMOTEENN(sampling_strategy=strategy, smote=smote, random_state=plan.seed)


def resample(X: np.ndarray, y: np.ndarray, plan: ResamplePlan) -> ResampleResult:
    """Resample a training matrix per the plan.

    Degenerate inputs (a class with fewer than 2 samples, a sampler that cannot
    run, or a result that lost a class) return the input unchanged with a note.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    counts = np.bincount(y, minlength=2)
    n_minority = int(counts.min())

    def _identity(reason: str) -> ResampleResult:
        note = f"{plan.label}: {reason}; resampling skipped"
        logger.debug(note)
        return ResampleResult(X, y, note)

    if n_minority < 2:
        return _identity(f"minority class has {n_minority} sample(s)")

    sampler = _build_sampler(plan, n_minority, len(y))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            X_res, y_res = sampler.fit_resample(X, y)
    except (ValueError, RuntimeError) as e:
        return _identity(f"sampler failed ({e})")

    y_res = np.asarray(y_res, dtype=np.int64)
    if np.bincount(y_res, minlength=2).min() == 0:
        return _identity("result lost a class")
    return ResampleResult(np.asarray(X_res, dtype=float), y_res, None)
