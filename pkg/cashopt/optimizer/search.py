"""Random-search CASH: sample workflows, score them on inner splits, rank them."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from ..dataset import FeatureDataset, stratified_indices
from ..metrics import f1_weighted
from ..preprocess import WorkflowPipeline
from ..search_space import (
    INNER_SPLIT_STREAM,
    SearchSpace,
    WorkflowConfig,
    derive_seed,
    sample,
    stream_seed,
)

logger = logging.getLogger(__name__)

ENSEMBLE_METHODS = ("top_n", "fit_number", "forward_selection")
FAILED_SCORE = -1.0


class NoViableWorkflowError(RuntimeError):
    """Raised when every sampled workflow failed, so no ensemble can be built."""


@dataclass(frozen=True)
class OptimizerConfig:
    """Random search and ensembling settings.

    Attributes:
        n_random_search: Workflows sampled per optimisation (N_RS)
        ensemble_method: top_n, fit_number or forward_selection
        n_ensemble: Members for top_n (N_ens)
        k_training: Inner stratified random resplits per workflow
        validation_fraction: Share of the training set used for validation
        master_seed: Root of every derived seed
        n_bags: ForwardSelection bags
        bag_fraction: Share of candidates drawn into each bag
        max_rounds: ForwardSelection additions per bag
        max_fit_number: Largest ensemble size FitNumber considers
    """

    n_random_search: int = 1000
    ensemble_method: str = "top_n"
    n_ensemble: int = 100
    k_training: int = 5
    validation_fraction: float = 0.2
    master_seed: int = 0
    n_bags: int = 20
    bag_fraction: float = 0.5
    max_rounds: int = 100
    max_fit_number: int = 100

    def __post_init__(self):
        problems = []
        if self.n_random_search < 1:
            problems.append(f"n_random_search must be >= 1, got {self.n_random_search}")
        if self.n_ensemble < 1:
            problems.append(f"n_ensemble must be >= 1, got {self.n_ensemble}")
        if self.n_ensemble > self.n_random_search:
            problems.append(
                f"n_ensemble ({self.n_ensemble}) must not exceed "
                f"n_random_search ({self.n_random_search})"
            )
        if self.ensemble_method not in ENSEMBLE_METHODS:
            problems.append(
                f"ensemble_method must be one of {ENSEMBLE_METHODS}, got {self.ensemble_method!r}"
            )
        if self.k_training < 1:
            problems.append(f"k_training must be >= 1, got {self.k_training}")
        if not 0.0 < self.validation_fraction < 1.0:
            problems.append(
                f"validation_fraction must be in (0, 1), got {self.validation_fraction}"
            )
        if self.master_seed < 0:
            problems.append(f"master_seed must be >= 0, got {self.master_seed}")
        if self.n_bags < 1 or self.max_rounds < 1 or self.max_fit_number < 1:
            problems.append("n_bags, max_rounds and max_fit_number must be >= 1")
        if not 0.0 < self.bag_fraction <= 1.0:
            problems.append(f"bag_fraction must be in (0, 1], got {self.bag_fraction}")
        if problems:
            raise ValueError("invalid optimizer config: " + "; ".join(problems))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class InnerSplit:
    train: np.ndarray
    validation: np.ndarray


@dataclass
class EvaluatedWorkflow:
    """Inner-validation outcome of one sampled workflow."""

    index: int
    config: WorkflowConfig
    fold_scores: tuple[float, ...]
    mean_score: float
    # Validation posteriors per inner split, aligned with InnerSplit.validation.
    fold_posteriors: tuple[np.ndarray, ...] = ()
    failure: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.failure is not None


@dataclass
class RandomSearchResult:
    """Everything ensembles need: the evaluated pool, its ranking and the inner splits."""

    evaluated: list[EvaluatedWorkflow]
    ranked: list[EvaluatedWorkflow]
    splits: list[InnerSplit]
    labels: np.ndarray
    split_index: int = 0
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def viable(self) -> list[EvaluatedWorkflow]:
        return [w for w in self.ranked if not w.failed]

    @property
    def n_failed(self) -> int:
        return sum(1 for w in self.evaluated if w.failed)

    @property
    def best_validation_score(self) -> float:
        return self.ranked[0].mean_score if self.ranked else FAILED_SCORE

    def prefix(self, n: int) -> "RandomSearchResult":
        """The result a search with n_random_search = n would have produced.

        Sample i depends only on (master_seed, split_index, i) and the shared
        inner splits, so the first n evaluations are that smaller search.
        """
        if not 1 <= n <= len(self.evaluated):
            raise ValueError(f"prefix size must be in [1, {len(self.evaluated)}], got {n}")
        evaluated = self.evaluated[:n]
        return RandomSearchResult(
            evaluated=evaluated,
            ranked=rank_workflows(evaluated),
            splits=self.splits,
            labels=self.labels,
            split_index=self.split_index,
        )


def inner_splits(
    labels: np.ndarray, k_training: int, validation_fraction: float, seed: int
) -> list[InnerSplit]:
    """k stratified random train/validation resplits, deterministic per seed."""
    splits = []
    for fold in range(k_training):
        fold_seed = int(np.random.SeedSequence((seed, fold)).generate_state(1)[0])
        train, validation = stratified_indices(labels, validation_fraction, fold_seed)
        splits.append(InnerSplit(train=train, validation=validation))
    return splits


def evaluate_workflow(
    config: WorkflowConfig,
    training_set: FeatureDataset,
    k_training: int = 5,
    seed: int = 0,
    validation_fraction: float = 0.2,
    index: int = 0,
    splits: Optional[Sequence[InnerSplit]] = None,
) -> EvaluatedWorkflow:
    """Fit the full workflow on each inner training part and score F1_w on its validation part.

    ``seed`` fixes the inner splits (all workflows of one search share them).
    Any exception during a fold marks the workflow failed with score -1.
    """
    if splits is None:
        splits = inner_splits(training_set.labels, k_training, validation_fraction, seed)
    X, y = training_set.values, training_set.labels
    scores: list[float] = []
    posteriors: list[np.ndarray] = []
    try:
        for split in splits:
            pipeline = WorkflowPipeline(config, training_set.group_tags)
            pipeline.fit(X[split.train], y[split.train])
            proba = pipeline.predict_proba(X[split.validation])
            if not np.isfinite(proba).all():
                raise ValueError("workflow produced non-finite posteriors")
            posteriors.append(proba)
            scores.append(f1_weighted(y[split.validation], (proba >= 0.5).astype(np.int64)))
    except Exception as e:  # noqa: BLE001
        reason = f"{type(e).__name__}: {e}"
        logger.debug(f"Workflow {index} ({config.classifier}) failed: {reason}")
        return EvaluatedWorkflow(
            index=index,
            config=config,
            fold_scores=tuple([FAILED_SCORE] * len(splits)),
            mean_score=FAILED_SCORE,
            failure=reason,
        )
    return EvaluatedWorkflow(
        index=index,
        config=config,
        fold_scores=tuple(scores),
        mean_score=float(np.mean(scores)),
        fold_posteriors=tuple(posteriors),
    )


def rank_workflows(evaluated: Sequence[EvaluatedWorkflow]) -> list[EvaluatedWorkflow]:
    """Descending mean validation F1_w; ties keep the earlier sample first."""
    if not evaluated:
        raise ValueError("cannot rank an empty list of workflows")
    return sorted(evaluated, key=lambda w: (-w.mean_score, w.index))


def sample_configs(
    space: SearchSpace, n: int, master_seed: int, split_index: int
) -> list[WorkflowConfig]:
    return [sample(space, derive_seed(master_seed, split_index, i)) for i in range(n)]


def random_search(
    training_set: FeatureDataset,
    space: SearchSpace,
    cfg: OptimizerConfig,
    split_index: int = 0,
    n_jobs: int = 1,
) -> RandomSearchResult:
    """Sample cfg.n_random_search workflows, evaluate them in parallel and rank them."""
    from .executor import WorkflowExecutor

    configs = sample_configs(space, cfg.n_random_search, cfg.master_seed, split_index)
    split_seed = stream_seed(cfg.master_seed, split_index, INNER_SPLIT_STREAM)
    splits = inner_splits(training_set.labels, cfg.k_training, cfg.validation_fraction, split_seed)
    executor = WorkflowExecutor(n_jobs=n_jobs, split_index=split_index)
    evaluated = executor.evaluate(configs, training_set, splits)
    ranked = rank_workflows(evaluated)
    result = RandomSearchResult(
        evaluated=evaluated,
        ranked=ranked,
        splits=splits,
        labels=training_set.labels,
        split_index=split_index,
    )
    logger.info(
        f"Random search (split {split_index}): {len(evaluated)} workflows, "
        f"{result.n_failed} failed, best validation F1_w {result.best_validation_score:.4f}"
    )
    return result


def optimize(
    training_set: FeatureDataset,
    space: SearchSpace,
    cfg: OptimizerConfig,
    split_index: int = 0,
    n_jobs: int = 1,
):
    """Random search followed by the configured ensemble construction.

    Returns:
        The fitted Ensemble

    Raises:
        NoViableWorkflowError: If every sampled workflow failed
    """
    from .ensemble import build_ensemble

    result = random_search(training_set, space, cfg, split_index=split_index, n_jobs=n_jobs)
    return build_ensemble(cfg.ensemble_method, result, training_set, cfg)
