"""Ensembles of refitted workflows: top-N, FitNumber and ForwardSelection.

Every ensemble averages member posteriors (weighted by selection counts for
ForwardSelection). Members are refit, preprocessing included, on the full
training set. Validation performance of a candidate ensemble is the mean over
inner splits of F1_w of the fold-wise averaged stored validation posteriors.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from ..dataset import FeatureDataset
from ..preprocess import WorkflowPipeline
from ..search_space import FORWARD_SELECTION_STREAM, config_digest, stream_seed
from .search import (
    EvaluatedWorkflow,
    NoViableWorkflowError,
    OptimizerConfig,
    RandomSearchResult,
)

logger = logging.getLogger(__name__)


@dataclass
class Ensemble:
    """Fitted members and their integer selection counts (all 1 for top-N/FitNumber)."""

    members: list[WorkflowPipeline]
    counts: np.ndarray
    method: str
    member_indices: list[int]
    validation_score: Optional[float] = None
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def n_members(self) -> int:
        return len(self.members)

    @property
    def weights(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        stack = np.stack([m.predict_proba(X) for m in self.members])
        if np.all(self.counts == self.counts[0]):
            return stack.mean(axis=0)
        return np.average(stack, axis=0, weights=self.counts)

    def predict(self, X: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        return (self.predict_proba(X) >= threshold).astype(np.int64)

    def classifier_histogram(self) -> dict[str, int]:
        """Member count per classifier (weighted by selection count)."""
        hist: Counter = Counter()
        for member, count in zip(self.members, self.counts):
            hist[member.config.classifier] += int(count)
        return dict(sorted(hist.items()))

    def digests(self) -> list[str]:
        return [config_digest(m.config) for m in self.members]

    def describe(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "n_members": self.n_members,
            "validation_score": self.validation_score,
            "classifier_histogram": self.classifier_histogram(),
            "members": [
                {
                    "sample_index": idx,
                    "weight": float(w),
                    "digest": config_digest(m.config),
                    "config": m.config.to_dict(),
                    "fitted": m.describe(),
                }
                for idx, w, m in zip(self.member_indices, self.weights, self.members)
            ],
        }


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def refit(workflow: EvaluatedWorkflow, training_set: FeatureDataset) -> Optional[WorkflowPipeline]:
    """Refit one workflow on the full training set; None if it fails there."""
    try:
        return WorkflowPipeline(workflow.config, training_set.group_tags).fit(
            training_set.values, training_set.labels
        )
    except Exception as e:  # noqa: BLE001
        logger.warning(f"Workflow {workflow.index} failed on the full training set: {e}")
        return None


def f1_weighted_batch(labels: np.ndarray, predictions: np.ndarray) -> np.ndarray:
    """Weighted F1 of several prediction rows at once (rows of ``predictions``)."""
    y = labels.astype(bool)
    pred = predictions.astype(bool)
    tp = (pred & y).sum(axis=1)
    fp = (pred & ~y).sum(axis=1)
    fn = (~pred & y).sum(axis=1)
    tn = (~pred & ~y).sum(axis=1)
    n = len(y)
    n_pos = y.sum()

    def _f1(hit, miss_a, miss_b):
        den = 2 * hit + miss_a + miss_b
        return np.where(den > 0, 2 * hit / np.maximum(den, 1), 0.0)

    return (n_pos / n) * _f1(tp, fp, fn) + ((n - n_pos) / n) * _f1(tn, fn, fp)


class ValidationScorer:
    """Scores averaged validation posteriors against the inner-split labels."""

    def __init__(self, result: RandomSearchResult):
        self.fold_labels = [result.labels[s.validation] for s in result.splits]

    def score(self, fold_sums: Sequence[np.ndarray], count: float) -> np.ndarray:
        """Mean over folds of F1_w for summed posteriors (rows = candidates) / count."""
        per_fold = [
            f1_weighted_batch(labels, np.atleast_2d(sums) / count >= 0.5)
            for labels, sums in zip(self.fold_labels, fold_sums)
        ]
        return np.mean(per_fold, axis=0)


def _assemble(
    chosen: Sequence[EvaluatedWorkflow],
    counts: Sequence[int],
    training_set: FeatureDataset,
    method: str,
    validation_score: Optional[float],
) -> Ensemble:
    members, kept_counts, indices = [], [], []
    for workflow, count in zip(chosen, counts):
        fitted = refit(workflow, training_set)
        if fitted is None:
            continue
        members.append(fitted)
        kept_counts.append(int(count))
        indices.append(workflow.index)
    if not members:
        raise NoViableWorkflowError("no viable workflow: every selected member failed to refit")
    return Ensemble(
        members=members,
        counts=np.asarray(kept_counts, dtype=np.int64),
        method=method,
        member_indices=indices,
        validation_score=validation_score,
    )


def _viable(ranked: Sequence[EvaluatedWorkflow]) -> list[EvaluatedWorkflow]:
    viable = [w for w in ranked if not w.failed]
    if not viable:
        raise NoViableWorkflowError("no viable workflow: every sampled workflow failed")
    return viable


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def build_topn(
    ranked: Sequence[EvaluatedWorkflow], n_ensemble: int, training_set: FeatureDataset
) -> Ensemble:
    """Refit the best min(n_ensemble, viable) workflows; a member that fails to refit
    is replaced by the next viable one."""
    if n_ensemble < 1:
        raise ValueError(f"n_ensemble must be >= 1, got {n_ensemble}")
    members, indices, scores = [], [], []
    for workflow in _viable(ranked):
        if len(members) == n_ensemble:
            break
        fitted = refit(workflow, training_set)
        if fitted is not None:
            members.append(fitted)
            indices.append(workflow.index)
            scores.append(workflow.mean_score)
    if not members:
        raise NoViableWorkflowError("no viable workflow: every candidate failed to refit")
    return Ensemble(
        members=members,
        counts=np.ones(len(members), dtype=np.int64),
        method="top_n",
        member_indices=indices,
        validation_score=float(np.mean(scores)),
    )


def fit_number_curve(result: RandomSearchResult, max_size: int = 100) -> np.ndarray:
    """Validation F1_w of the top-j averaged ensemble for j = 1..min(max_size, viable)."""
    viable = _viable(result.ranked)[:max_size]
    scorer = ValidationScorer(result)
    fold_sums = [np.zeros_like(p) for p in viable[0].fold_posteriors]
    curve = np.zeros(len(viable))
    for j, workflow in enumerate(viable, start=1):
        for f, posterior in enumerate(workflow.fold_posteriors):
            fold_sums[f] = fold_sums[f] + posterior
        curve[j - 1] = scorer.score(fold_sums, j)[0]
    return curve


def build_fitnumber(
    result: RandomSearchResult, training_set: FeatureDataset, max_size: int = 100
) -> Ensemble:
    """Top-j ensemble with j maximising validation F1_w (smallest j on ties)."""
    curve = fit_number_curve(result, max_size)
    best_j = int(np.argmax(curve)) + 1
    logger.info(f"FitNumber selected {best_j} member(s) (validation F1_w {curve[best_j - 1]:.4f})")
    ensemble = build_topn(result.ranked, best_j, training_set)
    ensemble.method = "fit_number"
    ensemble.validation_score = float(curve[best_j - 1])
    ensemble.meta["fit_number_curve"] = [float(v) for v in curve]
    return ensemble


def forward_selection_counts(
    result: RandomSearchResult,
    n_bags: int = 20,
    bag_fraction: float = 0.5,
    max_rounds: int = 100,
    max_candidates: int = 100,
    seed: int = 0,
) -> tuple[list[EvaluatedWorkflow], np.ndarray]:
    """Bagged greedy forward selection with replacement.

    In each bag a ``bag_fraction`` share of the candidates is drawn; starting from
    an empty ensemble, the candidate that maximises validation F1_w of the
    averaged ensemble is added ``max_rounds`` times (repeats allowed, ties go to
    the better-ranked candidate). Counts are summed over bags.

    Returns:
        (candidates in rank order, selection count per candidate)
    """
    candidates = _viable(result.ranked)[:max_candidates]
    scorer = ValidationScorer(result)
    n_folds = len(result.splits)
    # posteriors[f] has one row per candidate.
    posteriors = [np.stack([c.fold_posteriors[f] for c in candidates]) for f in range(n_folds)]
    counts = np.zeros(len(candidates), dtype=np.int64)
    bag_size = max(1, int(round(bag_fraction * len(candidates))))
    rng = np.random.default_rng(seed)
    for _ in range(n_bags):
        bag = np.sort(rng.choice(len(candidates), size=bag_size, replace=False))
        sums = [np.zeros(p.shape[1]) for p in posteriors]
        for round_index in range(max_rounds):
            trial = [sums[f] + posteriors[f][bag] for f in range(n_folds)]
            scores = scorer.score(trial, round_index + 1)
            pick = bag[int(np.argmax(scores))]
            counts[pick] += 1
            sums = [sums[f] + posteriors[f][pick] for f in range(n_folds)]
    return candidates, counts


def build_forward_selection(
    result: RandomSearchResult,
    training_set: FeatureDataset,
    n_bags: int = 20,
    bag_fraction: float = 0.5,
    max_rounds: int = 100,
    seed: int = 0,
) -> Ensemble:
    """Weighted ensemble from forward-selection counts; unselected candidates are not refit."""
    candidates, counts = forward_selection_counts(
        result, n_bags=n_bags, bag_fraction=bag_fraction, max_rounds=max_rounds, seed=seed
    )
    chosen = [(c, n) for c, n in zip(candidates, counts) if n > 0]
    scorer = ValidationScorer(result)
    fold_sums = [
        sum(n * c.fold_posteriors[f] for c, n in chosen) for f in range(len(result.splits))
    ]
    validation = float(scorer.score(fold_sums, float(counts.sum()))[0])
    ensemble = _assemble(
        [c for c, _ in chosen],
        [n for _, n in chosen],
        training_set,
        "forward_selection",
        validation,
    )
    ensemble.meta["selection_total"] = int(counts.sum())
    return ensemble


def build_ensemble(
    method: str,
    result: RandomSearchResult,
    training_set: FeatureDataset,
    cfg: OptimizerConfig,
    n_ensemble: Optional[int] = None,
) -> Ensemble:
    """Dispatch to the builder for ``method``."""
    if method == "top_n":
        return build_topn(result.ranked, n_ensemble or cfg.n_ensemble, training_set)
    if method == "fit_number":
        return build_fitnumber(result, training_set, max_size=cfg.max_fit_number)
    if method == "forward_selection":
        seed = stream_seed(cfg.master_seed, result.split_index, FORWARD_SELECTION_STREAM)
        return build_forward_selection(
            result,
            training_set,
            n_bags=cfg.n_bags,
            bag_fraction=cfg.bag_fraction,
            max_rounds=cfg.max_rounds,
            seed=seed,
        )
    raise ValueError(f"unknown ensemble method {method!r}")
