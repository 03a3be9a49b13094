"""Evaluation setups: random-split nested cross-validation and fixed train/test with bootstrap.

All optimisation happens inside a training partition; test rows are only ever
passed to ``Ensemble.predict_proba``. The outer split loop runs sequentially,
random-search evaluations inside it run on the configured worker count.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Optional, Sequence

import numpy as np

from .dataset import DatasetError, FeatureDataset, stratified_split
from .fingerprint import FingerprintReport, ImagingMetadata, fingerprint
from .metrics import (
    METRIC_NAMES,
    MetricSet,
    f1_weighted,
    metric_set,
    roc_curve,
    threshold_metrics,
)
from .metrics import auc as auc_score
from .optimizer import (
    ENSEMBLE_METHODS,
    Ensemble,
    OptimizerConfig,
    RandomSearchResult,
    build_ensemble,
    random_search,
)
from .search_space import (
    BOOTSTRAP_STREAM,
    OUTER_SPLIT_STREAM,
    SearchSpace,
    default_space,
    stream_seed,
    with_resampling_mask,
)
from .stats import (
    ConfidenceInterval,
    RocBand,
    bootstrap_normal_ci,
    corrected_resampled_t_ci,
    roc_band,
    summarize,
)

logger = logging.getLogger(__name__)

NESTED_CV = "nested_cv"
FIXED_SPLIT = "fixed_split"
MODES = (NESTED_CV, FIXED_SPLIT)

# Redraws of a single-class bootstrap resample before its AUC is skipped.
MAX_BOOTSTRAP_REDRAWS = 10


@dataclass(frozen=True)
class EvaluationConfig:
    """Outer evaluation settings.

    ``master_seed`` is the single root seed of a run; it overrides the
    optimizer's own master_seed so both stay in step.
    """

    mode: str = NESTED_CV
    k_test: int = 100
    test_fraction: float = 0.2
    n_bootstrap: int = 1000
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    master_seed: int = 0

    def __post_init__(self):
        problems = []
        if self.mode not in MODES:
            problems.append(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == NESTED_CV and self.k_test < 2:
            problems.append(f"k_test must be >= 2 in nested_cv mode, got {self.k_test}")
        if self.mode == FIXED_SPLIT and self.n_bootstrap < 2:
            problems.append(
                f"n_bootstrap must be >= 2 in fixed_split mode, got {self.n_bootstrap}"
            )
        if not 0.0 < self.test_fraction < 1.0:
            problems.append(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        if self.master_seed < 0:
            problems.append(f"master_seed must be >= 0, got {self.master_seed}")
        if problems:
            raise ValueError("invalid evaluation config: " + "; ".join(problems))
        if self.optimizer.master_seed != self.master_seed:
            object.__setattr__(
                self, "optimizer", replace(self.optimizer, master_seed=self.master_seed)
            )

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "k_test": self.k_test,
            "test_fraction": self.test_fraction,
            "n_bootstrap": self.n_bootstrap,
            "master_seed": self.master_seed,
            "optimizer": self.optimizer.to_dict(),
        }


@dataclass
class SplitOutcome:
    """Test performance and ensemble summary of one outer split."""

    split_index: int
    n_train: int
    n_test: int
    metrics: MetricSet
    roc: list[tuple[float, float, float]]
    ensemble: dict[str, Any]
    comparison: dict[str, MetricSet] = field(default_factory=dict)
    resampling_enabled: Optional[bool] = None

    def to_dict(self) -> dict[str, Any]:
        out = {
            "split_index": self.split_index,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "metrics": self.metrics.to_dict(),
            "ensemble": self.ensemble,
        }
        if self.resampling_enabled is not None:
            out["resampling_enabled"] = self.resampling_enabled
        if self.comparison:
            out["comparison"] = {m: ms.to_dict() for m, ms in sorted(self.comparison.items())}
        return out


@dataclass
class EvaluationReport:
    """Everything a run reports: per-split metrics, intervals, ROC band and provenance."""

    mode: str
    splits: list[SplitOutcome]
    intervals: dict[str, ConfidenceInterval]
    band: RocBand
    fingerprint: FingerprintReport
    config: dict[str, Any]
    dataset: dict[str, Any]
    bootstrap: dict[str, Any] = field(default_factory=dict)
    ensemble_comparison: dict[str, dict[str, ConfidenceInterval]] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    # describe() of the last fitted ensemble; written to ensemble.yaml, not report.json.
    final_ensemble: dict[str, Any] = field(default_factory=dict)

    @property
    def n_splits(self) -> int:
        return len(self.splits)

    def metric_values(self, name: str) -> list[float]:
        return [getattr(s.metrics, name) for s in self.splits]

    def member_histogram(self) -> dict[str, int]:
        """Classifier histogram summed over every split's ensemble."""
        total: dict[str, int] = {}
        for split in self.splits:
            for name, count in split.ensemble["classifier_histogram"].items():
                total[name] = total.get(name, 0) + count
        return dict(sorted(total.items()))

    def to_dict(self) -> dict[str, Any]:
        out = {
            "mode": self.mode,
            "config": self.config,
            "dataset": self.dataset,
            "fingerprint": self.fingerprint.to_dict(),
            "summary": {name: ci.to_dict() for name, ci in self.intervals.items()},
            "roc_band": self.band.to_dict(),
            "member_histogram": self.member_histogram(),
            "splits": [s.to_dict() for s in self.splits],
            "warnings": list(self.warnings),
        }
        if self.bootstrap:
            out["bootstrap"] = self.bootstrap
        if self.ensemble_comparison:
            out["ensemble_comparison"] = {
                method: {name: ci.to_dict() for name, ci in cis.items()}
                for method, cis in sorted(self.ensemble_comparison.items())
            }
        return out


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def resolve_space(
    report: FingerprintReport, space: Optional[SearchSpace] = None
) -> SearchSpace:
    """Default space masked by the fingerprint, or the given space with the same mask."""
    if space is None:
        return default_space(resampling_enabled=report.resampling_enabled)
    return with_resampling_mask(space, report.resampling_enabled and space.resampling_enabled)


def dataset_summary(d: FeatureDataset) -> dict[str, Any]:
    c0, c1 = d.class_counts()
    return {
        "digest": d.digest(),
        "n_samples": d.n_samples,
        "n_features": d.n_features,
        "class_counts": [c0, c1],
        "label_names": list(d.label_names),
    }


def ensemble_summary(ensemble: Ensemble, result: RandomSearchResult) -> dict[str, Any]:
    return {
        "method": ensemble.method,
        "n_members": ensemble.n_members,
        "classifier_histogram": ensemble.classifier_histogram(),
        "member_indices": list(ensemble.member_indices),
        "member_digests": ensemble.digests(),
        "weights": [float(w) for w in ensemble.weights],
        "validation_score": ensemble.validation_score,
        "best_validation_score": result.best_validation_score,
        "n_failed_workflows": result.n_failed,
    }


def _score(ensemble: Ensemble, test: FeatureDataset) -> tuple[MetricSet, list]:
    proba = ensemble.predict_proba(test.values)
    return metric_set(test.labels, proba), roc_curve(test.labels, proba)


def _intervals(
    splits: Sequence[MetricSet], n_train: int, n_test: int
) -> dict[str, ConfidenceInterval]:
    return {
        name: corrected_resampled_t_ci(
            [getattr(m, name) for m in splits], n_train, n_test
        ).clamped()
        for name in METRIC_NAMES
    }


def _mask_disagreement(fingerprints: Sequence[FingerprintReport]) -> list[str]:
    enabled = [i for i, fp in enumerate(fingerprints) if fp.resampling_enabled]
    if not enabled or len(enabled) == len(fingerprints):
        return []
    message = (
        f"resampling was searchable in {len(enabled)} of {len(fingerprints)} split(s); "
        "the reported fingerprint is split 0's"
    )
    logger.warning(message)
    return [message]


def shared_rows(train: FeatureDataset, test: FeatureDataset) -> int:
    """Count test rows whose feature values equal some training row (NaN equals NaN)."""
    seen = {np.nan_to_num(row, nan=np.inf).tobytes() for row in train.values}
    return sum(np.nan_to_num(row, nan=np.inf).tobytes() in seen for row in test.values)


# ---------------------------------------------------------------------------
# Nested cross-validation
# ---------------------------------------------------------------------------


def run_nested_cv(
    d: FeatureDataset,
    cfg: EvaluationConfig,
    space: Optional[SearchSpace] = None,
    meta: Optional[ImagingMetadata] = None,
    compare_ensembles: bool = False,
    n_jobs: int = 1,
) -> EvaluationReport:
    """k_test stratified random train/test splits; a full optimisation per training split.

    Args:
        d: Full dataset
        cfg: Evaluation settings (mode must be nested_cv)
        space: Search space (default: default_space), masked per split by the fingerprint
            of that split's training rows
        meta: Optional imaging metadata for the fingerprint's image-level rules
        compare_ensembles: Also build and score every ensemble method per split
        n_jobs: Workers for random-search evaluations

    Returns:
        EvaluationReport with k_test splits and corrected resampled t intervals
    """
    if cfg.mode != NESTED_CV:
        raise ValueError(f"run_nested_cv needs mode {NESTED_CV!r}, got {cfg.mode!r}")
    fingerprints: list[FingerprintReport] = []
    outcomes: list[SplitOutcome] = []

    for i in range(cfg.k_test):
        outer_seed = stream_seed(cfg.master_seed, i, OUTER_SPLIT_STREAM)
        plan = stratified_split(d, cfg.test_fraction, outer_seed)
        train, test = d.subset(plan.train_indices), d.subset(plan.test_indices)
        split_fp = fingerprint(train.class_counts(), meta)
        fingerprints.append(split_fp)
        split_space = resolve_space(split_fp, space)
        result = random_search(train, split_space, cfg.optimizer, split_index=i, n_jobs=n_jobs)

        methods = ENSEMBLE_METHODS if compare_ensembles else (cfg.optimizer.ensemble_method,)
        scored: dict[str, tuple[Ensemble, MetricSet, list]] = {}
        for method in methods:
            ensemble = build_ensemble(method, result, train, cfg.optimizer)
            scored[method] = (ensemble, *_score(ensemble, test))

        ensemble, metrics, curve = scored[cfg.optimizer.ensemble_method]
        final_ensemble = ensemble
        outcomes.append(
            SplitOutcome(
                split_index=i,
                n_train=train.n_samples,
                n_test=test.n_samples,
                metrics=metrics,
                roc=curve,
                ensemble=ensemble_summary(ensemble, result),
                comparison={m: s[1] for m, s in scored.items()} if compare_ensembles else {},
                resampling_enabled=split_fp.resampling_enabled,
            )
        )
        logger.info(
            f"Split {i + 1}/{cfg.k_test}: test AUC {metrics.auc:.3f}, "
            f"F1_w {metrics.f1_weighted:.3f} "
            f"({ensemble.n_members} member(s), {ensemble.method})"
        )

    n_train, n_test = outcomes[0].n_train, outcomes[0].n_test
    warnings = _mask_disagreement(fingerprints)
    comparison = {}
    if compare_ensembles:
        comparison = {
            method: _intervals([o.comparison[method] for o in outcomes], n_train, n_test)
            for method in ENSEMBLE_METHODS
        }
    return EvaluationReport(
        mode=NESTED_CV,
        splits=outcomes,
        intervals=_intervals([o.metrics for o in outcomes], n_train, n_test),
        band=roc_band([o.roc for o in outcomes]),
        fingerprint=fingerprints[0],
        config=cfg.to_dict(),
        dataset=dataset_summary(d),
        ensemble_comparison=comparison,
        warnings=warnings,
        final_ensemble=final_ensemble.describe(),
    )


# ---------------------------------------------------------------------------
# Fixed split with bootstrap
# ---------------------------------------------------------------------------


@dataclass
class BootstrapOutcome:
    values: dict[str, list[float]]
    curves: list[list[tuple[float, float, float]]]
    n_redraws: int = 0
    n_auc_skipped: int = 0


def bootstrap_test_metrics(
    labels: np.ndarray, scores: np.ndarray, n_bootstrap: int, seed: int
) -> BootstrapOutcome:
    """Resample test rows uniformly with replacement and recompute every metric.

    A single-class resample is redrawn up to MAX_BOOTSTRAP_REDRAWS times; if it
    stays single-class its threshold metrics are kept and its AUC is skipped.
    """
    rng = np.random.default_rng(seed)
    n = len(labels)
    values: dict[str, list[float]] = {name: [] for name in METRIC_NAMES}
    curves = []
    redraws = skipped = 0
    for _ in range(n_bootstrap):
        idx = rng.integers(0, n, size=n)
        attempts = 0
        while np.unique(labels[idx]).size < 2 and attempts < MAX_BOOTSTRAP_REDRAWS:
            idx = rng.integers(0, n, size=n)
            attempts += 1
        redraws += attempts
        y, s = labels[idx], scores[idx]
        predictions = (s >= 0.5).astype(np.int64)
        confusion = threshold_metrics(y, predictions)
        for name in ("bcr", "sensitivity", "specificity", "precision", "recall", "accuracy"):
            values[name].append(confusion[name])
        values["f1_weighted"].append(f1_weighted(y, predictions))
        if np.unique(y).size < 2:
            skipped += 1
            continue
        values["auc"].append(auc_score(y, s))
        curves.append(roc_curve(y, s))
    return BootstrapOutcome(values=values, curves=curves, n_redraws=redraws, n_auc_skipped=skipped)


def run_fixed_split(
    train: FeatureDataset,
    test: FeatureDataset,
    cfg: EvaluationConfig,
    space: Optional[SearchSpace] = None,
    meta: Optional[ImagingMetadata] = None,
    n_jobs: int = 1,
) -> EvaluationReport:
    """Optimise once on ``train``; point metrics on ``test`` with bootstrap normal intervals."""
    if cfg.mode != FIXED_SPLIT:
        raise ValueError(f"run_fixed_split needs mode {FIXED_SPLIT!r}, got {cfg.mode!r}")
    if train.feature_names != test.feature_names:
        missing = sorted(set(train.feature_names) ^ set(test.feature_names))
        detail = f": {', '.join(missing[:5])}" if missing else " (column order differs)"
        raise DatasetError(f"train and test feature names differ{detail}")

    warnings = []
    n_shared = shared_rows(train, test)
    if n_shared:
        message = (
            f"{n_shared} of {test.n_samples} test row(s) also appear in the training set; "
            "test metrics are optimistic"
        )
        logger.warning(message)
        warnings.append(message)

    report_fp = fingerprint(train.class_counts(), meta)
    space = resolve_space(report_fp, space)
    result = random_search(train, space, cfg.optimizer, split_index=0, n_jobs=n_jobs)
    ensemble = build_ensemble(cfg.optimizer.ensemble_method, result, train, cfg.optimizer)

    proba = ensemble.predict_proba(test.values)
    point = metric_set(test.labels, proba)
    boot = bootstrap_test_metrics(
        test.labels, proba, cfg.n_bootstrap, stream_seed(cfg.master_seed, 0, BOOTSTRAP_STREAM)
    )
    if boot.n_auc_skipped:
        logger.warning(f"{boot.n_auc_skipped} single-class bootstrap resample(s) skipped for AUC")
    intervals = {
        name: bootstrap_normal_ci(getattr(point, name), boot.values[name]).clamped()
        for name in METRIC_NAMES
    }
    logger.info(
        f"Fixed split: test AUC {point.auc:.3f} [{intervals['auc'].lower:.3f}, "
        f"{intervals['auc'].upper:.3f}] over {cfg.n_bootstrap} bootstrap resamples"
    )
    outcome = SplitOutcome(
        split_index=0,
        n_train=train.n_samples,
        n_test=test.n_samples,
        metrics=point,
        roc=roc_curve(test.labels, proba),
        ensemble=ensemble_summary(ensemble, result),
    )
    return EvaluationReport(
        mode=FIXED_SPLIT,
        splits=[outcome],
        intervals=intervals,
        band=roc_band(boot.curves),
        fingerprint=report_fp,
        config=cfg.to_dict(),
        dataset={"train": dataset_summary(train), "test": dataset_summary(test)},
        bootstrap={
            "n_bootstrap": cfg.n_bootstrap,
            "n_redraws": boot.n_redraws,
            "n_auc_skipped": boot.n_auc_skipped,
            "sd": {
                name: summarize(vals)["std"] for name, vals in sorted(boot.values.items())
            },
        },
        warnings=warnings,
        final_ensemble=ensemble.describe(),
    )


# ---------------------------------------------------------------------------
# Random-search / ensemble-size sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    """Mean test F1_w of one (N_RS, N_ens) pair across repeats."""

    n_random_search: int
    n_ensemble: int
    mean_f1_weighted: float
    std_f1_weighted: float
    repeat_means: tuple[float, ...]
    mean_auc: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_random_search": self.n_random_search,
            "n_ensemble": self.n_ensemble,
            "mean_f1_weighted": self.mean_f1_weighted,
            "std_f1_weighted": self.std_f1_weighted,
            "mean_auc": self.mean_auc,
            "repeat_means": list(self.repeat_means),
        }


def sweep_pairs(grid_rs: Sequence[int], grid_ens: Sequence[int]) -> list[tuple[int, int]]:
    pairs = [
        (rs, ens) for rs in sorted(set(grid_rs)) for ens in sorted(set(grid_ens)) if ens <= rs
    ]
    if not pairs:
        raise ValueError("sweep grid has no pair with n_ensemble <= n_random_search")
    return pairs


def run_sweep(
    d: FeatureDataset,
    grid_rs: Sequence[int],
    grid_ens: Sequence[int],
    n_repeats: int,
    k_test: int,
    base_cfg: EvaluationConfig,
    space: Optional[SearchSpace] = None,
    n_jobs: int = 1,
) -> list[SweepPoint]:
    """Nested CV over a grid of (N_RS, N_ens) with top-N ensembles, repeated with distinct seeds.

    Repeat r uses master seed ``base_cfg.master_seed + r``. Per outer split one
    search of max(grid_rs) workflows is run; a smaller N_RS takes its prefix,
    and every N_ens is built from the same ranked pool. The space is masked by
    the fingerprint of each training partition.
    """
    if n_repeats < 1 or k_test < 2:
        raise ValueError(f"n_repeats must be >= 1 and k_test >= 2, got {n_repeats}, {k_test}")
    pairs = sweep_pairs(grid_rs, grid_ens)
    largest = max(rs for rs, _ in pairs)

    # per_pair[(rs, ens)][repeat] -> list of (f1_w, auc) per split
    per_pair: dict[tuple[int, int], list[list[tuple[float, float]]]] = {
        pair: [[] for _ in range(n_repeats)] for pair in pairs
    }
    for r in range(n_repeats):
        seed = base_cfg.master_seed + r
        cfg = replace(
            base_cfg.optimizer,
            master_seed=seed,
            n_random_search=largest,
            n_ensemble=1,
            ensemble_method="top_n",
        )
        for i in range(k_test):
            outer_seed = stream_seed(seed, i, OUTER_SPLIT_STREAM)
            plan = stratified_split(d, base_cfg.test_fraction, outer_seed)
            train, test = d.subset(plan.train_indices), d.subset(plan.test_indices)
            split_space = resolve_space(fingerprint(train.class_counts(), None), space)
            full = random_search(train, split_space, cfg, split_index=i, n_jobs=n_jobs)
            for rs, ens in pairs:
                ensemble = build_ensemble("top_n", full.prefix(rs), train, cfg, n_ensemble=ens)
                metrics, _ = _score(ensemble, test)
                per_pair[(rs, ens)][r].append((metrics.f1_weighted, metrics.auc))
        logger.info(f"Sweep repeat {r + 1}/{n_repeats} done")

    points = []
    for rs, ens in pairs:
        repeat_f1 = [float(np.mean([v[0] for v in rep])) for rep in per_pair[(rs, ens)]]
        repeat_auc = [float(np.mean([v[1] for v in rep])) for rep in per_pair[(rs, ens)]]
        stats = summarize(repeat_f1)
        points.append(
            SweepPoint(
                n_random_search=rs,
                n_ensemble=ens,
                mean_f1_weighted=stats["mean"],
                std_f1_weighted=stats["std"],
                repeat_means=tuple(repeat_f1),
                mean_auc=float(np.mean(repeat_auc)),
            )
        )
    return points


def run_evaluation(
    cfg: EvaluationConfig,
    data: Optional[FeatureDataset] = None,
    train: Optional[FeatureDataset] = None,
    test: Optional[FeatureDataset] = None,
    space: Optional[SearchSpace] = None,
    meta: Optional[ImagingMetadata] = None,
    compare_ensembles: bool = False,
    n_jobs: int = 1,
) -> EvaluationReport:
    """Dispatch on cfg.mode."""
    if cfg.mode == NESTED_CV:
        if data is None:
            raise ValueError("nested_cv mode needs a dataset")
        return run_nested_cv(data, cfg, space, meta, compare_ensembles, n_jobs)
    if train is None or test is None:
        raise ValueError("fixed_split mode needs both a training and a test dataset")
    return run_fixed_split(train, test, cfg, space, meta, n_jobs)
