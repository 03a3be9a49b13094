"""Tests for nested cross-validation, fixed-split bootstrap evaluation and the sweep."""

import json
import logging
from dataclasses import replace

import numpy as np
import pytest

from cashopt.dataset import DatasetError, FeatureDataset, stratified_split
from cashopt.evaluation import (
    FIXED_SPLIT,
    NESTED_CV,
    EvaluationConfig,
    _mask_disagreement,
    bootstrap_test_metrics,
    resolve_space,
    run_evaluation,
    run_fixed_split,
    run_nested_cv,
    run_sweep,
    shared_rows,
    sweep_pairs,
)
from cashopt.fingerprint import fingerprint
from cashopt.logging_config import EmojiFormatter
from cashopt.metrics import METRIC_NAMES
from cashopt.optimizer import OptimizerConfig
from cashopt.report import to_plain
from cashopt.search_space import (
    OUTER_SPLIT_STREAM,
    RESAMPLING,
    Bernoulli,
    baseline_space,
    default_space,
    stream_seed,
)
from cashopt.synth import SynthSpec, generate


def _nested_cfg(fast_optimizer, k_test=3, seed=0, method="top_n"):
    return EvaluationConfig(
        mode=NESTED_CV,
        k_test=k_test,
        optimizer=replace(fast_optimizer, ensemble_method=method),
        master_seed=seed,
    )


def _mixed_rows(dataset, per_class):
    """Row indices holding ``per_class`` samples of each label."""
    rows = [np.flatnonzero(dataset.labels == c)[:per_class] for c in (0, 1)]
    return sorted(int(i) for i in np.concatenate(rows))


def _split(dataset, seed=0):
    plan = stratified_split(dataset, 0.25, seed)
    return dataset.subset(plan.train_indices), dataset.subset(plan.test_indices)


class TestEvaluationConfig:
    def test_master_seed_overrides_optimizer(self):
        cfg = EvaluationConfig(optimizer=OptimizerConfig(master_seed=3), master_seed=9)
        assert cfg.optimizer.master_seed == 9
        assert cfg.to_dict()["optimizer"]["master_seed"] == 9

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"mode": "holdout"},
            {"mode": NESTED_CV, "k_test": 1},
            {"mode": FIXED_SPLIT, "n_bootstrap": 1},
            {"test_fraction": 0.0},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError, match="invalid evaluation config"):
            EvaluationConfig(**kwargs)


class TestResolveSpace:
    def test_balanced_data_masks_resampling(self):
        space = resolve_space(fingerprint((50, 50)))
        assert space.slot(RESAMPLING).activator == Bernoulli(0.0)

    def test_imbalanced_keeps_resampling(self):
        space = resolve_space(fingerprint((80, 20)))
        assert space.slot(RESAMPLING).activator == Bernoulli(0.2)

    def test_given_space_is_masked_too(self):
        space = resolve_space(fingerprint((50, 50)), default_space())
        assert space.slot(RESAMPLING).activator == Bernoulli(0.0)


class TestNestedCV:
    def test_report_shape(self, small_dataset, fast_optimizer):
        report = run_nested_cv(small_dataset, _nested_cfg(fast_optimizer), baseline_space())
        assert report.n_splits == 3
        assert set(report.intervals) == set(METRIC_NAMES)
        for ci in report.intervals.values():
            assert 0.0 <= ci.lower <= ci.upper <= 1.0
        assert len(report.band.fpr) == 101
        assert report.member_histogram() == {"logistic_regression": 9}
        data = report.to_dict()
        for key in ("mode", "config", "dataset", "fingerprint", "summary", "roc_band",
                    "member_histogram", "splits", "warnings"):
            assert key in data
        assert report.final_ensemble["method"] == "top_n"

    def test_split_sizes(self, small_dataset, fast_optimizer):
        cfg = _nested_cfg(fast_optimizer, k_test=2)
        report = run_nested_cv(small_dataset, cfg, baseline_space())
        for split in report.splits:
            assert split.n_train + split.n_test == small_dataset.n_samples
            assert split.n_test == 8

    def test_reproducible_and_worker_independent(self, small_dataset, fast_optimizer):
        cfg = _nested_cfg(fast_optimizer, k_test=2, seed=4)
        a = run_nested_cv(small_dataset, cfg, baseline_space(), n_jobs=1).to_dict()
        b = run_nested_cv(small_dataset, cfg, baseline_space(), n_jobs=2).to_dict()
        assert a == b

    def test_different_seed_different_splits(self, small_dataset, fast_optimizer):
        a = run_nested_cv(small_dataset, _nested_cfg(fast_optimizer, 2, seed=0), baseline_space())
        b = run_nested_cv(small_dataset, _nested_cfg(fast_optimizer, 2, seed=1), baseline_space())
        assert a.to_dict()["splits"] != b.to_dict()["splits"]

    def test_compare_ensembles(self, small_dataset, fast_optimizer):
        report = run_nested_cv(
            small_dataset, _nested_cfg(fast_optimizer, 2), baseline_space(),
            compare_ensembles=True,
        )
        assert set(report.ensemble_comparison) == {"top_n", "fit_number", "forward_selection"}
        assert set(report.splits[0].comparison) == set(report.ensemble_comparison)
        assert report.to_dict()["ensemble_comparison"]["top_n"]["auc"]["method"]

    def test_wrong_mode(self, small_dataset, fast_optimizer):
        cfg = EvaluationConfig(mode=FIXED_SPLIT, optimizer=fast_optimizer)
        with pytest.raises(ValueError, match="run_nested_cv needs mode"):
            run_nested_cv(small_dataset, cfg)

    def test_fingerprint_uses_training_rows_only(self, fast_optimizer):
        # 6/4 overall is balanced; every 20% stratified split trains on 5/3, which is not.
        d = generate(SynthSpec(n_samples=10, n_signal_features=2, n_noise_features=2,
                               class_ratio=0.6, seed=5))
        assert d.class_counts() == (6, 4)
        assert not fingerprint(d.class_counts()).resampling_enabled
        cfg = _nested_cfg(fast_optimizer, k_test=2)
        report = run_nested_cv(d, cfg, baseline_space())
        for split in report.splits:
            assert split.n_train == 8
            assert split.resampling_enabled is True
            assert split.to_dict()["resampling_enabled"] is True
        assert report.fingerprint.resampling_enabled
        assert report.warnings == []
        train_space = resolve_space(fingerprint((5, 3)), default_space())
        assert train_space.slot(RESAMPLING).activator == Bernoulli(0.2)

    @pytest.mark.parametrize(
        "seed, method",
        [(0, "top_n"), (1, "fit_number"), (2, "forward_selection")],
    )
    def test_held_out_values_do_not_change_split_ensemble(
        self, seed, method, small_dataset, fast_optimizer
    ):
        cfg = _nested_cfg(fast_optimizer, k_test=2, seed=seed, method=method)
        plan = stratified_split(
            small_dataset, cfg.test_fraction, stream_seed(seed, 1, OUTER_SPLIT_STREAM)
        )
        rows = list(plan.test_indices)
        values = small_dataset.values.copy()
        values[rows] = np.random.default_rng(seed).standard_normal((len(rows), values.shape[1]))
        mutated = replace(small_dataset, values=values)
        assert mutated.subset(plan.train_indices) == small_dataset.subset(plan.train_indices)

        a = run_nested_cv(small_dataset, cfg, default_space())
        b = run_nested_cv(mutated, cfg, default_space())

        def as_json(obj):
            return json.dumps(to_plain(obj), sort_keys=True)

        assert a.splits[1].n_test == len(rows)
        assert as_json(a.splits[1].ensemble) == as_json(b.splits[1].ensemble)
        assert as_json(a.final_ensemble) == as_json(b.final_ensemble)
        assert a.splits[1].resampling_enabled == b.splits[1].resampling_enabled

    def test_mask_disagreement_warns(self):
        assert _mask_disagreement([fingerprint((50, 50)), fingerprint((51, 49))]) == []
        assert _mask_disagreement([fingerprint((80, 20)), fingerprint((81, 19))]) == []
        warnings = _mask_disagreement([fingerprint((50, 50)), fingerprint((80, 20))])
        assert len(warnings) == 1
        assert "1 of 2 split(s)" in warnings[0]


class TestFixedSplit:
    def _cfg(self, fast_optimizer, n_bootstrap=50):
        return EvaluationConfig(mode=FIXED_SPLIT, n_bootstrap=n_bootstrap, optimizer=fast_optimizer)

    def test_report(self, small_dataset, fast_optimizer):
        train, test = _split(small_dataset)
        report = run_fixed_split(train, test, self._cfg(fast_optimizer), baseline_space())
        assert report.mode == FIXED_SPLIT
        assert report.n_splits == 1
        assert report.bootstrap["n_bootstrap"] == 50
        assert set(report.bootstrap["sd"]) == set(METRIC_NAMES)
        assert report.warnings == []
        assert report.intervals["auc"].method == "bootstrap_normal"
        assert report.intervals["auc"].mean == report.splits[0].metrics.auc
        assert set(report.dataset) == {"train", "test"}

    def test_leakage_warning(self, small_dataset, fast_optimizer):
        train, _ = _split(small_dataset)
        test = train.subset(_mixed_rows(train, 2))
        report = run_fixed_split(train, test, self._cfg(fast_optimizer), baseline_space())
        assert report.warnings
        assert "4 of 4 test row(s)" in report.warnings[0]

    def test_feature_mismatch(self, small_dataset, fast_optimizer):
        train, test = _split(small_dataset)
        renamed = FeatureDataset(
            sample_ids=test.sample_ids,
            feature_names=tuple(f"x{i}" for i in range(test.n_features)),
            group_tags=test.group_tags,
            values=test.values,
            labels=test.labels,
        )
        with pytest.raises(DatasetError, match="feature names differ"):
            run_fixed_split(train, renamed, self._cfg(fast_optimizer), baseline_space())

    def test_dispatch(self, small_dataset, fast_optimizer):
        with pytest.raises(ValueError, match="needs both"):
            run_evaluation(self._cfg(fast_optimizer), data=small_dataset)


class TestBootstrap:
    def test_counts_and_determinism(self):
        labels = np.array([0] * 9 + [1])
        scores = np.linspace(0.0, 1.0, 10)
        a = bootstrap_test_metrics(labels, scores, 200, seed=1)
        b = bootstrap_test_metrics(labels, scores, 200, seed=1)
        assert a.values == b.values
        assert len(a.values["f1_weighted"]) == 200
        assert len(a.values["auc"]) + a.n_auc_skipped == 200
        assert len(a.curves) == len(a.values["auc"])
        assert a.n_redraws > 0

    def test_single_class_resamples_skip_auc(self):
        out = bootstrap_test_metrics(np.array([1]), np.array([0.7]), 5, seed=0)
        assert out.n_auc_skipped == 5
        assert out.n_redraws == 50
        assert out.values["auc"] == []
        assert len(out.values["accuracy"]) == 5


def test_shared_rows(small_dataset):
    train, test = _split(small_dataset)
    assert shared_rows(train, test) == 0
    assert shared_rows(train, train.subset(_mixed_rows(train, 1))) == 2


class TestSweep:
    def test_pairs(self):
        assert sweep_pairs([4, 2], [1, 3]) == [(2, 1), (4, 1), (4, 3)]
        with pytest.raises(ValueError):
            sweep_pairs([1], [5])

    def test_run_sweep(self, small_dataset):
        base = EvaluationConfig(
            mode=NESTED_CV, k_test=2, optimizer=OptimizerConfig(n_random_search=4, n_ensemble=1,
                                                                k_training=2)
        )
        points = run_sweep(small_dataset, [2, 4], [1, 2], 2, 2, base, baseline_space())
        assert [(p.n_random_search, p.n_ensemble) for p in points] == [
            (2, 1), (2, 2), (4, 1), (4, 2)
        ]
        for p in points:
            assert len(p.repeat_means) == 2
            assert 0.0 <= p.mean_f1_weighted <= 1.0


@pytest.mark.slow
def test_signal_beats_noise_at_desk_scale():
    """Directional check: a learnable dataset scores well above a pure-noise one."""
    optimizer = OptimizerConfig(n_random_search=30, n_ensemble=5, k_training=3)
    cfg = EvaluationConfig(mode=NESTED_CV, k_test=5, optimizer=optimizer)
    signal = generate(SynthSpec(n_samples=80, n_signal_features=5, n_noise_features=15))
    noise = generate(SynthSpec(n_samples=80, n_signal_features=0, n_noise_features=20))
    signal_auc = run_nested_cv(signal, cfg).intervals["auc"].mean
    noise_auc = run_nested_cv(noise, cfg).intervals["auc"].mean
    assert signal_auc > 0.8
    assert noise_auc < 0.7
    assert signal_auc > noise_auc


def test_mask_disagreement_warning_on_console():
    (message,) = _mask_disagreement([fingerprint((50, 50)), fingerprint((80, 20))])
    record = logging.LogRecord(
        "cashopt.evaluation", logging.WARNING, __file__, 0, message, None, None
    )
    line = EmojiFormatter(fmt="%(emoji)s[%(levelname)s] %(message)s").format(record)
    assert line == f"\u26a0\ufe0f [WARNING] {message}"
    assert "1 of 2 split(s)" in line
