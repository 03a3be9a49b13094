"""Tests for step-9 resampling."""

import numpy as np
import pytest

from cashopt.resampling import ResamplePlan, plan_from_config, resample
from cashopt.search_space import RESAMPLING, baseline_space, sample


@pytest.fixture
def imbalanced():
    rng = np.random.default_rng(0)
    y = np.array([0] * 30 + [1] * 10)
    X = rng.standard_normal((40, 3)) + y[:, None]
    return X, y


def test_random_oversampling_balances(imbalanced):
    X, y = imbalanced
    result = resample(X, y, ResamplePlan("random_over", "minority", seed=1))
    assert np.bincount(result.labels).tolist() == [30, 30]
    assert result.note is None


def test_random_undersampling_balances(imbalanced):
    X, y = imbalanced
    result = resample(X, y, ResamplePlan("random_under", "not_minority", seed=1))
    assert np.bincount(result.labels).tolist() == [10, 10]


def test_near_miss_keeps_minority(imbalanced):
    X, y = imbalanced
    result = resample(X, y, ResamplePlan("near_miss", "majority"))
    assert np.bincount(result.labels).tolist() == [10, 10]


@pytest.mark.parametrize("kind", ["regular", "borderline", "tomek", "enn"])
def test_smote_variants_add_minority_rows(imbalanced, kind):
    X, y = imbalanced
    result = resample(X, y, ResamplePlan("smote", "minority", n_neighbors=3, smote_kind=kind))
    counts = np.bincount(result.labels, minlength=2)
    assert counts.min() > 0
    assert result.values.shape[1] == 3
    if kind == "regular":
        assert counts[1] == 30


def test_seeded_resampling_is_reproducible(imbalanced):
    X, y = imbalanced
    plan = ResamplePlan("smote", "minority", n_neighbors=5, seed=3)
    a, b = resample(X, y, plan), resample(X, y, plan)
    assert np.array_equal(a.values, b.values)


def test_single_minority_sample_is_left_alone():
    X = np.arange(12.0).reshape(6, 2)
    y = np.array([0, 0, 0, 0, 0, 1])
    result = resample(X, y, ResamplePlan("smote", "minority"))
    assert result.values is X or np.array_equal(result.values, X)
    assert "skipped" in result.note


def test_invalid_strategy_for_family():
    with pytest.raises(ValueError, match="not valid"):
        ResamplePlan("random_under", "minority")
    with pytest.raises(ValueError, match="not valid"):
        ResamplePlan("smote", "majority")


def test_plan_from_inactive_config():
    config = sample(baseline_space(), 0)
    assert not config.is_active(RESAMPLING)
    assert plan_from_config(config, seed=0) is None
