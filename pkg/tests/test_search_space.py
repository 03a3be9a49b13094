"""Tests for distributions, the default spaces, sampling and seed derivation."""

import numpy as np
import pytest

from cashopt.search_space import (
    CLASSIFICATION,
    CLASSIFIERS,
    RESAMPLING,
    SELECT_FROM_MODEL,
    STEP_ORDER,
    Bernoulli,
    Categorical,
    ComponentSlot,
    LogUniform,
    SearchSpace,
    Uniform,
    UniformInt,
    WorkflowConfig,
    baseline_space,
    config_digest,
    default_space,
    derive_seed,
    distribution_from_dict,
    load_space,
    sample,
    save_space,
    stream_seed,
    with_resampling_mask,
)


class TestDistributions:
    def test_uniform_int_is_inclusive(self):
        rng = np.random.default_rng(0)
        draws = {UniformInt(1, 3).sample(rng) for _ in range(200)}
        assert draws == {1, 2, 3}

    def test_log_uniform_bounds_and_spread(self):
        rng = np.random.default_rng(1)
        dist = LogUniform(1e-5, 1e5)
        draws = np.array([dist.sample(rng) for _ in range(2000)])
        assert draws.min() >= 1e-5 and draws.max() <= 1e5
        # Half the mass lies below the geometric midpoint 1.
        assert np.mean(draws < 1.0) == pytest.approx(0.5, abs=0.05)

    def test_bernoulli_extremes(self):
        rng = np.random.default_rng(2)
        assert not any(Bernoulli(0.0).sample(rng) for _ in range(50))
        assert all(Bernoulli(1.0).sample(rng) for _ in range(50))

    def test_categorical_draws_options(self):
        rng = np.random.default_rng(3)
        dist = Categorical(("a", "b"))
        assert {dist.sample(rng) for _ in range(50)} == {"a", "b"}

    @pytest.mark.parametrize(
        "factory",
        [
            lambda: Bernoulli(1.5),
            lambda: Uniform(2.0, 1.0),
            lambda: UniformInt(5, 4),
            lambda: LogUniform(0.0, 1.0),
            lambda: Categorical(()),
        ],
    )
    def test_invalid_parameters(self, factory):
        with pytest.raises(ValueError):
            factory()

    def test_from_dict(self):
        dist = distribution_from_dict({"type": "uniform_int", "min": 2, "max": 6})
        assert dist == UniformInt(2, 6)
        with pytest.raises(ValueError, match="unknown distribution type"):
            distribution_from_dict({"type": "gamma"})
        with pytest.raises(ValueError, match="missing field"):
            distribution_from_dict({"type": "uniform", "min": 0})


class TestSpaces:
    def test_default_space_order(self):
        space = default_space()
        assert tuple(s.name for s in space.slots) == STEP_ORDER
        assert space.slot(CLASSIFICATION).algorithms == CLASSIFIERS

    def test_slot_validation(self):
        def _with_classification(slot):
            return tuple(slot if s.name == CLASSIFICATION else s for s in default_space().slots)

        with pytest.raises(ValueError, match="no selector"):
            SearchSpace(
                slots=_with_classification(ComponentSlot(10, CLASSIFICATION, ("svm", "lda")))
            )
        bad = ComponentSlot(10, CLASSIFICATION, ("svm",), selector=UniformInt(1, 2))
        with pytest.raises(ValueError, match="does not index"):
            SearchSpace(slots=_with_classification(bad))

    def test_wrong_slot_order_rejected(self):
        slots = tuple(reversed(default_space().slots))
        with pytest.raises(ValueError, match="workflow order"):
            SearchSpace(slots=slots)

    def test_resampling_mask_switches_activator_off(self):
        space = with_resampling_mask(default_space(), False)
        assert space.slot(RESAMPLING).activator == Bernoulli(0.0)
        assert not any(sample(space, seed).is_active(RESAMPLING) for seed in range(100))

    def test_mask_never_reenables(self):
        masked = default_space(resampling_enabled=False)
        assert with_resampling_mask(masked, True).slot(RESAMPLING).activator == Bernoulli(0.0)

    def test_baseline_space(self):
        for seed in range(30):
            config = sample(baseline_space(), seed)
            assert config.classifier == "logistic_regression"
            assert config.is_active(SELECT_FROM_MODEL)
            assert config.step(SELECT_FROM_MODEL).algorithm == "lasso"
            assert not config.is_active(RESAMPLING)

    def test_save_and_load(self, tmp_path):
        path = tmp_path / "space.yaml"
        save_space(default_space(), path)
        loaded = load_space(path)
        assert loaded.to_dict() == default_space().to_dict()

    def test_load_rejects_malformed(self, tmp_path):
        path = tmp_path / "space.yaml"
        path.write_text("slots: [{name: pca}]\n", encoding="utf-8")
        with pytest.raises(ValueError, match="malformed search space"):
            load_space(path)


class TestSampling:
    def test_same_seed_same_config(self):
        space = default_space()
        assert sample(space, 42) == sample(space, 42)
        assert config_digest(sample(space, 42)) == config_digest(sample(space, 42))

    def test_sampled_values_lie_in_their_distributions(self):
        space = default_space()
        for seed in range(50):
            config = sample(space, seed)
            for slot in space.slots:
                choice = config.step(slot.name)
                assert choice.algorithm in slot.algorithms
                for name, value in choice.params.items():
                    assert slot.params[choice.algorithm][name].contains(value)

    def test_uniform_int_selector_covers_all_classifiers(self):
        space = default_space()
        seen = {sample(space, seed).classifier for seed in range(300)}
        assert seen == set(CLASSIFIERS)

    def test_config_dict_round_trip(self):
        config = sample(default_space(), 9)
        assert WorkflowConfig.from_dict(config.to_dict()) == config


class TestSeeds:
    def test_derive_seed_is_stable(self):
        assert derive_seed(0, 1, 2) == derive_seed(0, 1, 2)
        assert derive_seed(0, 1, 2) != derive_seed(0, 2, 1)

    def test_streams_do_not_collide_with_sample_seeds(self):
        sample_seeds = {derive_seed(0, s, i) for s in range(3) for i in range(50)}
        streams = {stream_seed(0, s, k) for s in range(3) for k in range(1, 5)}
        assert len(streams) == 12
        assert not sample_seeds & streams
