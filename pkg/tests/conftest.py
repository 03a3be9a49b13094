"""Shared fixtures: small synthetic datasets and a fast optimizer config."""

import pytest

from cashopt.optimizer import OptimizerConfig
from cashopt.synth import SynthSpec, generate


@pytest.fixture
def small_dataset():
    """40 samples, 3 informative and 5 noise features, balanced."""
    return generate(
        SynthSpec(n_samples=40, n_signal_features=3, n_noise_features=5, class_separation=3.0)
    )


@pytest.fixture
def imbalanced_dataset():
    """60 samples at 75/25, so resampling stays in the search space."""
    return generate(
        SynthSpec(
            n_samples=60,
            n_signal_features=3,
            n_noise_features=5,
            class_separation=3.0,
            class_ratio=0.75,
            seed=3,
        )
    )


@pytest.fixture
def fast_optimizer():
    return OptimizerConfig(
        n_random_search=6, n_ensemble=3, k_training=2, n_bags=3, max_rounds=3, max_fit_number=4
    )
