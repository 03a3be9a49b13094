"""Synthetic datasets with controllable signal, for tests and desk-scale runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FeatureDataset

SYNTH_GROUPS = ("histogram", "shape", "texture_GLCM")


@dataclass(frozen=True)
class SynthSpec:
    """Generator settings.

    Attributes:
        n_samples: Number of rows.
        n_signal_features: Features whose class-conditional means differ.
        n_noise_features: Features independent of the label.
        class_separation: Standardized mean difference between the classes.
        class_ratio: Fraction of samples in class 0.
        missing_fraction: Fraction of feature cells replaced by NaN.
        seed: Generator seed.
    """

    n_samples: int = 100
    n_signal_features: int = 5
    n_noise_features: int = 45
    class_separation: float = 2.0
    class_ratio: float = 0.5
    missing_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        problems = []
        if self.n_samples < 4:
            problems.append(f"n_samples must be >= 4, got {self.n_samples}")
        if self.n_signal_features < 0 or self.n_noise_features < 0:
            problems.append("feature counts must be non-negative")
        if self.n_signal_features + self.n_noise_features < 1:
            problems.append("at least one feature is required")
        if not 0.0 <= self.class_ratio <= 1.0:
            problems.append(f"class_ratio must be in [0, 1], got {self.class_ratio}")
        if not 0.0 <= self.missing_fraction <= 1.0:
            problems.append(f"missing_fraction must be in [0, 1], got {self.missing_fraction}")
        if self.class_separation < 0:
            problems.append(f"class_separation must be >= 0, got {self.class_separation}")
        if self.seed < 0:
            problems.append(f"seed must be >= 0, got {self.seed}")
        if not problems:
            n0 = int(round(self.n_samples * self.class_ratio))
            if min(n0, self.n_samples - n0) < 2:
                problems.append("class_ratio leaves fewer than 2 samples in a class")
        if problems:
            raise ValueError("invalid synthetic spec: " + "; ".join(problems))


def generate(spec: SynthSpec) -> FeatureDataset:
    """Draw a dataset: normal class-conditionals for signal, pure noise elsewhere."""
    rng = np.random.default_rng(spec.seed)
    n0 = int(round(spec.n_samples * spec.class_ratio))
    labels = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(spec.n_samples - n0, np.int64)])
    labels = rng.permutation(labels)

    # Class means at -sep/2 and +sep/2 keep the overall mean near zero.
    shift = np.where(labels == 1, 0.5, -0.5) * spec.class_separation
    signal = rng.standard_normal((spec.n_samples, spec.n_signal_features)) + shift[:, None]
    noise = rng.standard_normal((spec.n_samples, spec.n_noise_features))
    values = np.hstack([signal, noise])

    n_cells = values.size
    n_missing = int(round(spec.missing_fraction * n_cells))
    if n_missing:
        flat = rng.choice(n_cells, size=n_missing, replace=False)
        values.flat[flat] = np.nan

    names = [f"signal_{i}" for i in range(spec.n_signal_features)]
    names += [f"noise_{i}" for i in range(spec.n_noise_features)]
    groups = [SYNTH_GROUPS[j % len(SYNTH_GROUPS)] for j in range(len(names))]
    width = len(str(spec.n_samples))
    return FeatureDataset(
        sample_ids=tuple(f"S{i:0{width}d}" for i in range(spec.n_samples)),
        feature_names=tuple(names),
        group_tags=tuple(groups),
        values=values,
        labels=labels,
    )
