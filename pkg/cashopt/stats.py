"""Confidence intervals and ROC confidence bands for per-split metric values."""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt
from typing import Any, Sequence

import numpy as np
from scipy import stats as sps

CORRECTED_T = "corrected_resampled_t"
BOOTSTRAP_NORMAL = "bootstrap_normal"

BAND_COVERAGE = 0.95
ROC_GRID_POINTS = 101
NORMAL_Z_975 = 1.96


class StatsError(ValueError):
    """Raised when an interval or band cannot be computed from its input."""


@dataclass(frozen=True)
class ConfidenceInterval:
    """Point estimate with raw (unclamped) bounds; ``clamped()`` gives reporting bounds."""

    mean: float
    lower: float
    upper: float
    method: str

    @property
    def half_width(self) -> float:
        return (self.upper - self.lower) / 2.0

    def clamped(self, low: float = 0.0, high: float = 1.0) -> "ConfidenceInterval":
        return ConfidenceInterval(
            mean=self.mean,
            lower=min(max(self.lower, low), high),
            upper=min(max(self.upper, low), high),
            method=self.method,
        )

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_dict(self) -> dict[str, Any]:
        return {"mean": self.mean, "lower": self.lower, "upper": self.upper, "method": self.method}


@dataclass(frozen=True)
class RocBand:
    """Vertically averaged ROC curve with a fixed-width band."""

    fpr: np.ndarray
    mean_tpr: np.ndarray
    half_width: float
    coverage: float

    @property
    def lower(self) -> np.ndarray:
        return np.clip(self.mean_tpr - self.half_width, 0.0, 1.0)

    @property
    def upper(self) -> np.ndarray:
        return np.clip(self.mean_tpr + self.half_width, 0.0, 1.0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "half_width": self.half_width,
            "coverage": self.coverage,
            "fpr": [float(v) for v in self.fpr],
            "mean_tpr": [float(v) for v in self.mean_tpr],
        }


def t_quantile(df: int, p: float) -> float:
    """Student-t quantile."""
    if df < 1:
        raise StatsError(f"degrees of freedom must be >= 1, got {df}")
    if not 0.0 < p < 1.0:
        raise StatsError(f"p must be in (0, 1), got {p}")
    if p == 0.5:
        return 0.0
    return float(sps.t.ppf(p, df))


def corrected_resampled_t_ci(
    values: Sequence[float], n_train: int, n_test: int, confidence: float = 0.95
) -> ConfidenceInterval:
    """Mean +/- t_{k-1} * sqrt((1/k + n_test/n_train) * s^2).

    The n_test/n_train term accounts for the overlap between the training sets
    of repeated random splits.
    """
    arr = np.asarray(values, dtype=float)
    k = arr.size
    if k < 2:
        raise StatsError(f"a corrected resampled t interval needs >= 2 values, got {k}")
    if n_train <= 0 or n_test <= 0:
        raise StatsError(f"n_train and n_test must be > 0, got {n_train}, {n_test}")
    mean = float(arr.mean())
    variance = float(arr.var(ddof=1))
    quantile = t_quantile(k - 1, 1.0 - (1.0 - confidence) / 2.0)
    half = quantile * sqrt((1.0 / k + n_test / n_train) * variance)
    return ConfidenceInterval(mean=mean, lower=mean - half, upper=mean + half, method=CORRECTED_T)


def bootstrap_normal_ci(
    point_estimate: float, bootstrap_values: Sequence[float]
) -> ConfidenceInterval:
    """Point estimate +/- 1.96 * sd of the bootstrap distribution."""
    arr = np.asarray(bootstrap_values, dtype=float)
    if arr.size < 2:
        raise StatsError(f"a bootstrap interval needs >= 2 values, got {arr.size}")
    half = NORMAL_Z_975 * float(arr.std(ddof=1))
    return ConfidenceInterval(
        mean=float(point_estimate),
        lower=float(point_estimate) - half,
        upper=float(point_estimate) + half,
        method=BOOTSTRAP_NORMAL,
    )


def tpr_on_grid(curve: Sequence[tuple], grid: np.ndarray) -> np.ndarray:
    """Staircase TPR at each grid FPR: the highest TPR reached at fpr <= grid value."""
    points = sorted((float(pt[0]), float(pt[1])) for pt in curve)
    fpr = np.array([pt[0] for pt in points])
    tpr = np.maximum.accumulate(np.array([pt[1] for pt in points]))
    idx = np.searchsorted(fpr, grid, side="right") - 1
    return np.where(idx >= 0, tpr[np.clip(idx, 0, None)], 0.0)


def roc_band(curves: Sequence[Sequence[tuple]], n_grid: int = ROC_GRID_POINTS) -> RocBand:
    """Mean curve by vertical averaging plus the smallest fixed half-width covering >= 95%.

    A curve is covered when its TPR stays within +/- half-width of the mean at
    every grid point.
    """
    if len(curves) < 2:
        raise StatsError(f"a ROC band needs >= 2 curves, got {len(curves)}")
    grid = np.linspace(0.0, 1.0, n_grid)
    tprs = np.stack([tpr_on_grid(curve, grid) for curve in curves])
    mean_tpr = tprs.mean(axis=0)
    distances = np.sort(np.abs(tprs - mean_tpr).max(axis=1))
    m = len(curves)
    needed = int(np.ceil(round(BAND_COVERAGE * m, 9)))
    half_width = float(distances[needed - 1])
    coverage = float(np.mean(np.abs(tprs - mean_tpr).max(axis=1) <= half_width))
    return RocBand(fpr=grid, mean_tpr=mean_tpr, half_width=half_width, coverage=coverage)


def summarize(values: Sequence[float]) -> dict[str, float]:
    """Mean, sample std, min and max of a list of metric values."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise StatsError("cannot summarise an empty list")
    return {
        "mean": float(arr.mean()),
        "std": float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
        "min": float(arr.min()),
        "max": float(arr.max()),
        "n": int(arr.size),
    }
