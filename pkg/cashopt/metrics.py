"""Binary classification metrics from labels, hard predictions and posterior scores.

Class 1 is the positive class. Hard predictions come from thresholding the
posterior at 0.5 (``score >= 0.5`` -> 1).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from sklearn.metrics import auc as trapezoid_area
from sklearn.metrics import confusion_matrix, f1_score, roc_auc_score
from sklearn.metrics import roc_curve as sk_roc_curve

METRIC_NAMES = (
    "auc",
    "f1_weighted",
    "bcr",
    "sensitivity",
    "specificity",
    "precision",
    "recall",
    "accuracy",
)
DEFAULT_THRESHOLD = 0.5


class MetricError(ValueError):
    """Raised when a metric is undefined for its input (e.g. AUC with one class)."""


@dataclass
class MetricSet:
    auc: float
    f1_weighted: float
    bcr: float
    sensitivity: float
    specificity: float
    precision: float
    recall: float
    accuracy: float
    # Names of threshold metrics whose denominator was zero (reported as 0).
    degenerate: list[str] = field(default_factory=list)

    def values(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES}

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def _as_labels(values) -> np.ndarray:
    return np.asarray(values, dtype=np.int64).ravel()


def _check_lengths(a: np.ndarray, b: np.ndarray) -> None:
    if len(a) != len(b):
        raise MetricError(f"length mismatch: {len(a)} labels vs {len(b)} values")
    if len(a) == 0:
        raise MetricError("metrics need at least one sample")


def f1_weighted(labels, predictions) -> float:
    """Support-weighted mean of the per-class F1 scores over both classes.

    A class whose precision + recall is 0 contributes an F1 of 0.
    """
    y, p = _as_labels(labels), _as_labels(predictions)
    _check_lengths(y, p)
    return float(f1_score(y, p, labels=[0, 1], average="weighted", zero_division=0))


def auc(labels, scores) -> float:
    """P(random positive outranks random negative), ties counted as 1/2."""
    y = _as_labels(labels)
    s = np.asarray(scores, dtype=float).ravel()
    _check_lengths(y, s)
    if np.unique(y).size != 2:
        raise MetricError("AUC is undefined when only one class is present")
    return float(roc_auc_score(y, s))


def threshold_metrics(labels, predictions) -> dict[str, Any]:
    """Confusion-matrix metrics; zero denominators give 0 and are listed as degenerate."""
    y, p = _as_labels(labels), _as_labels(predictions)
    _check_lengths(y, p)
    tn, fp, fn, tp = confusion_matrix(y, p, labels=[0, 1]).ravel()
    degenerate: list[str] = []

    def _ratio(name: str, num: int, den: int) -> float:
        if den == 0:
            degenerate.append(name)
            return 0.0
        return float(num) / float(den)

    sensitivity = _ratio("sensitivity", tp, tp + fn)
    specificity = _ratio("specificity", tn, tn + fp)
    precision = _ratio("precision", tp, tp + fp)
    accuracy = float(tp + tn) / float(len(y))
    return {
        "sensitivity": sensitivity,
        "specificity": specificity,
        "precision": precision,
        "recall": sensitivity,
        "accuracy": accuracy,
        "bcr": (sensitivity + specificity) / 2.0,
        "degenerate": degenerate,
    }


def roc_curve(labels, scores) -> list[tuple[float, float, float]]:
    """ROC staircase as (fpr, tpr, threshold) from (0, 0) to (1, 1).

    One point per distinct score plus the (0, 0) start, whose threshold is +inf.
    """
    y = _as_labels(labels)
    s = np.asarray(scores, dtype=float).ravel()
    _check_lengths(y, s)
    if np.unique(y).size != 2:
        raise MetricError("ROC is undefined when only one class is present")
    fpr, tpr, thresholds = sk_roc_curve(y, s, pos_label=1, drop_intermediate=False)
    return [(float(f), float(t), float(th)) for f, t, th in zip(fpr, tpr, thresholds)]


def curve_area(curve: list[tuple[float, float, float]]) -> float:
    """Trapezoidal area under an ROC point list."""
    fpr = np.array([pt[0] for pt in curve])
    tpr = np.array([pt[1] for pt in curve])
    return float(trapezoid_area(fpr, tpr))


def metric_set(labels, scores, threshold: float = DEFAULT_THRESHOLD) -> MetricSet:
    """All metrics for one set of posteriors."""
    scores = np.asarray(scores, dtype=float).ravel()
    predictions = (scores >= threshold).astype(np.int64)
    confusion = threshold_metrics(labels, predictions)
    return MetricSet(
        auc=auc(labels, scores),
        f1_weighted=f1_weighted(labels, predictions),
        **confusion,
    )
