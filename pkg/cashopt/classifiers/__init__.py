"""Binary classifiers for workflow step 10."""

from .base import BaseClassifier, ClassifierConfig, DimensionMismatchError
from .registry import CLASSIFIER_CHOICES, REGISTRY, ClassifierRegistry, build_classifier

__all__ = [
    "BaseClassifier",
    "ClassifierConfig",
    "DimensionMismatchError",
    "ClassifierRegistry",
    "CLASSIFIER_CHOICES",
    "REGISTRY",
    "build_classifier",
]
