"""Classifier registry: maps a choice name to a factory."""

from typing import Any, Callable, Dict, List, Mapping

from .adaboost import AdaBoostClassifier
from .base import BaseClassifier, ClassifierConfig
from .boosting import GradientBoostingClassifier
from .discriminant import LDAClassifier, QDAClassifier
from .forest import RandomForest
from .logistic import LogisticRegressionClassifier
from .naive_bayes import GaussianNBClassifier
from .svm import SVMClassifier

Factory = Callable[[Mapping[str, Any], int], BaseClassifier]


class ClassifierRegistry:
    """Registry for managing all available classifiers."""

    def __init__(self):
        self._factories: Dict[str, Factory] = {}

    def register(self, name: str, factory: Factory):
        """Register a factory taking (params, seed).

        Args:
            name: Choice name as used in the search space
            factory: Callable building an unfitted classifier
        """
        self._factories[name] = factory

    def build(self, config: ClassifierConfig) -> BaseClassifier:
        """Build an unfitted classifier.

        Raises:
            KeyError: If the choice is not registered
        """
        if config.choice not in self._factories:
            raise KeyError(f"Classifier not found: {config.choice}")
        return self._factories[config.choice](config.params, config.seed)

    def list_choices(self) -> List[str]:
        return list(self._factories)

    def __contains__(self, name: str) -> bool:
        return name in self._factories

    def __len__(self) -> int:
        return len(self._factories)


def _default_registry() -> ClassifierRegistry:
    registry = ClassifierRegistry()
    registry.register(
        "svm",
        lambda p, seed: SVMClassifier(
            kernel=p["kernel"],
            C=p["C"],
            degree=p["degree"],
            coef0=p["coef0"],
            gamma=p["gamma"],
            seed=seed,
        ),
    )
    registry.register(
        "random_forest",
        lambda p, seed: RandomForest(
            n_estimators=p["n_estimators"],
            min_samples_split=p["min_samples_split"],
            max_depth=p["max_depth"],
            seed=seed,
        ),
    )
    registry.register(
        "logistic_regression",
        lambda p, seed: LogisticRegressionClassifier(
            C=p["C"], solver=p["solver"], penalty=p["penalty"], l1_ratio=p["l1_ratio"], seed=seed
        ),
    )
    registry.register(
        "lda",
        lambda p, seed: LDAClassifier(solver=p["solver"], shrinkage=p["shrinkage"], seed=seed),
    )
    registry.register("qda", lambda p, seed: QDAClassifier(reg_param=p["reg_param"], seed=seed))
    registry.register(
        "gaussian_nb",
        lambda p, seed: GaussianNBClassifier(var_smoothing=p["var_smoothing"], seed=seed),
    )
    registry.register(
        "adaboost",
        lambda p, seed: AdaBoostClassifier(
            n_estimators=p["n_estimators"], learning_rate=p["learning_rate"], seed=seed
        ),
    )
    registry.register(
        "xgboost",
        lambda p, seed: GradientBoostingClassifier(
            n_rounds=p["n_rounds"],
            max_depth=p["max_depth"],
            learning_rate=p["learning_rate"],
            gamma=p["gamma"],
            min_child_weight=p["min_child_weight"],
            subsample=p["subsample"],
            seed=seed,
        ),
    )
    return registry


REGISTRY = _default_registry()
CLASSIFIER_CHOICES = tuple(REGISTRY.list_choices())


def build_classifier(config: ClassifierConfig) -> BaseClassifier:
    return REGISTRY.build(config)
