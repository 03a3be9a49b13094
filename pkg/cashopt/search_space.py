"""Joint workflow search space and random sampling of complete workflow configs.

The space is an ordered list of ten component slots (group-wise selection,
imputation, variance threshold, scaling, RELIEF, model-based selection, PCA,
univariate testing, resampling, classification). A slot may carry an
*activator* (Bernoulli: is the step used?), a *selector* (which of the slot's
algorithms is used?) and per-algorithm hyperparameter distributions.

Spaces round-trip through plain dicts / YAML so users can restrict or extend
them (see config/README.md for the schema).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import numpy as np
import yaml

from .dataset import GROUP_VOCABULARY

# Slot names, in workflow order.
GROUPWISE = "groupwise_selection"
IMPUTATION = "imputation"
VARIANCE = "variance_threshold"
SCALING = "scaling"
RELIEF = "relief"
SELECT_FROM_MODEL = "select_from_model"
PCA = "pca"
UNIVARIATE = "univariate"
RESAMPLING = "resampling"
CLASSIFICATION = "classification"

STEP_ORDER = (
    GROUPWISE,
    IMPUTATION,
    VARIANCE,
    SCALING,
    RELIEF,
    SELECT_FROM_MODEL,
    PCA,
    UNIVARIATE,
    RESAMPLING,
    CLASSIFICATION,
)

IMPUTATION_METHODS = ("mean", "median", "mode", "constant_zero", "knn")
SFM_MODELS = ("lasso", "logistic_regression", "random_forest")
PCA_VARIANTS = ("var95", "n10", "n50", "n100")
RESAMPLING_METHODS = (
    "random_under",
    "random_over",
    "near_miss",
    "neighborhood_cleaning",
    "smote",
    "adasyn",
)
SMOTE_KINDS = ("regular", "borderline", "tomek", "enn")
UNDERSAMPLING_STRATEGIES = ("not_minority", "majority", "not_majority", "all")
OVERSAMPLING_STRATEGIES = ("minority", "not_minority", "not_majority", "all")
CLASSIFIERS = (
    "svm",
    "random_forest",
    "logistic_regression",
    "lda",
    "qda",
    "gaussian_nb",
    "adaboost",
    "xgboost",
)


# ---------------------------------------------------------------------------
# Distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Bernoulli:
    """True with probability p."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"Bernoulli p must be in [0, 1], got {self.p}")

    def sample(self, rng: np.random.Generator) -> bool:
        return bool(rng.random() < self.p)

    def contains(self, value: Any) -> bool:
        return isinstance(value, bool)

    def to_dict(self) -> dict[str, Any]:
        return {"type": "bernoulli", "p": self.p}


@dataclass(frozen=True)
class Categorical:
    """Uniform choice among a fixed list of options."""

    options: tuple

    def __post_init__(self):
        object.__setattr__(self, "options", tuple(self.options))
        if not self.options:
            raise ValueError("Categorical needs at least one option")

    def sample(self, rng: np.random.Generator) -> Any:
        return self.options[int(rng.integers(len(self.options)))]

    def contains(self, value: Any) -> bool:
        return value in self.options

    def to_dict(self) -> dict[str, Any]:
        return {"type": "categorical", "options": list(self.options)}


@dataclass(frozen=True)
class Uniform:
    """Continuous uniform on [min, max]."""

    min: float
    max: float

    def __post_init__(self):
        if self.min > self.max:
            raise ValueError(f"Uniform min {self.min} > max {self.max}")

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.min, self.max))

    def contains(self, value: Any) -> bool:
        return isinstance(value, float) and self.min <= value <= self.max

    def to_dict(self) -> dict[str, Any]:
        return {"type": "uniform", "min": self.min, "max": self.max}


@dataclass(frozen=True)
class UniformInt:
    """Discrete uniform on the integers min..max (inclusive)."""

    min: int
    max: int

    def __post_init__(self):
        if self.min > self.max:
            raise ValueError(f"UniformInt min {self.min} > max {self.max}")

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.integers(self.min, self.max + 1))

    def contains(self, value: Any) -> bool:
        return isinstance(value, int) and self.min <= value <= self.max

    def to_dict(self) -> dict[str, Any]:
        return {"type": "uniform_int", "min": self.min, "max": self.max}


@dataclass(frozen=True)
class LogUniform:
    """Uniform in log10 space between two strictly positive bounds."""

    min: float
    max: float

    def __post_init__(self):
        if not (self.min > 0 and self.max > 0):
            raise ValueError(f"LogUniform bounds must be > 0, got ({self.min}, {self.max})")
        if self.min > self.max:
            raise ValueError(f"LogUniform min {self.min} > max {self.max}")

    def sample(self, rng: np.random.Generator) -> float:
        exponent = rng.uniform(math.log10(self.min), math.log10(self.max))
        # Exponentiation can overshoot the bound by one ulp.
        return float(min(max(10.0**exponent, self.min), self.max))

    def contains(self, value: Any) -> bool:
        return isinstance(value, float) and self.min <= value <= self.max

    def to_dict(self) -> dict[str, Any]:
        return {"type": "log_uniform", "min": self.min, "max": self.max}


Distribution = Union[Bernoulli, Categorical, Uniform, UniformInt, LogUniform]

_DISTRIBUTION_TYPES = {
    "bernoulli": lambda d: Bernoulli(float(d["p"])),
    "categorical": lambda d: Categorical(tuple(d["options"])),
    "uniform": lambda d: Uniform(float(d["min"]), float(d["max"])),
    "uniform_int": lambda d: UniformInt(int(d["min"]), int(d["max"])),
    "log_uniform": lambda d: LogUniform(float(d["min"]), float(d["max"])),
}


def distribution_from_dict(raw: Mapping[str, Any]) -> Distribution:
    """Rebuild a distribution from its to_dict() form."""
    kind = raw.get("type")
    if kind not in _DISTRIBUTION_TYPES:
        raise ValueError(f"unknown distribution type {kind!r}")
    try:
        return _DISTRIBUTION_TYPES[kind](raw)
    except KeyError as e:
        raise ValueError(f"{kind} distribution is missing field {e}") from e


# ---------------------------------------------------------------------------
# Search space
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComponentSlot:
    """One workflow step: optional activator, optional selector, per-algorithm params.

    ``selector`` draws either an algorithm name (Categorical) or a 1-based index
    into ``algorithms`` (UniformInt). Slots with a single algorithm have no selector.
    """

    step: int
    name: str
    algorithms: tuple[str, ...]
    activator: Optional[Distribution] = None
    selector: Optional[Distribution] = None
    params: Mapping[str, Mapping[str, Distribution]] = field(default_factory=dict)

    def resolve_algorithm(self, drawn: Any) -> str:
        if self.selector is None:
            return self.algorithms[0]
        if isinstance(self.selector, UniformInt):
            return self.algorithms[int(drawn) - 1]
        return str(drawn)

    def to_dict(self) -> dict[str, Any]:
        return {
            "step": self.step,
            "name": self.name,
            "algorithms": list(self.algorithms),
            "activator": self.activator.to_dict() if self.activator else None,
            "selector": self.selector.to_dict() if self.selector else None,
            "params": {
                alg: {name: dist.to_dict() for name, dist in dists.items()}
                for alg, dists in self.params.items()
            },
        }


@dataclass(frozen=True)
class SearchSpace:
    """Ordered component slots plus the fingerprint's resampling mask."""

    slots: tuple[ComponentSlot, ...]
    resampling_enabled: bool = True

    def __post_init__(self):
        names = tuple(s.name for s in self.slots)
        if names != STEP_ORDER:
            raise ValueError(f"slots must follow the workflow order {STEP_ORDER}, got {names}")
        for slot in self.slots:
            _validate_slot(slot)

    def slot(self, name: str) -> ComponentSlot:
        for s in self.slots:
            if s.name == name:
                return s
        raise KeyError(f"no slot named {name!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "resampling_enabled": self.resampling_enabled,
            "slots": [s.to_dict() for s in self.slots],
        }


def _validate_slot(slot: ComponentSlot) -> None:
    if not slot.algorithms:
        raise ValueError(f"slot {slot.name!r} lists no algorithms")
    if slot.selector is None and len(slot.algorithms) != 1:
        raise ValueError(f"slot {slot.name!r} has several algorithms but no selector")
    if isinstance(slot.selector, UniformInt):
        if slot.selector.min < 1 or slot.selector.max > len(slot.algorithms):
            raise ValueError(
                f"slot {slot.name!r}: selector range {slot.selector.min}..{slot.selector.max} "
                f"does not index {len(slot.algorithms)} algorithms"
            )
    elif isinstance(slot.selector, Categorical):
        unknown = set(slot.selector.options) - set(slot.algorithms)
        if unknown:
            raise ValueError(f"slot {slot.name!r}: selector options {sorted(unknown)} unknown")
    elif slot.selector is not None:
        raise ValueError(f"slot {slot.name!r}: selector must be categorical or uniform_int")
    if slot.activator is not None and not isinstance(slot.activator, Bernoulli):
        raise ValueError(f"slot {slot.name!r}: activator must be bernoulli")
    unknown = set(slot.params) - set(slot.algorithms)
    if unknown:
        raise ValueError(f"slot {slot.name!r}: params for unknown algorithm(s) {sorted(unknown)}")


def _resampling_params() -> dict[str, dict[str, Distribution]]:
    under = Categorical(UNDERSAMPLING_STRATEGIES)
    over = Categorical(OVERSAMPLING_STRATEGIES)
    neighbors = UniformInt(3, 15)
    return {
        "random_under": {"strategy": under},
        "random_over": {"strategy": over},
        "near_miss": {"strategy": under},
        "neighborhood_cleaning": {
            "strategy": under,
            "n_neighbors": neighbors,
            "cleaning_threshold": Uniform(0.25, 0.75),
        },
        "smote": {"kind": Categorical(SMOTE_KINDS), "strategy": over, "n_neighbors": neighbors},
        "adasyn": {"strategy": over, "n_neighbors": neighbors},
    }


def _classifier_params() -> dict[str, dict[str, Distribution]]:
    return {
        "svm": {
            "kernel": Categorical(("linear", "poly", "rbf")),
            "C": LogUniform(1e0, 1e6),
            "degree": UniformInt(1, 7),
            "coef0": Uniform(0.0, 1.0),
            "gamma": LogUniform(1e-5, 1e5),
        },
        "random_forest": {
            "n_estimators": UniformInt(10, 100),
            "min_samples_split": UniformInt(2, 5),
            "max_depth": UniformInt(5, 10),
        },
        "logistic_regression": {
            "C": Uniform(0.01, 1.0),
            "solver": Categorical(("lbfgs", "saga")),
            "penalty": Categorical(("l1", "l2", "elasticnet")),
            "l1_ratio": Uniform(0.0, 1.0),
        },
        "lda": {
            "solver": Categorical(("svd", "lsqr", "eigen")),
            "shrinkage": LogUniform(1e-5, 1e5),
        },
        "qda": {"reg_param": LogUniform(1e-5, 1e5)},
        "gaussian_nb": {"var_smoothing": Uniform(0.0, 1.0)},
        "adaboost": {
            "n_estimators": UniformInt(10, 100),
            "learning_rate": LogUniform(0.01, 1.0),
        },
        "xgboost": {
            "n_rounds": UniformInt(10, 100),
            "max_depth": UniformInt(3, 15),
            "learning_rate": LogUniform(0.01, 1.0),
            "gamma": Uniform(0.01, 10.0),
            "min_child_weight": UniformInt(1, 7),
            "subsample": Uniform(0.3, 1.0),
        },
    }


def default_space(resampling_enabled: bool = True) -> SearchSpace:
    """The full default workflow search space.

    Args:
        resampling_enabled: Fingerprint mask; False forces the resampling
            activator to Bernoulli(0.0).
    """
    slots = (
        ComponentSlot(
            1,
            GROUPWISE,
            ("groupwise",),
            activator=Bernoulli(1.0),
            params={"groupwise": {g: Bernoulli(0.5) for g in GROUP_VOCABULARY}},
        ),
        ComponentSlot(
            2,
            IMPUTATION,
            IMPUTATION_METHODS,
            selector=Categorical(IMPUTATION_METHODS),
            params={"knn": {"n_neighbors": UniformInt(5, 10)}},
        ),
        ComponentSlot(3, VARIANCE, ("variance_threshold",), activator=Bernoulli(1.0)),
        ComponentSlot(4, SCALING, ("robust_zscore",)),
        ComponentSlot(
            5,
            RELIEF,
            ("relief",),
            activator=Bernoulli(0.2),
            params={
                "relief": {
                    "n_neighbors": UniformInt(2, 6),
                    "sample_size": Uniform(0.75, 0.95),
                    "distance_p": UniformInt(1, 4),
                    "n_features": UniformInt(10, 50),
                }
            },
        ),
        ComponentSlot(
            6,
            SELECT_FROM_MODEL,
            SFM_MODELS,
            activator=Bernoulli(0.2),
            selector=Categorical(SFM_MODELS),
            params={
                "lasso": {"alpha": Uniform(0.1, 1.5)},
                "random_forest": {"n_trees": UniformInt(10, 100)},
            },
        ),
        ComponentSlot(
            7, PCA, PCA_VARIANTS, activator=Bernoulli(0.2), selector=Categorical(PCA_VARIANTS)
        ),
        ComponentSlot(
            8,
            UNIVARIATE,
            ("mann_whitney",),
            activator=Bernoulli(0.2),
            params={"mann_whitney": {"threshold": LogUniform(1e-3, 10**-2.5)}},
        ),
        ComponentSlot(
            9,
            RESAMPLING,
            RESAMPLING_METHODS,
            activator=Bernoulli(0.2 if resampling_enabled else 0.0),
            selector=UniformInt(1, len(RESAMPLING_METHODS)),
            params=_resampling_params(),
        ),
        ComponentSlot(
            10,
            CLASSIFICATION,
            CLASSIFIERS,
            selector=UniformInt(1, len(CLASSIFIERS)),
            params=_classifier_params(),
        ),
    )
    return SearchSpace(slots=slots, resampling_enabled=resampling_enabled)


def baseline_space() -> SearchSpace:
    """Restricted space: LASSO feature selection + logistic regression.

    Imputation and scaling are kept; every other optional step is switched off
    and all features are kept by the group-wise step.
    """
    full = default_space(resampling_enabled=False)
    classifier_params = _classifier_params()
    replaced = {
        GROUPWISE: ComponentSlot(
            1,
            GROUPWISE,
            ("groupwise",),
            activator=Bernoulli(0.0),
            params={"groupwise": {g: Bernoulli(1.0) for g in GROUP_VOCABULARY}},
        ),
        VARIANCE: ComponentSlot(3, VARIANCE, ("variance_threshold",), activator=Bernoulli(0.0)),
        RELIEF: _switched_off(full.slot(RELIEF)),
        SELECT_FROM_MODEL: ComponentSlot(
            6,
            SELECT_FROM_MODEL,
            ("lasso",),
            activator=Bernoulli(1.0),
            selector=Categorical(("lasso",)),
            params={"lasso": {"alpha": Uniform(0.1, 1.5)}},
        ),
        PCA: _switched_off(full.slot(PCA)),
        UNIVARIATE: _switched_off(full.slot(UNIVARIATE)),
        RESAMPLING: _switched_off(full.slot(RESAMPLING)),
        CLASSIFICATION: ComponentSlot(
            10,
            CLASSIFICATION,
            ("logistic_regression",),
            selector=Categorical(("logistic_regression",)),
            params={"logistic_regression": classifier_params["logistic_regression"]},
        ),
    }
    slots = tuple(replaced.get(s.name, s) for s in full.slots)
    return SearchSpace(slots=slots, resampling_enabled=False)


def _switched_off(slot: ComponentSlot) -> ComponentSlot:
    return ComponentSlot(
        slot.step,
        slot.name,
        slot.algorithms,
        activator=Bernoulli(0.0),
        selector=slot.selector,
        params=slot.params,
    )


# ---------------------------------------------------------------------------
# Workflow configs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepChoice:
    """Sampled values for one slot: whether it runs, which algorithm, its params."""

    active: bool
    algorithm: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"active": self.active, "algorithm": self.algorithm, "params": dict(self.params)}


@dataclass(frozen=True)
class WorkflowConfig:
    """One complete point in the search space plus the seed for its stochastic steps."""

    steps: Mapping[str, StepChoice]
    rng_seed: int

    def step(self, name: str) -> StepChoice:
        return self.steps[name]

    def is_active(self, name: str) -> bool:
        return self.steps[name].active

    @property
    def classifier(self) -> str:
        return self.steps[CLASSIFICATION].algorithm

    def to_dict(self) -> dict[str, Any]:
        return {
            "rng_seed": self.rng_seed,
            "steps": {name: self.steps[name].to_dict() for name in STEP_ORDER},
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "WorkflowConfig":
        steps = {
            name: StepChoice(
                active=bool(step["active"]),
                algorithm=str(step["algorithm"]),
                params=dict(step.get("params", {})),
            )
            for name, step in raw["steps"].items()
        }
        return cls(steps=steps, rng_seed=int(raw["rng_seed"]))


def sample(space: SearchSpace, seed: int) -> WorkflowConfig:
    """Draw one WorkflowConfig; every hyperparameter is drawn independently.

    All distributions are drawn in a fixed order whatever the selector picks, so a
    seed maps to the same values for every slot regardless of earlier choices.
    """
    rng = np.random.default_rng(seed)
    steps: dict[str, StepChoice] = {}
    for slot in space.slots:
        active = slot.activator.sample(rng) if slot.activator is not None else True
        drawn = slot.selector.sample(rng) if slot.selector is not None else None
        algorithm = slot.resolve_algorithm(drawn)
        params_by_algorithm = {
            alg: {name: dist.sample(rng) for name, dist in dists.items()}
            for alg, dists in slot.params.items()
        }
        steps[slot.name] = StepChoice(
            active=active, algorithm=algorithm, params=params_by_algorithm.get(algorithm, {})
        )
    return WorkflowConfig(steps=steps, rng_seed=int(rng.integers(0, 2**32 - 1)))


def derive_seed(master_seed: int, split_index: int, sample_index: int) -> int:
    """Per-workflow seed that does not depend on execution order."""
    state = np.random.SeedSequence((master_seed, split_index, sample_index)).generate_state(1)
    return int(state[0])


# Non-sampling seed streams. The spawn key keeps them apart from every
# (master, split, sample) workflow seed.
INNER_SPLIT_STREAM = 1
OUTER_SPLIT_STREAM = 2
FORWARD_SELECTION_STREAM = 3
BOOTSTRAP_STREAM = 4


def stream_seed(master_seed: int, split_index: int, stream: int) -> int:
    """Seed for one purpose (inner splits, outer split, bagging, bootstrap) of one split."""
    seq = np.random.SeedSequence((master_seed, split_index), spawn_key=(stream,))
    return int(seq.generate_state(1)[0])


def config_digest(config: WorkflowConfig) -> str:
    """Short SHA-256 digest of a config's canonical JSON."""
    canonical = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------


def space_to_dict(space: SearchSpace) -> dict[str, Any]:
    return space.to_dict()


def space_from_dict(raw: Mapping[str, Any]) -> SearchSpace:
    """Rebuild (and validate) a space from its dict form."""
    try:
        slots = []
        for entry in raw["slots"]:
            activator = entry.get("activator")
            selector = entry.get("selector")
            slots.append(
                ComponentSlot(
                    step=int(entry["step"]),
                    name=str(entry["name"]),
                    algorithms=tuple(entry["algorithms"]),
                    activator=distribution_from_dict(activator) if activator else None,
                    selector=distribution_from_dict(selector) if selector else None,
                    params={
                        alg: {n: distribution_from_dict(d) for n, d in dists.items()}
                        for alg, dists in (entry.get("params") or {}).items()
                    },
                )
            )
    except (KeyError, TypeError) as e:
        raise ValueError(f"malformed search space: {e}") from e
    return SearchSpace(slots=tuple(slots), resampling_enabled=bool(raw.get("resampling_enabled")))


def save_space(space: SearchSpace, path: str | Path) -> None:
    Path(path).write_text(
        yaml.safe_dump(space.to_dict(), sort_keys=False, default_flow_style=False),
        encoding="utf-8",
    )


def load_space(path: str | Path) -> SearchSpace:
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as e:
        raise ValueError(f"cannot read search space {path}: {e}") from e
    if not isinstance(raw, dict):
        raise ValueError(f"search space file {path} must contain a mapping")
    return space_from_dict(raw)


def with_resampling_mask(space: SearchSpace, resampling_enabled: bool) -> SearchSpace:
    """Apply the fingerprint mask: a disabled mask forces the resampling activator off."""
    if resampling_enabled:
        return SearchSpace(slots=space.slots, resampling_enabled=space.resampling_enabled)
    slots = tuple(
        _switched_off(s) if s.name == RESAMPLING else s for s in space.slots
    )
    return SearchSpace(slots=slots, resampling_enabled=False)
