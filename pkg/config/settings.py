"""Configuration management for cashopt runs.

Precedence (lowest first): built-in defaults, environment (.env.local / .env),
YAML run config, command-line overrides.
"""

import copy
import os
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import yaml
from dotenv import load_dotenv

from cashopt.evaluation import MODES, EvaluationConfig
from cashopt.optimizer import ENSEMBLE_METHODS, OptimizerConfig

DEFAULTS_FILE = Path(__file__).parent / "defaults.yaml"

# One (line, field, message) per problem; line is None when not from a file.
Problem = Tuple[Optional[int], str, str]

_OPTIMIZER_DEFAULTS = {
    f.name: f.default for f in fields(OptimizerConfig) if f.name != "master_seed"
}

# section -> key -> (expected type, default, allowed values or None)
SCHEMA: Dict[str, Dict[str, Tuple[type, Any, Optional[tuple]]]] = {
    "dataset": {
        "label_column": (str, "label", None),
        "missing_token": (str, "nan", None),
        "positive_class": (str, None, None),
        "groups": (str, None, None),
    },
    "fingerprint": {
        "metadata": (str, None, None),
    },
    "search_space": {
        "path": (str, None, None),
        "baseline": (bool, False, None),
    },
    "optimizer": {
        name: (
            type(default),
            default,
            ENSEMBLE_METHODS if name == "ensemble_method" else None,
        )
        for name, default in _OPTIMIZER_DEFAULTS.items()
    },
    "evaluation": {
        "mode": (str, "nested_cv", MODES),
        "k_test": (int, 100, None),
        "test_fraction": (float, 0.2, None),
        "n_bootstrap": (int, 1000, None),
        "master_seed": (int, 0, None),
    },
}


class ConfigError(ValueError):
    """Raised when a run config cannot be parsed or fails validation.

    Attributes:
        problems: Every (line, field, message) found, so users fix them in one pass
    """

    def __init__(self, problems: List[Problem], source: Optional[str] = None):
        self.problems = list(problems)
        self.source = source
        where = f" in {source}" if source else ""
        lines = [
            f"  {'line ' + str(line) + ': ' if line is not None else ''}{field}: {message}"
            for line, field, message in self.problems
        ]
        super().__init__(f"invalid configuration{where}:\n" + "\n".join(lines))


def _key_lines(text: str) -> Dict[str, int]:
    """Map 'section' and 'section.key' to 1-based YAML line numbers."""
    lines: Dict[str, int] = {}
    root = yaml.compose(text)
    if not isinstance(root, yaml.MappingNode):
        return lines
    for key_node, value_node in root.value:
        section = str(key_node.value)
        lines[section] = key_node.start_mark.line + 1
        if isinstance(value_node, yaml.MappingNode):
            for sub_key, _ in value_node.value:
                lines[f"{section}.{sub_key.value}"] = sub_key.start_mark.line + 1
    return lines


def _coerce(value: Any, expected: type, allowed: Optional[tuple]) -> Tuple[Any, Optional[str]]:
    """Check one value against its schema entry; returns (value, error message or None)."""
    if value is None:
        return None, None
    if expected is bool:
        if not isinstance(value, bool):
            return value, f"expected true/false, got {value!r}"
    elif expected is int:
        if isinstance(value, bool) or not isinstance(value, int):
            return value, f"expected an integer, got {value!r}"
    elif expected is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return value, f"expected a number, got {value!r}"
        value = float(value)
    elif expected is str:
        if isinstance(value, (dict, list)):
            return value, f"expected text, got {value!r}"
        value = str(value)
    if allowed is not None and value not in allowed:
        return value, f"must be one of {', '.join(allowed)}, got {value!r}"
    return value, None


class Config:
    """Resolved configuration for one cashopt command.

    Loads settings from environment variables, an optional YAML run config and
    command-line overrides, and builds the typed optimizer/evaluation configs.
    """

    def __init__(
        self,
        config_file: Optional[str | Path] = None,
        overrides: Optional[Mapping[str, Any]] = None,
        env_file: Optional[str] = None,
    ):
        """Initialize configuration.

        Args:
            config_file: Optional YAML run config (sections as in defaults.yaml)
            overrides: 'section.key' -> value from the command line; None values are ignored
            env_file: Optional path to .env file. If None, prefers .env.local, then .env

        Raises:
            ConfigError: With every problem found (file line numbers where known)
        """
        if env_file:
            load_dotenv(env_file)
        else:
            # Prefer .env.local (local dev) over .env
            if Path(".env.local").exists():
                load_dotenv(".env.local")
            else:
                load_dotenv(".env")

        self.config_file = str(config_file) if config_file else None
        self.values: Dict[str, Dict[str, Any]] = {
            section: {key: spec[1] for key, spec in keys.items()}
            for section, keys in SCHEMA.items()
        }
        problems: List[Problem] = []

        # Environment
        self.log_level = os.getenv("CASHOPT_LOG_LEVEL", "INFO").upper()
        self.workers = os.cpu_count() or 1
        workers_env = os.getenv("CASHOPT_WORKERS")
        if workers_env:
            try:
                self.workers = max(1, int(workers_env))
            except ValueError:
                problems.append(
                    (None, "CASHOPT_WORKERS", f"expected an integer, got {workers_env!r}")
                )
        seed_env = os.getenv("CASHOPT_MASTER_SEED")
        if seed_env:
            try:
                self.values["evaluation"]["master_seed"] = int(seed_env)
            except ValueError:
                problems.append(
                    (None, "CASHOPT_MASTER_SEED", f"expected an integer, got {seed_env!r}")
                )

        if config_file:
            problems.extend(self._load_file(Path(config_file)))
        if overrides:
            problems.extend(self._apply(self._nest(overrides), lines={}))
        if problems:
            raise ConfigError(problems, source=self.config_file)

        try:
            self.evaluation = self._build_evaluation()
        except ValueError as e:
            raise ConfigError([(None, "optimizer/evaluation", str(e))], self.config_file) from e
        self.optimizer = self.evaluation.optimizer

    # ------------------------------------------------------------------
    # Loading
    # ------------------------------------------------------------------

    @staticmethod
    def _nest(flat: Mapping[str, Any]) -> Dict[str, Dict[str, Any]]:
        nested: Dict[str, Dict[str, Any]] = {}
        for dotted, value in flat.items():
            if value is None:
                continue
            section, _, key = dotted.partition(".")
            nested.setdefault(section, {})[key] = value
        return nested

    def _load_file(self, path: Path) -> List[Problem]:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            return [(None, str(path), f"cannot read config file: {e}")]
        try:
            raw = yaml.safe_load(text)
            lines = _key_lines(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            return [(line, "yaml", str(getattr(e, "problem", None) or e))]
        if raw is None:
            return []
        if not isinstance(raw, dict):
            return [(1, "<root>", "config file must be a mapping of sections")]
        return self._apply(raw, lines)

    def _apply(self, raw: Mapping[str, Any], lines: Mapping[str, int]) -> List[Problem]:
        problems: List[Problem] = []
        for section, body in raw.items():
            section = str(section)
            if section not in SCHEMA:
                problems.append(
                    (lines.get(section), section, f"unknown section (known: {', '.join(SCHEMA)})")
                )
                continue
            if body is None:
                continue
            if not isinstance(body, dict):
                problems.append((lines.get(section), section, "section must be a mapping"))
                continue
            for key, value in body.items():
                dotted = f"{section}.{key}"
                if key not in SCHEMA[section]:
                    problems.append((lines.get(dotted), dotted, "unknown key"))
                    continue
                expected, _, allowed = SCHEMA[section][key]
                value, error = _coerce(value, expected, allowed)
                if error:
                    problems.append((lines.get(dotted), dotted, error))
                else:
                    self.values[section][key] = value
        return problems

    def _build_evaluation(self) -> EvaluationConfig:
        ev = self.values["evaluation"]
        optimizer = OptimizerConfig(master_seed=ev["master_seed"], **self.values["optimizer"])
        return EvaluationConfig(
            mode=ev["mode"],
            k_test=ev["k_test"],
            test_fraction=ev["test_fraction"],
            n_bootstrap=ev["n_bootstrap"],
            optimizer=optimizer,
            master_seed=ev["master_seed"],
        )

    # ------------------------------------------------------------------
    # Accessors
    # ------------------------------------------------------------------

    @property
    def dataset(self) -> Dict[str, Any]:
        return dict(self.values["dataset"])

    @property
    def master_seed(self) -> int:
        return self.evaluation.master_seed

    @property
    def baseline(self) -> bool:
        return bool(self.values["search_space"]["baseline"])

    @property
    def space_path(self) -> Optional[str]:
        return self.values["search_space"]["path"]

    @property
    def metadata_path(self) -> Optional[str]:
        return self.values["fingerprint"]["metadata"]

    def to_dict(self) -> Dict[str, Any]:
        """Fully resolved configuration (worker count excluded: it never changes results)."""
        return copy.deepcopy(self.values)

    def __repr__(self) -> str:
        """String representation for debugging."""
        ev = self.evaluation
        return (
            f"Config(mode={ev.mode}, k_test={ev.k_test}, "
            f"n_random_search={ev.optimizer.n_random_search}, "
            f"ensemble={ev.optimizer.ensemble_method}/{ev.optimizer.n_ensemble}, "
            f"seed={ev.master_seed}, workers={self.workers})"
        )
