"""Tabular feature datasets: CSV loading/export, validation and stratified splitting.

CSV schema: the first column holds the sample ID, one column (``label`` by default)
holds a two-valued class label, every other column is a numeric feature. Empty
cells and the missing token (``nan``, case-insensitive) become NaN. An optional
two-column groups file maps feature names to one of the feature-group tags in
GROUP_VOCABULARY.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

# Feature-group vocabulary: one activator per tag in the search space.
GROUP_VOCABULARY: tuple[str, ...] = (
    "histogram",
    "shape",
    "orientation",
    "texture_GLCM",
    "texture_GLCMMS",
    "texture_GLRLM",
    "texture_GLSZM",
    "texture_GLDM",
    "texture_NGTDM",
    "texture_Gabor",
    "texture_LoG",
    "texture_LBP",
    "vessel",
    "phase",
    "semantic",
    "patient",
    "other",
)
DEFAULT_GROUP = "other"
DEFAULT_MISSING_TOKEN = "nan"
DEFAULT_ID_COLUMN = "sample_id"


class DatasetError(ValueError):
    """Raised when a dataset cannot be loaded, validated or split."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


@dataclass(frozen=True, eq=False)
class FeatureDataset:
    """Immutable samples x features matrix with binary labels and feature-group tags.

    ``values`` uses NaN as the missing marker. ``label_names`` holds the original
    label strings for class 0 and class 1, so exports reproduce the input file.
    """

    sample_ids: tuple[str, ...]
    feature_names: tuple[str, ...]
    group_tags: tuple[str, ...]
    values: np.ndarray
    labels: np.ndarray
    label_names: tuple[str, str] = ("0", "1")
    label_column: str = "label"
    id_column: str = DEFAULT_ID_COLUMN

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        labels = np.array(self.labels, dtype=np.int64, copy=True)
        values.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "group_tags", tuple(self.group_tags))
        self._validate()

    def _validate(self) -> None:
        n, p = len(self.sample_ids), len(self.feature_names)
        if self.values.ndim != 2 or self.values.shape != (n, p):
            raise DatasetError(
                f"values must be {n} x {p}, got shape {self.values.shape}"
            )
        if self.labels.shape != (n,):
            raise DatasetError(f"expected {n} labels, got {self.labels.shape[0]}")
        if len(self.group_tags) != p:
            raise DatasetError(f"expected {p} group tags, got {len(self.group_tags)}")
        if not set(np.unique(self.labels)) <= {0, 1}:
            raise DatasetError("labels must be 0/1")
        if not (np.any(self.labels == 0) and np.any(self.labels == 1)):
            raise DatasetError("both classes must be present")
        _check_unique(self.sample_ids, "duplicate sample ID", by_row=True)
        _check_unique(self.feature_names, "duplicate feature name", by_row=False)
        unknown = sorted(set(self.group_tags) - set(GROUP_VOCABULARY))
        if unknown:
            raise DatasetError(f"unknown feature group(s): {', '.join(unknown)}")

    @property
    def n_samples(self) -> int:
        return len(self.sample_ids)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def class_counts(self) -> tuple[int, int]:
        """Return (count of class 0, count of class 1)."""
        return int(np.sum(self.labels == 0)), int(np.sum(self.labels == 1))

    def subset(self, indices: Sequence[int]) -> "FeatureDataset":
        """Return a new dataset holding the given rows, in the given order."""
        idx = np.asarray(indices, dtype=np.int64)
        return FeatureDataset(
            sample_ids=tuple(self.sample_ids[i] for i in idx),
            feature_names=self.feature_names,
            group_tags=self.group_tags,
            values=self.values[idx],
            labels=self.labels[idx],
            label_names=self.label_names,
            label_column=self.label_column,
            id_column=self.id_column,
        )

    def digest(self) -> str:
        """SHA-256 over the canonical content (IDs, names, groups, values, labels)."""
        sha = hashlib.sha256()
        for part in (self.sample_ids, self.feature_names, self.group_tags, self.label_names):
            sha.update("\x1f".join(part).encode("utf-8"))
            sha.update(b"\x1e")
        sha.update(np.ascontiguousarray(self.values).tobytes())
        sha.update(np.ascontiguousarray(self.labels).tobytes())
        return sha.hexdigest()

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureDataset):
            return NotImplemented
        return (
            self.sample_ids == other.sample_ids
            and self.feature_names == other.feature_names
            and self.group_tags == other.group_tags
            and self.label_names == other.label_names
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    __hash__ = None

    def __repr__(self) -> str:
        c0, c1 = self.class_counts()
        return (
            f"FeatureDataset(n_samples={self.n_samples}, n_features={self.n_features}, "
            f"classes=({c0}, {c1}))"
        )


@dataclass(frozen=True)
class SplitPlan:
    """Disjoint train/test row indices (sorted) drawn with a given seed."""

    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    seed: int = field(default=0)


def _check_unique(items: Sequence[str], what: str, by_row: bool) -> None:
    seen: dict[str, int] = {}
    for position, item in enumerate(items):
        if item in seen:
            if by_row:
                # +2: one header line, 1-based file lines
                raise DatasetError(f"{what} {item!r}", row=position + 2)
            raise DatasetError(f"{what} {item!r}", column=item)
        seen[item] = position


# ---------------------------------------------------------------------------
# CSV loading
# ---------------------------------------------------------------------------

_PARSER_LINE_RE = re.compile(r"line (\d+)")


def _is_missing(cell: str, missing_token: str) -> bool:
    token = cell.strip()
    return token == "" or token.lower() in {missing_token.lower(), DEFAULT_MISSING_TOKEN}


def map_labels(
    raw_labels: Sequence[str], positive_class: Optional[str] = None
) -> tuple[np.ndarray, tuple[str, str]]:
    """Map two distinct label strings to 0/1.

    The lexicographically smaller value becomes class 0 unless ``positive_class``
    names the value that should be class 1.

    Returns:
        (integer labels, (name of class 0, name of class 1))
    """
    distinct = sorted(set(raw_labels))
    if len(distinct) != 2:
        raise DatasetError(
            f"non-binary labels: expected exactly 2 distinct values, found {len(distinct)} "
            f"({', '.join(repr(v) for v in distinct[:5])})"
        )
    negative, positive = distinct
    if positive_class is not None:
        if positive_class not in distinct:
            raise DatasetError(f"positive class {positive_class!r} not among labels {distinct}")
        if positive_class == negative:
            negative, positive = positive, negative
    labels = np.array([1 if v == positive else 0 for v in raw_labels], dtype=np.int64)
    return labels, (negative, positive)


def load_groups(path: str | Path) -> dict[str, str]:
    """Read a two-column (feature_name, group_tag) CSV; a header row is optional."""
    mapping: dict[str, str] = {}
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise DatasetError(f"cannot read groups file {path}: {e}") from e
    for line_no, row in enumerate(rows, 1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise DatasetError(f"groups file needs 2 columns, found {len(row)}", row=line_no)
        name, tag = row[0].strip(), row[1].strip()
        if line_no == 1 and (name, tag) == ("feature_name", "group_tag"):
            continue
        if tag not in GROUP_VOCABULARY:
            raise DatasetError(f"unknown feature group {tag!r}", row=line_no, column="group_tag")
        mapping[name] = tag
    return mapping


def load_csv(
    path: str | Path,
    label_column: str = "label",
    groups_path: Optional[str | Path] = None,
    missing_token: str = DEFAULT_MISSING_TOKEN,
    positive_class: Optional[str] = None,
) -> FeatureDataset:
    """Load and validate a feature CSV.

    Args:
        path: CSV file; first column is the sample ID
        label_column: Name of the class-label column
        groups_path: Optional (feature_name, group_tag) CSV
        missing_token: Extra token treated as missing (besides empty and "nan")
        positive_class: Label value to map to class 1 (default: the larger string)

    Returns:
        Validated FeatureDataset

    Raises:
        DatasetError: on malformed CSV, non-binary labels, duplicates or bad cells
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset file not found: {path}")
    try:
        frame = pd.read_csv(
            path, header=None, dtype=str, keep_default_na=False, encoding="utf-8"
        )
    except pd.errors.EmptyDataError as e:
        raise DatasetError(f"empty CSV file: {path}") from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        match = _PARSER_LINE_RE.search(str(e))
        row = int(match.group(1)) if match else None
        raise DatasetError(f"malformed CSV {path.name}: {e}", row=row) from e

    if frame.shape[0] < 2:
        raise DatasetError(f"CSV {path.name} has no data rows")
    header = [str(h).strip() for h in frame.iloc[0].tolist()]
    body = frame.iloc[1:].reset_index(drop=True)

    if label_column not in header:
        raise DatasetError("label column not found", column=label_column)
    label_pos = header.index(label_column)
    if label_pos == 0:
        raise DatasetError("the first column must be the sample ID", column=label_column)
    _check_unique(header, "duplicate column", by_row=False)

    id_column = header[0]
    feature_positions = [i for i in range(1, len(header)) if i != label_pos]
    feature_names = [header[i] for i in feature_positions]

    sample_ids = [str(v).strip() for v in body.iloc[:, 0].tolist()]
    raw_labels = [str(v).strip() for v in body.iloc[:, label_pos].tolist()]
    for i, raw in enumerate(raw_labels):
        if _is_missing(raw, missing_token):
            raise DatasetError("missing label", row=i + 2, column=label_column)
    labels, label_names = map_labels(raw_labels, positive_class)

    values = np.empty((len(sample_ids), len(feature_names)), dtype=float)
    for j, pos in enumerate(feature_positions):
        column = body.iloc[:, pos].tolist()
        for i, cell in enumerate(column):
            if _is_missing(cell, missing_token):
                values[i, j] = np.nan
                continue
            try:
                values[i, j] = float(cell)
            except ValueError as e:
                raise DatasetError(
                    f"non-numeric value {cell!r}", row=i + 2, column=feature_names[j]
                ) from e

    if groups_path is not None:
        mapping = load_groups(groups_path)
        untagged = [n for n in feature_names if n not in mapping]
        if untagged:
            logger.warning(
                f"{len(untagged)} feature(s) missing from groups file, tagged "
                f"{DEFAULT_GROUP!r}: {', '.join(untagged[:5])}"
            )
        group_tags = [mapping.get(n, DEFAULT_GROUP) for n in feature_names]
    else:
        group_tags = [DEFAULT_GROUP] * len(feature_names)

    dataset = FeatureDataset(
        sample_ids=tuple(sample_ids),
        feature_names=tuple(feature_names),
        group_tags=tuple(group_tags),
        values=values,
        labels=labels,
        label_names=label_names,
        label_column=label_column,
        id_column=id_column,
    )
    c0, c1 = dataset.class_counts()
    logger.info(
        f"Loaded {path.name}: {dataset.n_samples} samples, {dataset.n_features} features, "
        f"classes {label_names[0]}={c0} / {label_names[1]}={c1}, "
        f"{int(np.isnan(dataset.values).sum())} missing cells"
    )
    return dataset


def write_csv(
    dataset: FeatureDataset, path: str | Path, groups_path: Optional[str | Path] = None
) -> None:
    """Write a dataset in the schema load_csv reads (floats in round-trip repr)."""
    columns = {dataset.id_column: list(dataset.sample_ids)}
    for j, name in enumerate(dataset.feature_names):
        columns[name] = [
            "" if np.isnan(v) else repr(float(v)) for v in dataset.values[:, j].tolist()
        ]
    columns[dataset.label_column] = [dataset.label_names[int(c)] for c in dataset.labels]
    pd.DataFrame(columns).to_csv(path, index=False, encoding="utf-8")

    if groups_path is not None:
        pd.DataFrame(
            {"feature_name": list(dataset.feature_names), "group_tag": list(dataset.group_tags)}
        ).to_csv(groups_path, index=False, encoding="utf-8")


# ---------------------------------------------------------------------------
# Stratified splitting
# ---------------------------------------------------------------------------


def stratified_indices(
    labels: np.ndarray, test_fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Stratified random split of row indices.

    Per class the test count is round-half-up(count x fraction), clamped to
    [1, count - 1] so both partitions hold every class.

    Returns:
        (sorted train indices, sorted test indices)
    """
    if not 0.0 < test_fraction < 1.0:
        raise DatasetError(f"test_fraction must be in (0, 1), got {test_fraction}")
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train_parts, test_parts = [], []
    for cls in (0, 1):
        members = np.flatnonzero(labels == cls)
        count = members.size
        if count < 2:
            raise DatasetError(f"cannot stratify: class {cls} has {count} sample(s)")
        n_test = int(np.floor(count * test_fraction + 0.5))
        n_test = min(max(n_test, 1), count - 1)
        shuffled = rng.permutation(members)
        test_parts.append(shuffled[:n_test])
        train_parts.append(shuffled[n_test:])
    return np.sort(np.concatenate(train_parts)), np.sort(np.concatenate(test_parts))


def stratified_split(dataset: FeatureDataset, test_fraction: float, seed: int) -> SplitPlan:
    """Split a dataset into stratified train/test partitions, deterministic per seed."""
    train, test = stratified_indices(dataset.labels, test_fraction, seed)
    return SplitPlan(
        train_indices=tuple(int(i) for i in train),
        test_indices=tuple(int(i) for i in test),
        seed=int(seed),
    )
