"""Tests for CSV loading, validation and stratified splitting."""

import numpy as np
import pytest

from cashopt.dataset import (
    DEFAULT_GROUP,
    DatasetError,
    FeatureDataset,
    load_csv,
    stratified_indices,
    stratified_split,
    write_csv,
)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_load_csv_basic(tmp_path):
    path = _write(
        tmp_path / "d.csv",
        "sample_id,f1,f2,label\nA,1.0,2.0,benign\nB,,3.5,malignant\nC,nan,4,benign\n"
        "D,0.5,NaN,malignant\n",
    )
    d = load_csv(path)
    assert d.n_samples == 4
    assert d.feature_names == ("f1", "f2")
    # "benign" < "malignant", so malignant is class 1
    assert d.label_names == ("benign", "malignant")
    assert list(d.labels) == [0, 1, 0, 1]
    assert np.isnan(d.values[1, 0]) and np.isnan(d.values[2, 0]) and np.isnan(d.values[3, 1])
    assert d.group_tags == (DEFAULT_GROUP, DEFAULT_GROUP)


def test_positive_class_override(tmp_path):
    path = _write(tmp_path / "d.csv", "id,f,label\na,1,yes\nb,2,no\nc,3,yes\n")
    d = load_csv(path, positive_class="no")
    assert d.label_names == ("yes", "no")
    assert list(d.labels) == [0, 1, 0]


def test_custom_missing_token(tmp_path):
    path = _write(tmp_path / "d.csv", "id,f,label\na,NA,0\nb,2,1\nc,3,1\n")
    d = load_csv(path, missing_token="NA")
    assert np.isnan(d.values[0, 0])


def test_non_numeric_cell_reports_row_and_column(tmp_path):
    path = _write(tmp_path / "d.csv", "id,f1,label\na,1,0\nb,abc,1\n")
    with pytest.raises(DatasetError) as exc_info:
        load_csv(path)
    assert exc_info.value.row == 3
    assert exc_info.value.column == "f1"
    assert "row 3" in str(exc_info.value)


def test_non_binary_labels_rejected(tmp_path):
    path = _write(tmp_path / "d.csv", "id,f,label\na,1,x\nb,2,y\nc,3,z\n")
    with pytest.raises(DatasetError, match="non-binary"):
        load_csv(path)


def test_single_class_rejected(tmp_path):
    path = _write(tmp_path / "d.csv", "id,f,label\na,1,x\nb,2,x\n")
    with pytest.raises(DatasetError, match="non-binary"):
        load_csv(path)


def test_missing_label_column(tmp_path):
    path = _write(tmp_path / "d.csv", "id,f,outcome\na,1,0\nb,2,1\n")
    with pytest.raises(DatasetError, match="label column not found"):
        load_csv(path)


def test_duplicate_sample_id(tmp_path):
    path = _write(tmp_path / "d.csv", "id,f,label\na,1,0\na,2,1\n")
    with pytest.raises(DatasetError, match="duplicate sample ID"):
        load_csv(path)


def test_missing_label_value(tmp_path):
    path = _write(tmp_path / "d.csv", "id,f,label\na,1,0\nb,2,\nc,3,1\n")
    with pytest.raises(DatasetError, match="missing label"):
        load_csv(path)


def test_missing_file(tmp_path):
    with pytest.raises(DatasetError, match="not found"):
        load_csv(tmp_path / "nope.csv")


def test_groups_file(tmp_path):
    data = _write(tmp_path / "d.csv", "id,f1,f2,label\na,1,2,0\nb,2,3,1\n")
    groups = _write(tmp_path / "g.csv", "feature_name,group_tag\nf1,shape\n")
    d = load_csv(data, groups_path=groups)
    assert d.group_tags == ("shape", DEFAULT_GROUP)


def test_groups_file_unknown_tag(tmp_path):
    data = _write(tmp_path / "d.csv", "id,f1,label\na,1,0\nb,2,1\n")
    groups = _write(tmp_path / "g.csv", "f1,wavelets\n")
    with pytest.raises(DatasetError, match="unknown feature group"):
        load_csv(data, groups_path=groups)


def test_write_then_load_preserves_dataset(tmp_path, small_dataset):
    data, groups = tmp_path / "out.csv", tmp_path / "groups.csv"
    write_csv(small_dataset, data, groups_path=groups)
    loaded = load_csv(data, groups_path=groups)
    assert loaded == small_dataset
    assert loaded.digest() == small_dataset.digest()


def test_dataset_is_immutable(small_dataset):
    with pytest.raises(ValueError):
        small_dataset.values[0, 0] = 1.0


def test_subset_keeps_order(small_dataset):
    sub = small_dataset.subset([3, 1])
    assert sub.sample_ids == (small_dataset.sample_ids[3], small_dataset.sample_ids[1])
    assert np.array_equal(sub.values[0], small_dataset.values[3])


def test_construct_rejects_unknown_group():
    with pytest.raises(DatasetError, match="unknown feature group"):
        FeatureDataset(
            sample_ids=("a", "b"),
            feature_names=("f",),
            group_tags=("bogus",),
            values=np.array([[1.0], [2.0]]),
            labels=np.array([0, 1]),
        )


class TestStratifiedSplit:
    def test_counts_per_class(self):
        labels = np.array([0] * 30 + [1] * 10)
        train, test = stratified_indices(labels, 0.2, seed=1)
        assert np.sum(labels[test] == 0) == 6
        assert np.sum(labels[test] == 1) == 2
        assert len(train) + len(test) == 40
        assert not set(train) & set(test)

    def test_both_partitions_keep_every_class(self):
        labels = np.array([0] * 20 + [1] * 2)
        train, test = stratified_indices(labels, 0.1, seed=0)
        assert set(labels[train]) == {0, 1}
        assert set(labels[test]) == {0, 1}

    def test_deterministic(self, small_dataset):
        a = stratified_split(small_dataset, 0.2, seed=7)
        b = stratified_split(small_dataset, 0.2, seed=7)
        c = stratified_split(small_dataset, 0.2, seed=8)
        assert a == b
        assert a.test_indices != c.test_indices

    def test_tiny_class_rejected(self):
        with pytest.raises(DatasetError, match="cannot stratify"):
            stratified_indices(np.array([0, 0, 0, 1]), 0.2, seed=0)

    def test_fraction_bounds(self):
        with pytest.raises(DatasetError):
            stratified_indices(np.array([0, 0, 1, 1]), 1.0, seed=0)
