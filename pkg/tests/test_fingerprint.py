"""Tests for the fingerprint rules."""

import pytest

from cashopt.fingerprint import (
    DIM_2D,
    DIM_3D,
    DIM_25D,
    FIXED_COUNT,
    FIXED_WIDTH,
    NOT_APPLICABLE,
    FingerprintError,
    ImagingMetadata,
    decide_feature_dimensionality,
    decide_resampling,
    fingerprint,
    load_metadata,
)


@pytest.mark.parametrize(
    "counts,enabled",
    [
        ((50, 50), False),
        ((60, 40), False),  # exactly 0.60 stays balanced
        ((61, 39), True),
        ((30, 70), True),
        ((7, 3), True),
    ],
)
def test_resampling_boundary(counts, enabled):
    assert decide_resampling(counts) is enabled


def test_resampling_rejects_empty_class():
    with pytest.raises(FingerprintError):
        decide_resampling((10, 0))


def test_qualitative_modality():
    report = fingerprint((50, 50), ImagingMetadata("qualitative", 1.0, 1.0))
    assert report.normalize_images is True
    assert report.bin_strategy == FIXED_COUNT


def test_quantitative_modality():
    report = fingerprint((50, 50), ImagingMetadata("quantitative", 1.0, 1.0))
    assert report.normalize_images is False
    assert report.bin_strategy == FIXED_WIDTH


@pytest.mark.parametrize(
    "meta,expected",
    [
        (ImagingMetadata("quantitative", 1.0, 2.0), DIM_3D),  # 2 x spacing is still 3D
        (ImagingMetadata("quantitative", 1.0, 2.5), DIM_25D),
        (ImagingMetadata("quantitative", is_single_slice=True), DIM_2D),
    ],
)
def test_dimensionality(meta, expected):
    assert decide_feature_dimensionality(meta) == expected


def test_dimensionality_needs_spacing():
    with pytest.raises(FingerprintError, match="required"):
        decide_feature_dimensionality(ImagingMetadata("qualitative"))


def test_without_metadata_only_resampling_rule():
    report = fingerprint((80, 20))
    assert report.resampling_enabled is True
    assert report.bin_strategy == NOT_APPLICABLE
    assert report.to_dict()["normalize_images"] == NOT_APPLICABLE
    assert any("resampling" in line for line in report.rationale)


def test_invalid_metadata():
    with pytest.raises(FingerprintError):
        ImagingMetadata("spectral")
    with pytest.raises(FingerprintError):
        ImagingMetadata("qualitative", mean_pixel_spacing=0.0)


def test_load_metadata(tmp_path):
    path = tmp_path / "meta.yaml"
    path.write_text(
        "modality_kind: qualitative\nmean_pixel_spacing: 0.5\nmean_slice_thickness: 5\n",
        encoding="utf-8",
    )
    meta = load_metadata(path)
    assert meta.mean_slice_thickness == 5.0
    assert fingerprint((10, 10), meta).feature_dimensionality == DIM_25D


def test_load_metadata_unknown_key(tmp_path):
    path = tmp_path / "meta.yaml"
    path.write_text("modality_kind: qualitative\nvendor: acme\n", encoding="utf-8")
    with pytest.raises(FingerprintError, match="unknown metadata key"):
        load_metadata(path)
