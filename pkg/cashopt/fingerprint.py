"""Light dataset fingerprinting: metadata rules that narrow the search space.

Four pure decisions:
- image normalization only for qualitative modalities;
- fixed bin count (qualitative) versus fixed bin width (quantitative);
- 2D / 2.5D / 3D features from mean pixel spacing and slice thickness;
- resampling disabled when the classes are at most 60/40.

Without imaging metadata (plain feature matrices) only the resampling rule
runs and the image-level fields are reported as not applicable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import yaml

QUALITATIVE = "qualitative"
QUANTITATIVE = "quantitative"
MODALITY_KINDS = (QUALITATIVE, QUANTITATIVE)

FIXED_COUNT = "fixed_count"
FIXED_WIDTH = "fixed_width"

DIM_2D = "2D"
DIM_25D = "2.5D"
DIM_3D = "3D"

NOT_APPLICABLE = "not applicable"

# Largest majority fraction still considered balanced (inclusive).
BALANCED_MAJORITY_FRACTION = 0.60
# Slice thickness up to this multiple of the pixel spacing counts as isotropic (inclusive).
ISOTROPY_FACTOR = 2.0


class FingerprintError(ValueError):
    """Raised on invalid or incomplete imaging metadata."""


@dataclass(frozen=True)
class ImagingMetadata:
    """Dataset-level imaging metadata (means over all images)."""

    modality_kind: str
    mean_pixel_spacing: Optional[float] = None
    mean_slice_thickness: Optional[float] = None
    is_single_slice: bool = False

    def __post_init__(self):
        if self.modality_kind not in MODALITY_KINDS:
            raise FingerprintError(
                f"modality_kind must be one of {MODALITY_KINDS}, got {self.modality_kind!r}"
            )
        for name in ("mean_pixel_spacing", "mean_slice_thickness"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise FingerprintError(f"{name} must be strictly positive, got {value}")


@dataclass
class FingerprintReport:
    """Outcome of all fingerprint rules plus the human-readable rule firings."""

    normalize_images: Optional[bool]
    bin_strategy: str
    feature_dimensionality: str
    resampling_enabled: bool
    rationale: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "normalize_images": (
                NOT_APPLICABLE if self.normalize_images is None else self.normalize_images
            ),
            "bin_strategy": self.bin_strategy,
            "feature_dimensionality": self.feature_dimensionality,
            "resampling_enabled": self.resampling_enabled,
            "rationale": list(self.rationale),
        }


def _note(rationale: Optional[list[str]], message: str) -> None:
    if rationale is not None:
        rationale.append(message)


def decide_normalization(modality_kind: str, rationale: Optional[list[str]] = None) -> bool:
    """Image normalization is applied only to qualitative modalities."""
    if modality_kind not in MODALITY_KINDS:
        raise FingerprintError(f"unknown modality kind {modality_kind!r}")
    normalize = modality_kind == QUALITATIVE
    _note(
        rationale,
        f"normalization: modality is {modality_kind} -> "
        f"{'normalize images' if normalize else 'no normalization (fixed unit and scale)'}",
    )
    return normalize


def decide_bin_strategy(modality_kind: str, rationale: Optional[list[str]] = None) -> str:
    """Fixed bin count for qualitative modalities, fixed bin width for quantitative ones."""
    if modality_kind not in MODALITY_KINDS:
        raise FingerprintError(f"unknown modality kind {modality_kind!r}")
    strategy = FIXED_COUNT if modality_kind == QUALITATIVE else FIXED_WIDTH
    _note(rationale, f"discretization: modality is {modality_kind} -> {strategy}")
    return strategy


def decide_feature_dimensionality(
    meta: ImagingMetadata, rationale: Optional[list[str]] = None
) -> str:
    """Choose 2D, 2.5D or 3D features.

    Single-slice data gives 2D; slice thickness <= 2 x pixel spacing gives 3D;
    anything more anisotropic gives 2.5D.
    """
    if meta.is_single_slice:
        _note(rationale, "dimensionality: single 2D slice -> 2D")
        return DIM_2D
    if meta.mean_pixel_spacing is None or meta.mean_slice_thickness is None:
        raise FingerprintError(
            "mean_pixel_spacing and mean_slice_thickness are required for multi-slice data"
        )
    limit = ISOTROPY_FACTOR * meta.mean_pixel_spacing
    if meta.mean_slice_thickness <= limit:
        _note(
            rationale,
            f"dimensionality: slice thickness {meta.mean_slice_thickness:g} mm <= "
            f"{ISOTROPY_FACTOR:g} x pixel spacing ({limit:g} mm) -> 3D",
        )
        return DIM_3D
    _note(
        rationale,
        f"dimensionality: slice thickness {meta.mean_slice_thickness:g} mm > "
        f"{ISOTROPY_FACTOR:g} x pixel spacing ({limit:g} mm) -> 2.5D",
    )
    return DIM_25D


def decide_resampling(
    class_counts: Sequence[int], rationale: Optional[list[str]] = None
) -> bool:
    """Return True when resampling stays in the search space.

    Resampling is disabled iff the majority fraction is at most 0.60.
    """
    counts = [int(c) for c in class_counts]
    if len(counts) != 2 or min(counts) <= 0:
        raise FingerprintError(f"expected two positive class counts, got {counts}")
    majority = max(counts) / sum(counts)
    enabled = majority > BALANCED_MAJORITY_FRACTION
    _note(
        rationale,
        f"resampling: majority fraction {majority:.3f} "
        f"{'>' if enabled else '<='} {BALANCED_MAJORITY_FRACTION:.2f} -> "
        f"{'enabled' if enabled else 'disabled (relatively balanced)'}",
    )
    return enabled


def fingerprint(
    class_counts: Sequence[int], meta: Optional[ImagingMetadata] = None
) -> FingerprintReport:
    """Run every applicable rule and collect the rationale."""
    rationale: list[str] = []
    if meta is None:
        normalize, bins, dims = None, NOT_APPLICABLE, NOT_APPLICABLE
        rationale.append("image-level rules: no imaging metadata supplied -> not applicable")
    else:
        normalize = decide_normalization(meta.modality_kind, rationale)
        bins = decide_bin_strategy(meta.modality_kind, rationale)
        dims = decide_feature_dimensionality(meta, rationale)
    resampling = decide_resampling(class_counts, rationale)
    return FingerprintReport(
        normalize_images=normalize,
        bin_strategy=bins,
        feature_dimensionality=dims,
        resampling_enabled=resampling,
        rationale=rationale,
    )


def load_metadata(path: str | Path) -> ImagingMetadata:
    """Read imaging metadata from a YAML key-value file."""
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as e:
        raise FingerprintError(f"cannot read metadata file {path}: {e}") from e
    if not isinstance(raw, dict):
        raise FingerprintError(f"metadata file {path} must be a key-value mapping")
    known = {"modality_kind", "mean_pixel_spacing", "mean_slice_thickness", "is_single_slice"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise FingerprintError(f"unknown metadata key(s): {', '.join(unknown)}")
    if "modality_kind" not in raw:
        raise FingerprintError("metadata file must set modality_kind")

    def _opt_float(key):
        value = raw.get(key)
        return None if value is None else float(value)

    return ImagingMetadata(
        modality_kind=str(raw["modality_kind"]),
        mean_pixel_spacing=_opt_float("mean_pixel_spacing"),
        mean_slice_thickness=_opt_float("mean_slice_thickness"),
        is_single_slice=bool(raw.get("is_single_slice", False)),
    )
