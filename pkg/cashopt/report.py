"""Run artifacts: report.json, CSV tables, manifest and ensemble dump.

report.json holds no timestamps or timings, so two runs with the same inputs
and master seed produce byte-identical files. Timings live in manifest.json.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd
import yaml

from .evaluation import EvaluationReport, SweepPoint
from .metrics import METRIC_NAMES

logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"
SUMMARY_FILE = "summary.csv"
PER_SPLIT_FILE = "per_split.csv"
ROC_BAND_FILE = "roc_band.csv"
MANIFEST_FILE = "manifest.json"
ENSEMBLE_FILE = "ensemble.yaml"
SWEEP_FILE = "sweep.csv"


class ReportError(ValueError):
    """Raised when a report cannot be read back (missing, corrupt or incomplete)."""


def to_plain(value: Any) -> Any:
    """Recursively turn numpy scalars/arrays and tuples into JSON/YAML-safe builtins."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _dump_json(data: Any, path: Path) -> None:
    path.write_text(
        json.dumps(to_plain(data), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------


def summary_frame(report: EvaluationReport) -> pd.DataFrame:
    rows = []
    for name in METRIC_NAMES:
        ci = report.intervals[name]
        rows.append(
            {
                "metric": name,
                "mean": ci.mean,
                "lower": ci.lower,
                "upper": ci.upper,
                "method": ci.method,
            }
        )
    return pd.DataFrame(rows, columns=["metric", "mean", "lower", "upper", "method"])


def per_split_frame(report: EvaluationReport) -> pd.DataFrame:
    rows = []
    for split in report.splits:
        row = {
            "split": split.split_index,
            "n_train": split.n_train,
            "n_test": split.n_test,
            "n_members": split.ensemble["n_members"],
            "best_validation_f1_weighted": split.ensemble["best_validation_score"],
        }
        row.update(split.metrics.values())
        rows.append(row)
    return pd.DataFrame(rows)


def roc_band_frame(report: EvaluationReport) -> pd.DataFrame:
    band = report.band
    return pd.DataFrame(
        {"fpr": band.fpr, "mean_tpr": band.mean_tpr, "lower": band.lower, "upper": band.upper}
    )


def write_report(report: EvaluationReport, out_dir: str | Path) -> list[Path]:
    """Write report.json, summary.csv, per_split.csv, roc_band.csv and ensemble.yaml."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / REPORT_FILE, out / SUMMARY_FILE, out / PER_SPLIT_FILE, out / ROC_BAND_FILE]
    _dump_json(report.to_dict(), paths[0])
    summary_frame(report).to_csv(paths[1], index=False, float_format="%.6f")
    per_split_frame(report).to_csv(paths[2], index=False, float_format="%.6f")
    roc_band_frame(report).to_csv(paths[3], index=False, float_format="%.6f")
    if report.final_ensemble:
        paths.append(write_ensemble(report.final_ensemble, out / ENSEMBLE_FILE))
    logger.info(f"Wrote {len(paths)} report file(s) to {out}")
    return paths


def write_ensemble(description: dict[str, Any], path: str | Path) -> Path:
    """Dump an Ensemble.describe() to YAML."""
    path = Path(path)
    path.write_text(
        yaml.safe_dump(to_plain(description), sort_keys=False, default_flow_style=False),
        encoding="utf-8",
    )
    return path


def write_manifest(
    out_dir: str | Path,
    command: str,
    config: dict[str, Any],
    dataset_digests: dict[str, str],
    master_seed: int,
    version: str,
    timings: dict[str, float],
    config_path: Optional[str] = None,
) -> Path:
    """Everything needed to reproduce a run, plus wall-clock timings per phase."""
    path = Path(out_dir) / MANIFEST_FILE
    _dump_json(
        {
            "command": command,
            "config_path": config_path,
            "config": config,
            "dataset_digests": dataset_digests,
            "master_seed": master_seed,
            "engine_version": version,
            "timings_seconds": {k: round(v, 3) for k, v in timings.items()},
        },
        path,
    )
    return path


def write_sweep(points: Sequence[SweepPoint], out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / SWEEP_FILE
    frame = pd.DataFrame(
        [
            {
                "n_random_search": p.n_random_search,
                "n_ensemble": p.n_ensemble,
                "mean_f1_weighted": p.mean_f1_weighted,
                "std_f1_weighted": p.std_f1_weighted,
                "mean_auc": p.mean_auc,
                "n_repeats": len(p.repeat_means),
            }
            for p in points
        ]
    )
    frame.to_csv(path, index=False, float_format="%.6f")
    return path


# ---------------------------------------------------------------------------
# Inspection
# ---------------------------------------------------------------------------


def load_report(path: str | Path) -> dict[str, Any]:
    """Read report.json (or a run directory holding one) and check its shape."""
    path = Path(path)
    if path.is_dir():
        path = path / REPORT_FILE
    if not path.exists():
        raise ReportError(f"report not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as e:
        raise ReportError(f"cannot read report {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ReportError(f"corrupt report {path}: line {e.lineno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ReportError(f"report {path} is not a JSON object")
    missing = [key for key in ("mode", "summary", "member_histogram") if key not in data]
    if missing:
        raise ReportError(f"report {path} lacks section(s): {', '.join(missing)}")
    unknown = sorted(set(data["summary"]) - set(METRIC_NAMES))
    if unknown:
        raise ReportError(f"report {path} has unknown metric(s): {', '.join(unknown)}")
    return data


def format_summary_table(data: dict[str, Any], metric: Optional[str] = None) -> str:
    """Mean [lower, upper] per metric, then the ensemble-member classifier histogram."""
    names = [n for n in METRIC_NAMES if n in data["summary"]]
    if metric is not None:
        if metric not in data["summary"]:
            raise ReportError(f"metric {metric!r} not in report (have: {', '.join(names)})")
        names = [metric]
    width = max(len(n) for n in names)
    lines = [f"{'metric'.ljust(width)}  mean   [95% CI]"]
    for name in names:
        ci = data["summary"][name]
        lines.append(
            f"{name.ljust(width)}  {ci['mean']:.3f} [{ci['lower']:.3f}, {ci['upper']:.3f}]"
        )
    if metric is None:
        histogram = data.get("member_histogram") or {}
        total = sum(histogram.values())
        lines.append("")
        lines.append(f"ensemble members ({data['mode']}, {total} total):")
        for name, count in sorted(histogram.items(), key=lambda kv: (-kv[1], kv[0])):
            lines.append(f"  {name.ljust(20)} {count:>5}  ({100.0 * count / max(total, 1):.1f}%)")
        for warning in data.get("warnings", []):
            lines.append(f"⚠️  {warning}")
    return "\n".join(lines)
