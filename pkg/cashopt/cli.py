"""
cashopt command-line interface.

Commands:
  run      optimise and evaluate on a dataset (nested CV or fixed train/test)
  synth    write a synthetic dataset with controllable signal
  inspect  print the summary table of a finished run
  sweep    ensemble-size / random-search-size sweep

Exit codes: 0 success, 2 input error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__
from .dataset import load_csv, write_csv
from .evaluation import FIXED_SPLIT, NESTED_CV, run_fixed_split, run_nested_cv, run_sweep
from .fingerprint import load_metadata
from .logging_config import WORKFLOW_LOGGER, attach_file_handler, detach_handler, setup_logging
from .report import (
    format_summary_table,
    load_report,
    write_manifest,
    write_report,
    write_sweep,
)
from .search_space import baseline_space, load_space
from .synth import SynthSpec, generate

logger = logging.getLogger("cashopt.cli")

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_RUNTIME_FAILURE = 3

MODE_FLAGS = {"nested": NESTED_CV, "fixed": FIXED_SPLIT}


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e


def _load_config(args: argparse.Namespace, extra: Optional[dict[str, Any]] = None):
    # Late import: config/ is a sibling package that itself imports cashopt.
    from config.settings import Config

    overrides = {
        "dataset.label_column": args.labels_column,
        "dataset.groups": args.groups,
        "evaluation.master_seed": args.seed,
        "search_space.path": getattr(args, "space", None),
        "search_space.baseline": True if getattr(args, "baseline", False) else None,
        "fingerprint.metadata": getattr(args, "metadata", None),
    }
    overrides.update(extra or {})
    cfg = Config(args.config, overrides=overrides)
    if args.workers is not None:
        cfg.workers = max(1, args.workers)
    setup_logging(args.log_level or cfg.log_level)
    return cfg


def _load_dataset(path: str, cfg) -> Any:
    ds = cfg.dataset
    return load_csv(
        path,
        label_column=ds["label_column"],
        groups_path=ds["groups"],
        missing_token=ds["missing_token"],
        positive_class=ds["positive_class"],
    )


def _resolve_space(cfg):
    if cfg.baseline:
        logger.info("Using the baseline space (LASSO selection + logistic regression)")
        return baseline_space()
    if cfg.space_path:
        logger.info(f"Using search space from {cfg.space_path}")
        return load_space(cfg.space_path)
    return None


class RunLogs:
    """Mirror the run log into <out>/run.log and workflow lines into <out>/workflows.log."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.root = logging.getLogger("cashopt")
        self.workflows = logging.getLogger(WORKFLOW_LOGGER)

    def __enter__(self):
        self.run_handler = attach_file_handler(self.root, self.out_dir / "run.log")
        self.workflow_handler = attach_file_handler(
            self.workflows, self.out_dir / "workflows.log", fmt="%(message)s"
        )
        self._saved = (self.workflows.level, self.workflows.propagate)
        # One line per workflow: file only, whatever the console level.
        self.workflows.setLevel(logging.INFO)
        self.workflows.propagate = False
        return self

    def __exit__(self, *exc):
        self.workflows.setLevel(self._saved[0])
        self.workflows.propagate = self._saved[1]
        detach_handler(self.workflows, self.workflow_handler)
        detach_handler(self.root, self.run_handler)
        return False


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> int:
    extra = {
        "evaluation.mode": MODE_FLAGS[args.mode] if args.mode else None,
        "evaluation.k_test": args.ktest,
        "optimizer.n_random_search": args.krs,
        "optimizer.n_ensemble": args.kens,
        "optimizer.ensemble_method": args.ensemble_method,
    }
    cfg = _load_config(args, extra)
    mode = cfg.evaluation.mode
    if mode == NESTED_CV and not args.data:
        raise ValueError("nested mode needs --data")
    if mode == FIXED_SPLIT and not (args.train and args.test):
        raise ValueError("fixed mode needs --train and --test")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    timings: dict[str, float] = {}
    with RunLogs(out):
        logger.info(f"cashopt {__version__}: {cfg!r}")
        start = time.perf_counter()
        space = _resolve_space(cfg)
        meta = load_metadata(cfg.metadata_path) if cfg.metadata_path else None
        if mode == NESTED_CV:
            data = _load_dataset(args.data, cfg)
            digests = {"data": data.digest()}
        else:
            train, test = _load_dataset(args.train, cfg), _load_dataset(args.test, cfg)
            digests = {"train": train.digest(), "test": test.digest()}
        timings["load"] = time.perf_counter() - start

        start = time.perf_counter()
        if mode == NESTED_CV:
            report = run_nested_cv(
                data,
                cfg.evaluation,
                space=space,
                meta=meta,
                compare_ensembles=args.compare_ensembles,
                n_jobs=cfg.workers,
            )
        else:
            report = run_fixed_split(
                train, test, cfg.evaluation, space=space, meta=meta, n_jobs=cfg.workers
            )
        timings["evaluate"] = time.perf_counter() - start

        start = time.perf_counter()
        report.config = {**report.config, "resolved": cfg.to_dict()}
        write_report(report, out)
        timings["write"] = time.perf_counter() - start
        write_manifest(
            out,
            command="run",
            config=cfg.to_dict(),
            dataset_digests=digests,
            master_seed=cfg.master_seed,
            version=__version__,
            timings=timings,
            config_path=cfg.config_file,
        )
    print(format_summary_table(report.to_dict()))
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    setup_logging(args.log_level or "INFO")
    spec = SynthSpec(
        n_samples=args.n,
        n_signal_features=args.signal,
        n_noise_features=args.noise,
        class_separation=args.sep,
        class_ratio=args.ratio,
        missing_fraction=args.missing,
        seed=args.seed,
    )
    dataset = generate(spec)
    write_csv(dataset, args.out, groups_path=args.groups_out)
    logger.info(f"Wrote {dataset!r} to {args.out}")
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    data = load_report(args.report)
    print(format_summary_table(data, metric=args.metric))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    data = _load_dataset(args.data, cfg)
    space = _resolve_space(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with RunLogs(out):
        points = run_sweep(
            data,
            grid_rs=args.grid_rs,
            grid_ens=args.grid_ens,
            n_repeats=args.repeats,
            k_test=args.ktest,
            base_cfg=cfg.evaluation,
            space=space,
            n_jobs=cfg.workers,
        )
        path = write_sweep(points, out)
    for p in points:
        print(
            f"N_RS={p.n_random_search:>5} N_ens={p.n_ensemble:>4}  "
            f"F1_w {p.mean_f1_weighted:.3f} +/- {p.std_f1_weighted:.3f}  AUC {p.mean_auc:.3f}"
        )
    print(f"Wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML run config (see config/defaults.yaml)")
    parser.add_argument("--labels-column", help="Class-label column (default: label)")
    parser.add_argument("--groups", help="CSV of (feature_name, group_tag)")
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument(
        "--workers",
        type=int,
        help="Parallel workflow evaluations (default: CASHOPT_WORKERS or CPUs)",
    )
    parser.add_argument("--baseline", action="store_true", help="Use the LASSO + LR baseline space")
    parser.add_argument("--space", help="YAML search-space file")
    parser.add_argument("--metadata", help="YAML imaging metadata for the fingerprint")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cashopt",
        description="Random-search CASH engine for tabular binary classification",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Synthetic data, then a desk-scale nested cross-validation
  %(prog)s synth --n 100 --signal 5 --noise 45 --sep 2 --seed 7 --out synth.csv
  %(prog)s run --data synth.csv --out results/ --ktest 10 --krs 100 --kens 10

  # Fixed train/test with bootstrap intervals, baseline search space
  %(prog)s run --mode fixed --train train.csv --test test.csv --baseline --out base/

  # Summary table of a finished run
  %(prog)s inspect results/ --metric auc
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Optimise and evaluate")
    _add_common(run)
    run.add_argument("--data", help="Dataset CSV (nested mode)")
    run.add_argument("--train", help="Training CSV (fixed mode)")
    run.add_argument("--test", help="Test CSV (fixed mode)")
    run.add_argument("--out", required=True, help="Output directory")
    run.add_argument("--mode", choices=sorted(MODE_FLAGS), help="nested (default) or fixed")
    run.add_argument("--ktest", type=int, help="Outer splits (nested mode)")
    run.add_argument("--krs", type=int, help="Workflows sampled per optimisation (N_RS)")
    run.add_argument("--kens", type=int, help="Top-N ensemble size (N_ens)")
    run.add_argument(
        "--ensemble-method", choices=("top_n", "fit_number", "forward_selection")
    )
    run.add_argument(
        "--compare-ensembles",
        action="store_true",
        help="Also score every ensemble method on each split",
    )
    run.set_defaults(func=cmd_run)

    synth = sub.add_parser("synth", help="Write a synthetic dataset")
    synth.add_argument("--n", type=int, default=100, help="Samples")
    synth.add_argument("--signal", type=int, default=5, help="Signal features")
    synth.add_argument("--noise", type=int, default=45, help="Noise features")
    synth.add_argument("--sep", type=float, default=2.0, help="Standardized class separation")
    synth.add_argument("--ratio", type=float, default=0.5, help="Fraction of class 0")
    synth.add_argument("--missing", type=float, default=0.0, help="Fraction of empty cells")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True, help="CSV path")
    synth.add_argument("--groups-out", help="Also write the feature-group CSV here")
    synth.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    synth.set_defaults(func=cmd_synth)

    inspect = sub.add_parser("inspect", help="Print a run's summary table")
    inspect.add_argument("report", help="report.json or its run directory")
    inspect.add_argument("--metric", help="Show a single metric")
    inspect.set_defaults(func=cmd_inspect)

    sweep = sub.add_parser("sweep", help="N_RS x N_ens sweep with repeated seeds")
    _add_common(sweep)
    sweep.add_argument("--data", required=True, help="Dataset CSV")
    sweep.add_argument("--out", required=True, help="Output directory")
    sweep.add_argument("--grid-rs", type=_int_list, default=[10, 100], help="e.g. 10,100,1000")
    sweep.add_argument("--grid-ens", type=_int_list, default=[1, 10], help="e.g. 1,10,100")
    sweep.add_argument("--repeats", type=int, default=10, help="Seeds per grid point")
    sweep.add_argument("--ktest", type=int, default=10, help="Outer splits per repeat")
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as e:
        print(f"❌ Input error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except Exception as e:  # noqa: BLE001
        logger.debug("Runtime failure", exc_info=True)
        print(f"❌ Runtime failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME_FAILURE


if __name__ == "__main__":
    sys.exit(main())
