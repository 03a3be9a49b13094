#!/usr/bin/env -S uv run --script
# /// script
# dependencies = [
#   "python-dotenv>=1.0.0",
#   "pyyaml>=6.0.2",
#   "numpy>=1.26",
#   "scipy>=1.11",
#   "pandas>=2.1",
#   "scikit-learn>=1.3,<1.7",
#   "imbalanced-learn>=0.12",
#   "joblib>=1.3",
# ]
# ///
"""
Random-search / ensemble-size trend check.

Generates the synthetic signal dataset, runs the N_RS x N_ens sweep over
repeated master seeds and reports whether a larger search with a larger
ensemble gives a higher mean test F1_w and a smaller spread across seeds
than a tiny search with a single best workflow.

Usage:
  scripts/sweep_ensemble_size.py
  scripts/sweep_ensemble_size.py --repeats 3 --ktest 3 --small 5,1 --large 20,5
  scripts/sweep_ensemble_size.py --data my_features.csv --out sweeps/mine

Results go to <out>/sweep.csv; one line per workflow in <out>/workflows.log.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

# Make sibling `cashopt/` and `config/` importable when running from scripts/
REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT))

from cashopt.cli import RunLogs  # noqa: E402
from cashopt.dataset import load_csv  # noqa: E402
from cashopt.evaluation import NESTED_CV, EvaluationConfig, run_sweep  # noqa: E402
from cashopt.logging_config import setup_logging  # noqa: E402
from cashopt.optimizer import OptimizerConfig  # noqa: E402
from cashopt.report import write_sweep  # noqa: E402
from cashopt.synth import SynthSpec, generate  # noqa: E402

logger = logging.getLogger("cashopt.scripts.sweep")


def _pair(text: str) -> tuple[int, int]:
    try:
        rs, ens = (int(part) for part in text.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected N_RS,N_ens, got {text!r}") from e
    return rs, ens


def main() -> int:
    p = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    p.add_argument("--data", help="Dataset CSV (default: synthetic signal dataset)")
    p.add_argument("--out", default="sweeps/latest", help="Output directory")
    p.add_argument("--small", type=_pair, default=(10, 1), help="N_RS,N_ens of the small setting")
    p.add_argument("--large", type=_pair, default=(100, 10), help="N_RS,N_ens of the large setting")
    p.add_argument("--repeats", type=int, default=10, help="Master seeds")
    p.add_argument("--ktest", type=int, default=5, help="Outer splits per repeat")
    p.add_argument("--workers", type=int, default=int(os.getenv("CASHOPT_WORKERS", "1")))
    p.add_argument("--seed", type=int, default=0, help="First master seed")
    p.add_argument("--verbose", "-v", action="store_true", help="Enable debug logging.")
    args = p.parse_args()

    setup_logging("DEBUG" if args.verbose else "INFO")
    if args.data:
        data = load_csv(args.data)
    else:
        data = generate(SynthSpec(n_samples=100, n_signal_features=5, n_noise_features=45, seed=7))
    logger.info(f"Sweeping on {data!r}")

    (small_rs, small_ens), (large_rs, large_ens) = args.small, args.large
    base = EvaluationConfig(
        mode=NESTED_CV,
        k_test=args.ktest,
        optimizer=OptimizerConfig(k_training=3),
        master_seed=args.seed,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    with RunLogs(out):
        points = run_sweep(
            data,
            grid_rs=[small_rs, large_rs],
            grid_ens=[small_ens, large_ens],
            n_repeats=args.repeats,
            k_test=args.ktest,
            base_cfg=base,
            n_jobs=args.workers,
        )
    path = write_sweep(points, out)

    print("\n" + "=" * 64)
    print("SWEEP")
    print("=" * 64)
    print(f"{'N_RS':>6s} {'N_ens':>6s} {'F1_w mean':>10s} {'F1_w sd':>8s} {'AUC':>6s}")
    for pt in points:
        print(
            f"{pt.n_random_search:6d} {pt.n_ensemble:6d} {pt.mean_f1_weighted:10.3f} "
            f"{pt.std_f1_weighted:8.3f} {pt.mean_auc:6.3f}"
        )

    by_pair = {(pt.n_random_search, pt.n_ensemble): pt for pt in points}
    small, large = by_pair[args.small], by_pair[args.large]
    improved = large.mean_f1_weighted >= small.mean_f1_weighted
    steadier = large.std_f1_weighted < small.std_f1_weighted
    print(
        f"\nmean F1_w {small.mean_f1_weighted:.3f} -> {large.mean_f1_weighted:.3f} "
        f"({'ok' if improved else 'NOT improved'}); "
        f"sd {small.std_f1_weighted:.3f} -> {large.std_f1_weighted:.3f} "
        f"({'ok' if steadier else 'NOT smaller'})"
    )
    print(f"Wrote {path} in {time.perf_counter() - start:.0f}s")
    return 0 if improved and steadier else 1


if __name__ == "__main__":
    sys.exit(main())
