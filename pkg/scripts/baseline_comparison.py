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
Full search space vs. the LASSO + logistic-regression baseline.

Runs nested cross-validation twice on the same dataset and outer splits, once
over the default space and once over the baseline space, writes both reports
in the usual schema and prints the metrics side by side.

Usage:
  scripts/baseline_comparison.py
  scripts/baseline_comparison.py --data my_features.csv --ktest 20 --krs 200 --kens 20
  scripts/baseline_comparison.py --noise-only

Reports go to <out>/full/ and <out>/baseline/.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

# Make sibling `cashopt/` and `config/` importable when running from scripts/
REPO_ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO_ROOT))

from cashopt.dataset import load_csv  # noqa: E402
from cashopt.evaluation import NESTED_CV, EvaluationConfig, run_nested_cv  # noqa: E402
from cashopt.logging_config import setup_logging  # noqa: E402
from cashopt.metrics import METRIC_NAMES  # noqa: E402
from cashopt.optimizer import OptimizerConfig  # noqa: E402
from cashopt.report import write_report  # noqa: E402
from cashopt.search_space import baseline_space  # noqa: E402
from cashopt.synth import SynthSpec, generate  # noqa: E402

logger = logging.getLogger("cashopt.scripts.baseline")


def main() -> int:
    p = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter
    )
    p.add_argument("--data", help="Dataset CSV (default: synthetic signal dataset)")
    p.add_argument("--noise-only", action="store_true", help="Synthetic data without signal")
    p.add_argument("--out", default="comparisons/latest", help="Output directory")
    p.add_argument("--ktest", type=int, default=10, help="Outer splits")
    p.add_argument("--krs", type=int, default=100, help="Workflows per optimisation")
    p.add_argument("--kens", type=int, default=10, help="Top-N ensemble size")
    p.add_argument("--workers", type=int, default=int(os.getenv("CASHOPT_WORKERS", "1")))
    p.add_argument("--seed", type=int, default=0, help="Master seed")
    p.add_argument("--verbose", "-v", action="store_true", help="Enable debug logging.")
    args = p.parse_args()

    setup_logging("DEBUG" if args.verbose else "INFO")
    if args.data:
        data = load_csv(args.data)
    else:
        signal = 0 if args.noise_only else 5
        data = generate(
            SynthSpec(n_samples=100, n_signal_features=signal, n_noise_features=50 - signal, seed=7)
        )

    cfg = EvaluationConfig(
        mode=NESTED_CV,
        k_test=args.ktest,
        optimizer=OptimizerConfig(n_random_search=args.krs, n_ensemble=args.kens),
        master_seed=args.seed,
    )
    reports = {}
    for name, space in (("full", None), ("baseline", baseline_space())):
        logger.info(f"Running the {name} space")
        reports[name] = run_nested_cv(data, cfg, space=space, n_jobs=args.workers)
        write_report(reports[name], Path(args.out) / name)

    print("\n" + "=" * 72)
    print("FULL SPACE vs BASELINE")
    print("=" * 72)
    print(f"{'metric':12s} {'full':>24s} {'baseline':>24s}")
    for metric in METRIC_NAMES:
        cells = []
        for name in ("full", "baseline"):
            ci = reports[name].intervals[metric]
            cells.append(f"{ci.mean:.3f} [{ci.lower:.3f}, {ci.upper:.3f}]")
        print(f"{metric:12s} {cells[0]:>24s} {cells[1]:>24s}")
    print(f"\nfull-space members: {reports['full'].member_histogram()}")
    print(f"Reports: {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
