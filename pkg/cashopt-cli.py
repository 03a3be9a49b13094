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
cashopt CLI

Runs the engine from a checkout without installing it:
  ./cashopt-cli.py synth --out synth.csv
  ./cashopt-cli.py run --data synth.csv --out results/
"""

import sys
from pathlib import Path

# Make sibling `cashopt/` and `config/` importable
sys.path.insert(0, str(Path(__file__).resolve().parent))

from cashopt.cli import main

if __name__ == "__main__":
    sys.exit(main())
