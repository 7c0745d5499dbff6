#!/usr/bin/env python3
"""Variance-ratio experiment: mean Var_O/Var_U over 500 random instances for
n = 1..6, using the exact predictors (no shot noise).  Writes ratio_sweep.csv.
"""

import sys

from realshadows.cli import main

if __name__ == "__main__":
    argv = [
        "ratio-sweep",
        "--n-min", "1",
        "--n-max", "6",
        "--instances", "500",
        "--seed", "11",
        "--out", "ratio_sweep.csv",
    ]
    sys.exit(main(argv + sys.argv[1:]))
