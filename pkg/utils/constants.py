#!/usr/bin/env python3
# utils/constants.py - Global constants for sievelab

import os

# Constants
DEFAULT_CONFIG_PATH = os.path.expanduser("~/.sievelab.toml")
HISTORY_DIR = os.path.expanduser("~/.tmp/sievelab")
HISTORY_FILE = os.path.join(HISTORY_DIR, "history")
HISTORY_MAX_LINES = 1000
DEFAULT_OUT_DIR = "results"
VERSION = "0.4.0"

# Linear solver: relative residual target and iteration cap factor (cap = factor * sqrt(n))
CG_RTOL = 1e-10
CG_MAXITER_FACTOR = 50
CG_MIN_ITERATIONS = 200

# Monte Carlo volume estimates of the cluster shield
MC_SAMPLES = 1_000_000

# Cell potentials are reused on a log lattice of this ratio in (l, h)
CELL_CACHE_RATIO = 1.05

# Direct thin-domain solves beyond this many unknowns are recorded as omissions
DEFAULT_MAX_UNKNOWNS = 2_000_000

# N = 3 scalings with eps^2 ln(1/delta) above this are logged as far from the limit
ADMISSIBILITY_LIMIT = 0.1

STUDY_KINDS = ("capacity", "gamma", "classify", "regimes", "tf-energy", "convergence")
