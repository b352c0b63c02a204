"""Centralized configuration for QChan - qubit stochastic map analysis."""

import os
import dotenv

dotenv.load_dotenv()

# State validation
STATE_TOL = 1e-12
PSD_TOL = 1e-10
PURE_TOL = 1e-10

# Channels
TP_TOL = 1e-10
UNITAL_TOL = 1e-12
MAX_KRAUS_OPS = 8
CROSS_CHECK_TOL = 1e-12

# Decompositions
ROTATION_TOL = 1e-10
DEGENERACY_RTOL = float(os.getenv("QCHAN_DEGENERACY_RTOL", "1e-9"))

# Dense Hermitian eigensolver (cyclic Jacobi)
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100

# Output norm / entropy maximization over the Bloch sphere
SPHERE_ASCENT_TOL = 1e-11
SPHERE_ASCENT_MAX_ITER = 20000

# Monte Carlo scans - CLI > env > default
VIOLATION_TOL = float(os.getenv("QCHAN_TOL", "1e-7"))
DEFAULT_SAMPLES = int(os.getenv("QCHAN_SAMPLES", "10000"))
DEFAULT_SEED = int(os.getenv("QCHAN_SEED", "20020415"))
DEFAULT_WORKERS = int(os.getenv("QCHAN_WORKERS", "1"))
SCAN_BATCH_SIZE = 4096
REFINE_ITERATIONS = 120
REFINE_ROUNDS = 6
REFINE_TOL = 1e-12

# Capacity optimizers
MAX_ENSEMBLE_SIZE = 8
CAPACITY_XATOL = 1e-10
CAPACITY_MAX_ITER = 4000
CAPACITY_SPHERE_STARTS = 4
CAPACITY_PRIOR_GRID = (0.2, 0.35, 0.5, 0.65, 0.8)
GEOMETRY_XATOL = 1e-12

# Curves
CURVE_FLOOR = -1e-9
CSV_DIGITS = 17

# Output locations
CHANNEL_DIR = "data/channels"
CURVE_DIR = "data/curves"

LOG_LEVEL = os.getenv("QCHAN_LOG_LEVEL", "INFO")
