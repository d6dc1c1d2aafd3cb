"""
Global Configuration for Operations
Centralized settings that are shared across all operations
"""

from typing import Dict, Tuple

from core.littlewood_paley import LP_CHECKS


# ==========================================
# Output Configuration
# ==========================================

DEFAULT_OUTPUT_DIR = "output"
DEFAULT_LOG_LEVEL = "INFO"

DIAGNOSTICS_FILE = "diagnostics.csv"
TWIN_FILE = "twin.csv"
APRIORI_FILE = "apriori.csv"
AUDIT_FILE_TEMPLATE = "audit-{kind}.csv"
AUDIT_SERIES_TEMPLATE = "audit-{kind}-series.csv"
LP_REPORT_TEMPLATE = "lp-report-{check}.csv"
SNAPSHOT_TEMPLATE = "{name}_{index:05d}.snap"


# ==========================================
# Audit Configuration
# ==========================================

AUDIT_KINDS = ("lyapunov", "uniqueness", "scaling", "energy")

NEGATIVE_CONTROLS: Dict[str, Tuple[str, ...]] = {
    "lyapunov": ("break-projection", "break-symmetry"),
    "uniqueness": ("swap-rotation-for-strain",),
    "scaling": (),
    "energy": (),
}

DEFAULT_AUDIT_SEEDS = {
    "lyapunov": 20,
    "uniqueness": 10,
    "scaling": 1,
    "energy": 1,
}

DEFAULT_LYAPUNOV_TOLERANCE = 1e-10
DEFAULT_UNIQUENESS_TOLERANCE = 1e-9
DEFAULT_POWER_THRESHOLD = 1e-3
DEFAULT_SCALING_TOLERANCE = 1e-6
DEFAULT_SCALING_DELTA = 2
DEFAULT_RESIDUAL_TOLERANCE = 1e-2
DEFAULT_MONITOR_TOLERANCE = 1e-10

# number of dt-halvings in the energy audit (runs at dt, dt/2, ...)
DEFAULT_ENERGY_REFINEMENTS = 1


# ==========================================
# Littlewood-Paley Check Configuration
# ==========================================

DEFAULT_LP_TRIALS = 100
DEFAULT_LP_K_MAX = 5
DEFAULT_PRODUCT_EXPONENTS = (0.5, 0.5)

# Frozen per-check ceilings on the empirical ratio
LP_THRESHOLDS: Dict[str, float] = {
    "bernstein": 2.0,
    "bernstein-derivative": 2.0,
    "commutator": 25.0,
    "product-law": 10.0,
    "sqrtN": 5.0,
    "L2p": 10.0,
}

# Floors, where the inequality is two-sided
LP_FLOORS: Dict[str, float] = {
    "bernstein-derivative": 9.0 / 16.0,
}

LP_CHECK_CHOICES = LP_CHECKS + ("all",)
