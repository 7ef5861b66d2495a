"""
cycap - Cycle Cancel and Patch
Configuration and constants module.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# --- Load Environment Variables ---
load_dotenv()


def _env_int(key: str, default: int) -> int:
    try:
        return int(os.getenv(key, default))
    except (TypeError, ValueError):
        return default


# --- Path Configuration ---
BASE_DIR = Path(__file__).parent.parent  # Points to cycap project root
OUTPUT_DIR = os.getenv("CYCAP_REPORT_DIR", "reports")
CACHE_DIR = os.getenv("CYCAP_CACHE_DIR", ".cache")
PRESET_FILE = os.getenv("CYCAP_PRESETS", str(BASE_DIR / "presets.yaml"))

# --- Runtime Configuration ---
CACHE_TTL_HOURS = 24
MAX_JOBS = max(1, _env_int("CYCAP_MAX_JOBS", os.cpu_count() or 1))
DEFAULT_TRIALS = 100
DEFAULT_SEED = 0

# --- Logging ---
LOG_LEVELS = ["error", "info", "debug"]
LOG_LEVEL = os.getenv("CYCAP_LOG", "error").lower()
if LOG_LEVEL not in LOG_LEVELS:
    LOG_LEVEL = "error"


# --- Limits ---
class Limits:
    MIN_VERTICES = 3
    HELD_KARP_MAX_N = 16
    CALIBRATION_RUNS = 5
    TIME_CAP_FACTOR = 10
    GAP_DECIMALS = 4
    FIGURE3_PROHIBITIVE = 1000
    # Floyd-Warshall distances saturate here; two saturated values still sum inside int64
    DISTANCE_FLOOR = -(2 ** 60)
