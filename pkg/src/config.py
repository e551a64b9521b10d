"""Configuration settings for the ambient backscatter link simulator"""

import os
import logging
from typing import Dict, List, Tuple
from dataclasses import dataclass, field

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

VERSION = "1.0.0"

# Channel statistics of the reference deployment: the source is far from both
# tag and reader, the tag-to-reader link is short.
H_ST_VARIANCE = 1.0
H_SR_VARIANCE = 1.0
H_TR_VARIANCE = 10.0
# Reflection coefficient. Also called the tag coefficient (alpha); one field, one value.
DEFAULT_ETA = 0.5

# Link defaults
DEFAULT_N = 20
DEFAULT_K = 30
DEFAULT_T = 2
DEFAULT_NOISE_POWER = 1.0
DEFAULT_GAMMA_DB = 5.0
DEFAULT_PRIOR_OF_ONE = 0.5
DEFAULT_PSK_ORDER = 8
DEFAULT_BLOCKS = 1000
DEFAULT_SEED = 20170501

# Manchester pairs (first half, second half) as backscatter states
MANCHESTER_ZERO = (1, 0)
MANCHESTER_ONE = (0, 1)
DEFAULT_REFERENCE_PAIR = MANCHESTER_ZERO

DETECTOR_NAMES = ("secomc", "secomc_genie", "nocomc", "baseline")
BASELINE_THRESHOLD_MODES = ("blind", "pilot")
SWEEP_AXES = ("N", "T", "gamma_db", "rcd", "prior")

CSV_COLUMNS = [
    "axis", "detector", "ber_sim", "ci95",
    "ber_exact", "ber_approx", "ber_floor",
    "errors", "trials",
]

# 95% two-sided normal quantile for binomial confidence half-widths
Z_95 = 1.96


@dataclass
class SweepPreset:
    name: str
    description: str
    axis: str
    values: List[float]
    settings: Dict[str, str] = field(default_factory=dict)


# Experiment designs used to study each parameter in isolation
SWEEP_PRESETS = {
    "training-length": SweepPreset(
        name="training-length",
        description="Impact of training length T on trained SeCoMC",
        axis="T",
        values=[1, 2, 5, 10, 20],
        settings={
            "gamma_db": "10", "channel_mode": "fixed_rcd", "rcd": "0.5",
            "n": "20", "detectors": "secomc,secomc_genie", "prior_of_one": "0.5",
        },
    ),
    "sampling-rate": SweepPreset(
        name="sampling-rate",
        description="Impact of sampling rate N on SeCoMC and NoCoMC",
        axis="N",
        values=[10, 25, 50, 100],
        settings={
            "gamma_db": "5", "t": "20", "channel_mode": "fixed_rcd", "rcd": "0.5",
            "detectors": "secomc,secomc_genie,nocomc",
        },
    ),
    "snr": SweepPreset(
        name="snr",
        description="Impact of SNR: error floor of Gaussian ambient signals",
        axis="gamma_db",
        values=[0, 5, 10, 15, 20, 25, 30],
        settings={
            "n": "20", "t": "2", "channel_mode": "fixed_rcd", "rcd": "0.5",
            "detectors": "secomc,secomc_genie,nocomc",
        },
    ),
    "rcd": SweepPreset(
        name="rcd",
        description="Impact of relative channel difference",
        axis="rcd",
        values=[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7],
        settings={
            "n": "20", "t": "2", "gamma_db": "5", "channel_mode": "fixed_rcd",
            "detectors": "secomc,nocomc",
        },
    ),
    "prior-threshold": SweepPreset(
        name="prior-threshold",
        description="Proposed detectors against the threshold baseline under a skewed prior",
        axis="gamma_db",
        values=[0, 5, 10, 15, 20, 25, 30],
        settings={
            "n": "20", "t": "2", "channel_mode": "fixed_rcd", "rcd": "0.5",
            "prior_of_one": "0.2", "detectors": "secomc,nocomc,baseline",
        },
    ),
}

# Formula name -> required parameters for the `analytic` command
ANALYTIC_FORMULAS: Dict[str, Tuple[str, ...]] = {
    "secomc-exact": ("sigma0", "sigma1", "n"),
    "secomc-approx": ("h0sq", "h1sq", "gamma_db", "n"),
    "secomc-floor": ("h0sq", "h1sq", "n"),
    "secomc-det-approx": ("h0sq", "h1sq", "gamma_db", "n"),
    "secomc-det-highsnr": ("h0sq", "h1sq", "gamma_db", "n"),
    "baseline-approx": ("h0sq", "h1sq", "gamma_db", "n"),
    "baseline-floor": ("h0sq", "h1sq", "n"),
    "nocomc-compose": ("p",),
    "nocomc-exact": ("sigma0", "sigma1", "n"),
    "nocomc-approx": ("h0sq", "h1sq", "gamma_db", "n"),
    "nocomc-floor": ("h0sq", "h1sq", "n"),
    "nocomc-det-approx": ("h0sq", "h1sq", "gamma_db", "n"),
    "nocomc-det-highsnr": ("h0sq", "h1sq", "gamma_db", "n"),
    "rcd": ("h0sq", "h1sq"),
}

# Environment variables
THREADS_ENV_VAR = "BACKSCATTER_SIM_THREADS"
OUTPUT_PATH = os.getenv("BACKSCATTER_SIM_OUTPUT", "./output")
LOG_LEVEL = os.getenv("BACKSCATTER_SIM_LOG_LEVEL", "INFO").upper()


def default_threads() -> int:
    """Worker cap from the environment, else the available parallelism"""
    value = os.getenv(THREADS_ENV_VAR)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            logger.warning(f"Ignoring {THREADS_ENV_VAR}={value!r}: not an integer")
    return os.cpu_count() or 1
