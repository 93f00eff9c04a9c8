"""Application-wide constants.

This module centralizes magic numbers, format constants and enumerations
shared between the core modules, the file formats and the CLI.
"""

from enum import Enum


class CipherMode(str, Enum):
    """Reconciliation codec variant."""

    BIT = "bit"
    GRAY = "gray"


class PairClass(str, Enum):
    """Feature pair class used by the experiment harness."""

    INTER = "inter"
    INTRA = "intra"


class IntervalKind(str, Enum):
    """Sign classification of a spacetime interval."""

    TIMELIKE = "timelike"
    LIGHTLIKE = "lightlike"
    SPACELIKE = "spacelike"


# splitmix64 constants
MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_MULT_1 = 0xBF58476D1CE4E5B9
MIX_MULT_2 = 0x94D049BB133111EB
STEP_SALT = 0x632BE59BD9B4E019

# Seed salts keeping feature synthesis and CLI inputs apart from matrix streams
FEATURE_SALT = 0xD1B54A32D192ED03
INPUT_SALT = 0x8CB92BA72F3D8DD7
ADVERSARY_SALT = 0xA0761D6478BD642F

# Gaussian generation is processed in row blocks of roughly this many entries
GAUSSIAN_BLOCK_ENTRIES = 1 << 20

# Exact binomial coefficients up to this n, log-gamma above
EXACT_BINOMIAL_MAX_N = 64

# Entanglement key file layout (little-endian)
KEY_MAGIC = b"ENTK"
KEY_VERSION = 1
KEY_HEADER_FORMAT = "<4sHHIIIIQ"
KEY_HEADER_SIZE = 32
KEY_INDEX_SIZE = 4

# Netpbm
NETPBM_MAX_MAXVAL = 65535
NETPBM_DEFAULT_MAXVAL = 65535

# Experiment harness
MIDDLE_BAND = (0.1, 0.9)
EUCLID_SQ_MAX = 4.0
MAX_INTRA_ANGLE = 0.25  # fraction of pi, i.e. 45 degrees

# Reconciliation
MIN_PILOT_LEN = 8
GRAY_CONVERGENCE_TOL = 1e-6
GRAY_MSE_TARGET = 1e-4

# CSV headers
TRAJECTORY_HEADER = (
    "pair_id",
    "step",
    "angle_theta",
    "hamming_k",
    "hamming_n",
    "euclid_sq",
    "euclid_sq_flipped",
)
EXPORT3D_HEADER = ("step", "cx", "cy", "cz", "cpx", "cpy", "cpz")
SWEEP_HEADER = ("alpha", "t_used", "mse", "orientation", "euclid_sq")

# CLI exit codes
EXIT_OK = 0
EXIT_IO_ERROR = 1
EXIT_VALIDATION_ERROR = 2
