"""Configuration and constants for the dCSR codec and benchmark tool."""
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

TOOL_VERSION = "1.0.0"

# Worker configuration
_threads = os.getenv("DCSR_THREADS", "1")
try:
    DCSR_THREADS = int(_threads)
except ValueError:
    raise ValueError(f"DCSR_THREADS must be an integer, got {_threads!r}")
if DCSR_THREADS < 1:
    raise ValueError("DCSR_THREADS must be at least 1")

# Encoding
DEFAULT_GROUP_SIZE = 16  # 128-bit vector of 8-bit lanes
SUPPORTED_GROUP_SIZES = (2, 4, 8, 16, 32)
OFFSET_MAX = 255  # unsigned 8-bit gather/scatter offset
DELTA_MAX = 127  # 4 base bits + extensible bits 4..6
INTERCEPT_DELTA_MIN = -128
INTERCEPT_DELTA_MAX = 127
MAX_DENSE_ROW_LENGTH = 65535  # slopes are stored as u16

# Dynamic bitwidth extension
BASE_BITS = 4
EXTENSION_BIT_POSITIONS = (4, 5, 6)

# Relative indexing
DEFAULT_RI_BITS = 4
RI_BITS_RANGE = (2, 8)

# Container
CONTAINER_VERSION = 1
SECTION_ALIGNMENT = 4
FLAG_CRC32 = 0x01
DCSR_MAGIC = b"DCSR"
CSR_MAGIC = b"CSRX"
BCSR_MAGIC = b"BCSR"
RI_MAGIC = b"RIDX"
DENSE_MAGIC = b"DMI8"
U16_MAX = 0xFFFF

# Formats and kernels
FORMATS = ("dcsr", "csr", "bcsr", "ri")
KERNELS = ("dense", "dcsr-vb", "dcsr-ib", "dcsr-spmv", "ri")
BCSR_BLOCK = (2, 2)

# Quantization defaults
DEFAULT_INPUT_ZERO_POINT = 0
DEFAULT_OUTPUT_ZERO_POINT = 0
DEFAULT_MULTIPLIER = 1
DEFAULT_SHIFT = 8

# Bench
DEFAULT_SWEEP = (0.7, 0.75, 0.8, 0.85, 0.9, 0.95)  # pruning levels of the pointwise and classifier layers
DEFAULT_PIXELS = 49  # 7x7 feature map of the pointwise layers
DEFAULT_REPEAT = 1
REPORT_FORMATS = ("json", "csv")

# Exit codes
EXIT_OK = 0
EXIT_VERIFY_MISMATCH = 1
EXIT_USAGE = 2
EXIT_ORACLE_MISMATCH = 3

# Logging
LOG_LEVEL = os.getenv("DCSR_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
