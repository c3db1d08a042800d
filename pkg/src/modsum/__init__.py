"""Modular-addition checksums and their fault-detection analysis."""

from .algorithms import PRESETS, AlgorithmSpec, Family, preset
from .checksum import (
    CodeWord,
    StreamState,
    checksum,
    dual_sum_checksum,
    encode_codeword,
    koopman_checksum,
    koopman_parity_checksum,
    parity_bit,
    single_sum_checksum,
    stream_finalize,
    stream_init,
    stream_update,
    verify_codeword,
)
from .errors import (
    BadCheckLength,
    BadFaultPosition,
    ChecksumError,
    EmptyDataWord,
    EvenModulus,
    InvalidSpec,
    StateConsumed,
    TooManyPatterns,
    WrongFamily,
)

__version__ = "0.1.0"
