"""A floating-point laboratory.

Exact simulation of floating-point systems F(beta, p, L, U), IEEE 754
codecs, a-priori error bounds, condition numbers and small numerical
experiments, all checked against exact rational arithmetic.
"""

from .errors import FplabError
from .fpsys import (
    BINARY32,
    BINARY64,
    CHOP,
    DOWN,
    NEAREST_EVEN,
    TOY,
    UP,
    FpClass,
    FpFormat,
    FpValue,
    RoundingMode,
    exact,
    fp,
    make_format,
    round_real,
)

__version__ = "0.1.0"

__all__ = [
    "BINARY32",
    "BINARY64",
    "CHOP",
    "DOWN",
    "NEAREST_EVEN",
    "TOY",
    "UP",
    "FpClass",
    "FpFormat",
    "FpValue",
    "FplabError",
    "RoundingMode",
    "exact",
    "fp",
    "make_format",
    "round_real",
]
