"""Bit-exact IEEE 754 binary32/binary64 codecs."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction

from .errors import ConversionOverflow, InvalidFormat
from .fpsys import (
    BINARY32,
    BINARY64,
    NEAREST_EVEN,
    FpClass,
    FpFormat,
    FpValue,
    RoundingMode,
    exact,
    inf,
    nan,
    round_real,
    zero,
    _finite,
)

LAYOUTS = {32: (8, 23), 64: (11, 52)}
FORMATS = {32: BINARY32, 64: BINARY64}


def _layout(width: int):
    try:
        return LAYOUTS[width]
    except KeyError:
        raise InvalidFormat(f"no codec for width {width}; use 32 or 64") from None


@dataclass(frozen=True)
class BitPattern:
    width: int
    sign: int
    exponent_field: int
    fraction_field: int

    def __post_init__(self):
        we, wf = _layout(self.width)
        if self.sign not in (0, 1):
            raise ValueError("sign bit must be 0 or 1")
        if not 0 <= self.exponent_field < (1 << we):
            raise ValueError(f"exponent field needs {we} bits")
        if not 0 <= self.fraction_field < (1 << wf):
            raise ValueError(f"fraction field needs {wf} bits")

    @property
    def exponent_bits(self) -> int:
        return LAYOUTS[self.width][0]

    @property
    def fraction_bits(self) -> int:
        return LAYOUTS[self.width][1]

    @property
    def bias(self) -> int:
        return (1 << (self.exponent_bits - 1)) - 1

    @property
    def fmt(self) -> FpFormat:
        return FORMATS[self.width]

    def to_int(self) -> int:
        we, wf = _layout(self.width)
        return (self.sign << (we + wf)) | (self.exponent_field << wf) | self.fraction_field

    def __int__(self) -> int:
        return self.to_int()

    def __str__(self) -> str:
        we, wf = _layout(self.width)
        return f"{self.sign}|{self.exponent_field:0{we}b}|{self.fraction_field:0{wf}b}"

    def hex(self) -> str:
        return f"0x{self.to_int():0{self.width // 4}x}"

    def classify(self) -> FpClass:
        top = (1 << self.exponent_bits) - 1
        if self.exponent_field == 0:
            return FpClass.ZERO if self.fraction_field == 0 else FpClass.SUBNORMAL
        if self.exponent_field == top:
            return FpClass.INF if self.fraction_field == 0 else FpClass.NAN
        return FpClass.NORMAL

    @classmethod
    def from_int(cls, n: int, width: int) -> "BitPattern":
        we, wf = _layout(width)
        if not 0 <= n < (1 << width):
            raise ValueError(f"{n} does not fit in {width} bits")
        return cls(width, n >> (we + wf), (n >> wf) & ((1 << we) - 1), n & ((1 << wf) - 1))

    @classmethod
    def parse(cls, text: str, width: int | None = None) -> "BitPattern":
        """Read ``s|e...e|f...f``, a bare bit string, or ``0x...`` hex."""
        s = text.strip().replace(" ", "").replace("_", "")
        if s.lower().startswith("0x"):
            digits = s[2:]
            if width is None:
                width = len(digits) * 4
            return cls.from_int(int(digits, 16), width)
        bits = s.replace("|", "")
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"not a bit pattern: {text!r}")
        if width is None:
            width = len(bits)
        if len(bits) != width:
            raise ValueError(f"expected {width} bits, got {len(bits)}")
        if "|" in s:
            parts = s.split("|")
            we, wf = _layout(width)
            if [len(p) for p in parts] != [1, we, wf]:
                raise ValueError(f"field widths of {text!r} do not match binary{width}")
        return cls.from_int(int(bits, 2), width)

    @classmethod
    def from_float(cls, x: float, width: int = 64) -> "BitPattern":
        code = "<d" if width == 64 else "<f"
        raw = "<Q" if width == 64 else "<I"
        return cls.from_int(struct.unpack(raw, struct.pack(code, x))[0], width)

    def to_float(self) -> float:
        code = "<d" if self.width == 64 else "<f"
        raw = "<Q" if self.width == 64 else "<I"
        return struct.unpack(code, struct.pack(raw, self.to_int()))[0]


def pack(v: FpValue, width: int) -> BitPattern:
    """Pack a member of binary32/binary64 into its bit fields."""
    we, wf = _layout(width)
    fmt = FORMATS[width]
    top = (1 << we) - 1
    sign = 1 if v.negative else 0
    if v.kind is FpClass.NAN:
        return BitPattern(width, 0, top, 1 << (wf - 1))
    if v.kind is FpClass.INF:
        return BitPattern(width, sign, top, 0)
    if v.kind is FpClass.ZERO:
        return BitPattern(width, sign, 0, 0)
    if v.p != fmt.p or v.beta != 2:
        raise InvalidFormat(f"value is not a binary{width} member")
    if v.kind is FpClass.SUBNORMAL:
        return BitPattern(width, sign, 0, v.significand)
    bias = (1 << (we - 1)) - 1
    return BitPattern(width, sign, v.exponent + bias, v.significand - (1 << wf))


def encode(q, width: int = 64, mode=NEAREST_EVEN) -> BitPattern:
    """Round ``q`` to binary``width`` and pack it.  Overflow packs as per the rounding mode."""
    _layout(width)
    fmt = FORMATS[width]
    mode = RoundingMode.parse(mode)
    if isinstance(q, FpValue):
        if not q.is_finite():
            return pack(nan(fmt) if q.is_nan() else inf(fmt, q.negative), width)
        if q.is_zero():
            return pack(zero(fmt, q.negative), width)
    if isinstance(q, float):
        if math.isnan(q):
            return pack(nan(fmt), width)
        if math.isinf(q):
            return pack(inf(fmt, q < 0), width)
        if q == 0:
            return pack(zero(fmt, math.copysign(1.0, q) < 0), width)
    if isinstance(q, str) and q.strip().lower() in ("-0", "-0.0"):
        return pack(zero(fmt, True), width)
    return pack(round_real(exact(q), fmt, mode), width)


def decode(bits: BitPattern | str) -> FpValue:
    """Unpack a bit pattern into an :class:`FpValue` of the matching format."""
    if isinstance(bits, str):
        bits = BitPattern.parse(bits)
    fmt = bits.fmt
    negative = bits.sign == 1
    kind = bits.classify()
    if kind is FpClass.NAN:
        return nan(fmt)
    if kind is FpClass.INF:
        return inf(fmt, negative)
    if kind is FpClass.ZERO:
        return zero(fmt, negative)
    if kind is FpClass.SUBNORMAL:
        return _finite(fmt, negative, bits.fraction_field, fmt.L)
    m = bits.fraction_field | (1 << bits.fraction_bits)
    return _finite(fmt, negative, m, bits.exponent_field - bits.bias)


def decode_value(bits: BitPattern | str):
    """Exact rational for finite patterns, otherwise ``float('inf')``-style specials."""
    v = decode(bits)
    return v.to_fraction() if v.is_finite() else float(v)


INT16_MIN = -(1 << 15)
INT16_MAX = (1 << 15) - 1


def float_to_int16(q) -> int:
    """Narrowing conversion: truncate toward zero, then require a signed 16-bit result."""
    if isinstance(q, float) and not math.isfinite(q):
        raise ConversionOverflow(f"{q!r} does not fit in a signed 16-bit integer")
    if isinstance(q, FpValue) and not q.is_finite():
        raise ConversionOverflow(f"{q} does not fit in a signed 16-bit integer")
    t = int(exact(q))  # int() of a Fraction truncates toward zero
    if not INT16_MIN <= t <= INT16_MAX:
        raise ConversionOverflow(f"{t} does not fit in a signed 16-bit integer")
    return t


def unit_roundoff(width: int) -> Fraction:
    return FORMATS[width].unit_roundoff()
