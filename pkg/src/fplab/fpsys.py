"""Exact rationals and simulated floating-point systems F(beta, p, L, U).

Every member of a simulated system is an :class:`FpValue` holding a radix-beta
digit vector and an exponent; every finite member converts exactly to a
:class:`fractions.Fraction`.  Rounding is done once, from the exact rational,
with integer arithmetic only.
"""

from __future__ import annotations

import enum
import math
import numbers
import re
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

from .errors import InvalidFormat, TooLarge, UlpUndefined

ExactScalar = Fraction

_DIGIT_CHARS = "0123456789abcdefghijklmnopqrstuvwxyz"

DEFAULT_ENUMERATION_CAP = 10**6


def exact(x) -> Fraction:
    """Convert ``x`` to an exact rational.

    Decimal strings are read exactly (``"0.1"`` is 1/10, not the binary64
    neighbour of 0.1); floats are converted exactly; ``"p/q"`` is accepted.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"{x!r} has no exact rational value")
        return Fraction(x)
    if isinstance(x, str):
        text = x.strip().replace("_", "")
        try:
            return Fraction(text)
        except ValueError:
            raise ValueError(f"cannot read {x!r} as an exact number") from None
    if isinstance(x, FpValue):
        return x.to_fraction()
    if isinstance(x, Decimal):
        return Fraction(x)
    if isinstance(x, numbers.Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, numbers.Real):
        return exact(float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class RoundingMode(enum.Enum):
    NEAREST_EVEN = "nearest_even"
    CHOP = "chop"
    UP = "up"
    DOWN = "down"

    @classmethod
    def parse(cls, mode: "RoundingMode | str") -> "RoundingMode":
        if isinstance(mode, cls):
            return mode
        key = str(mode).strip().lower().replace("-", "_")
        aliases = {
            "rne": cls.NEAREST_EVEN,
            "nearest": cls.NEAREST_EVEN,
            "nearesteven": cls.NEAREST_EVEN,
            "rz": cls.CHOP,
            "toward_zero": cls.CHOP,
            "truncate": cls.CHOP,
            "ru": cls.UP,
            "rd": cls.DOWN,
        }
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown rounding mode {mode!r}") from None


NEAREST_EVEN = RoundingMode.NEAREST_EVEN
CHOP = RoundingMode.CHOP
UP = RoundingMode.UP
DOWN = RoundingMode.DOWN


class FpClass(enum.Enum):
    ZERO = "zero"
    SUBNORMAL = "subnormal"
    NORMAL = "normal"
    INF = "inf"
    NAN = "nan"


@dataclass(frozen=True)
class FpFormat:
    """Parameters of a simulated system F(beta, p, L, U)."""

    beta: int
    p: int
    L: int
    U: int
    subnormals: bool = True
    guard_digit: bool = True

    def __post_init__(self):
        for name in ("beta", "p", "L", "U"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise InvalidFormat(f"{name} must be an integer, got {value!r}")
        if self.beta < 2:
            raise InvalidFormat(f"radix must be at least 2, got {self.beta}")
        if self.p < 1:
            raise InvalidFormat(f"precision must be at least 1, got {self.p}")
        if self.L > self.U:
            raise InvalidFormat(f"L={self.L} exceeds U={self.U}")

    def __str__(self) -> str:
        return f"F({self.beta}, {self.p}, {self.L}, {self.U})"

    @cached_property
    def radix_p(self) -> int:
        return self.beta**self.p

    @cached_property
    def radix_p1(self) -> int:
        return self.beta ** (self.p - 1)

    @cached_property
    def eps(self) -> Fraction:
        return Fraction(1, self.radix_p1)

    @cached_property
    def x_min(self) -> Fraction:
        return Fraction(self.beta) ** self.L

    @cached_property
    def x_max(self) -> Fraction:
        return (self.beta - Fraction(1, self.radix_p1)) * Fraction(self.beta) ** self.U

    @cached_property
    def subnormal_min(self) -> Fraction:
        return Fraction(self.beta) ** (self.L - self.p + 1)

    def unit_roundoff(self, mode=NEAREST_EVEN) -> Fraction:
        mode = RoundingMode.parse(mode)
        return self.eps / 2 if mode is NEAREST_EVEN else self.eps

    def replace(self, **changes) -> "FpFormat":
        params = dict(
            beta=self.beta,
            p=self.p,
            L=self.L,
            U=self.U,
            subnormals=self.subnormals,
            guard_digit=self.guard_digit,
        )
        params.update(changes)
        return FpFormat(**params)


def make_format(
    beta: int, p: int, L: int, U: int, *, subnormals: bool = True, guard_digit: bool = True
) -> FpFormat:
    return FpFormat(beta, p, L, U, subnormals=subnormals, guard_digit=guard_digit)


TOY = make_format(2, 3, -2, 1)
BINARY32 = make_format(2, 24, -126, 127)
BINARY64 = make_format(2, 53, -1022, 1023)


def _to_digits(m: int, beta: int, p: int) -> tuple:
    if beta == 2:
        return tuple(map(int, f"{m:0{p}b}"))
    if beta == 10:
        return tuple(map(int, f"{m:0{p}d}"))
    out = [0] * p
    for i in range(p - 1, -1, -1):
        m, out[i] = divmod(m, beta)
    return tuple(out)


def _from_digits(digits, beta: int) -> int:
    if beta <= 10:
        return int("".join(map(str, digits)) or "0", beta)
    m = 0
    for d in digits:
        m = m * beta + d
    return m


@dataclass(frozen=True)
class FpValue:
    """A member of a simulated floating-point system.

    ``digits`` is the significand d0 d1 ... d(p-1); the represented number is
    (d0.d1...d(p-1))_beta * beta**exponent.  Zeros carry a sign.
    """

    kind: FpClass
    negative: bool
    digits: tuple
    exponent: int
    beta: int
    significand: int = field(default=-1, compare=False, repr=False)

    def __post_init__(self):
        if self.significand < 0:
            object.__setattr__(self, "significand", _from_digits(self.digits, self.beta))

    @property
    def p(self) -> int:
        return len(self.digits)

    @property
    def sign(self) -> int:
        return -1 if self.negative else 1

    def is_finite(self) -> bool:
        return self.kind not in (FpClass.INF, FpClass.NAN)

    def is_zero(self) -> bool:
        return self.kind is FpClass.ZERO

    def is_nan(self) -> bool:
        return self.kind is FpClass.NAN

    def is_inf(self) -> bool:
        return self.kind is FpClass.INF

    def to_fraction(self) -> Fraction:
        if self.kind is FpClass.ZERO:
            return Fraction(0)
        if not self.is_finite():
            raise ValueError(f"{self.kind.value} has no exact rational value")
        shift = self.exponent - self.p + 1
        if shift >= 0:
            mag = Fraction(self.significand * self.beta**shift)
        else:
            mag = Fraction(self.significand, self.beta**-shift)
        return -mag if self.negative else mag

    value = to_fraction

    def __float__(self) -> float:
        if self.kind is FpClass.NAN:
            return math.nan
        if self.kind is FpClass.INF:
            return -math.inf if self.negative else math.inf
        if self.kind is FpClass.ZERO:
            return -0.0 if self.negative else 0.0
        return float(self.to_fraction())

    def __neg__(self) -> "FpValue":
        if self.kind is FpClass.NAN:
            return self
        return FpValue(
            self.kind, not self.negative, self.digits, self.exponent, self.beta, self.significand
        )

    def __abs__(self) -> "FpValue":
        return -self if self.negative and self.kind is not FpClass.NAN else self

    def __str__(self) -> str:
        return format_value(self)


def _zero(fmt: FpFormat, negative: bool = False) -> FpValue:
    return FpValue(FpClass.ZERO, negative, (0,) * fmt.p, fmt.L, fmt.beta, 0)


def zero(fmt: FpFormat, negative: bool = False) -> FpValue:
    return _zero(fmt, negative)


def inf(fmt: FpFormat, negative: bool = False) -> FpValue:
    return FpValue(FpClass.INF, negative, (), fmt.U + 1, fmt.beta, 0)


def nan(fmt: FpFormat) -> FpValue:
    return FpValue(FpClass.NAN, False, (), fmt.U + 1, fmt.beta, 0)


def _finite(fmt: FpFormat, negative: bool, m: int, e: int) -> FpValue:
    if m == 0:
        return _zero(fmt, negative)
    kind = FpClass.NORMAL if m >= fmt.radix_p1 else FpClass.SUBNORMAL
    return FpValue(kind, negative, _to_digits(m, fmt.beta, fmt.p), e, fmt.beta, m)


def largest(fmt: FpFormat, negative: bool = False) -> FpValue:
    return _finite(fmt, negative, fmt.radix_p - 1, fmt.U)


def smallest_normal(fmt: FpFormat, negative: bool = False) -> FpValue:
    return _finite(fmt, negative, fmt.radix_p1, fmt.L)


def _ge_power(n: int, d: int, beta: int, k: int) -> bool:
    """n/d >= beta**k, exactly."""
    if k >= 0:
        return n >= d * beta**k
    return n * beta**-k >= d


def floor_log(q: Fraction, beta: int) -> int:
    """Largest integer e with beta**e <= |q| (q nonzero)."""
    n, d = abs(q.numerator), q.denominator
    return _floor_log(n, d, beta)


def _floor_log(n: int, d: int, beta: int) -> int:
    if beta == 2:
        e = n.bit_length() - d.bit_length()
    else:
        e = math.floor((math.log(n) - math.log(d)) / math.log(beta))
    while not _ge_power(n, d, beta, e):
        e -= 1
    while _ge_power(n, d, beta, e + 1):
        e += 1
    return e


# Classification of the discarded tail relative to half an ulp.
_EXACT, _BELOW_HALF, _HALF, _ABOVE_HALF = 0, 1, 2, 3


def _overflow(fmt: FpFormat, negative: bool, mode: RoundingMode) -> FpValue:
    if mode is NEAREST_EVEN:
        return inf(fmt, negative)
    if mode is CHOP:
        return largest(fmt, negative)
    if mode is UP:
        return largest(fmt, True) if negative else inf(fmt, False)
    return inf(fmt, True) if negative else largest(fmt, False)


def _finish(
    fmt: FpFormat, negative: bool, m: int, e: int, tail: int, mode: RoundingMode
) -> FpValue:
    """Apply ``mode`` to a truncated significand ``m`` at exponent ``e``.

    ``m`` is the integer significand on the grid beta**(e - p + 1) and
    ``tail`` classifies the discarded part.
    """
    if tail:
        if mode is NEAREST_EVEN:
            bump = tail == _ABOVE_HALF or (tail == _HALF and (m % fmt.beta) % 2 == 1)
        elif mode is CHOP:
            bump = False
        elif mode is UP:
            bump = not negative
        else:
            bump = negative
        if bump:
            m += 1
            if m == fmt.radix_p:
                m = fmt.radix_p1
                e += 1
    if e > fmt.U:
        return _overflow(fmt, negative, mode)
    if e < fmt.L:
        # abrupt underflow: only reachable with subnormals disabled
        if (mode is UP and not negative) or (mode is DOWN and negative):
            return smallest_normal(fmt, negative)
        return _zero(fmt, negative)
    return _finite(fmt, negative, m, e)


def round_real(q, fmt: FpFormat, mode=NEAREST_EVEN, *, negative_zero: bool = False) -> FpValue:
    """Round the exact value ``q`` into ``fmt`` under ``mode``.

    ``negative_zero`` selects the sign when ``q`` is exactly zero.
    """
    q = exact(q)
    mode = RoundingMode.parse(mode)
    if q == 0:
        return _zero(fmt, negative_zero)
    negative = q < 0
    n, d = abs(q.numerator), q.denominator
    e = _floor_log(n, d, fmt.beta)
    if fmt.subnormals and e < fmt.L:
        e = fmt.L
    shift = fmt.p - 1 - e
    if shift >= 0:
        m, r = divmod(n * fmt.beta**shift, d)
        den = d
    else:
        den = d * fmt.beta**-shift
        m, r = divmod(n, den)
    if r == 0:
        tail = _EXACT
    else:
        twice = 2 * r
        tail = _BELOW_HALF if twice < den else _HALF if twice == den else _ABOVE_HALF
    return _finish(fmt, negative, m, e, tail, mode)


def round_sqrt(q, fmt: FpFormat, mode=NEAREST_EVEN) -> FpValue:
    """Correctly rounded square root of the non-negative exact value ``q``.

    Candidates are bracketed with integer square roots; no native floats.
    """
    q = exact(q)
    mode = RoundingMode.parse(mode)
    if q < 0:
        raise ValueError("square root of a negative number")
    if q == 0:
        return _zero(fmt)
    n, d = q.numerator, q.denominator
    beta = fmt.beta
    # exponent f of the root: beta**(2f) <= q < beta**(2f+2)
    f = _floor_log(n, d, beta) // 2
    if fmt.subnormals and f < fmt.L:
        f = fmt.L
    # scaled square: q * beta**(2(p-1-f)) = N / D
    k = 2 * (fmt.p - 1 - f)
    if k >= 0:
        N, D = n * beta**k, d
    else:
        N, D = n, d * beta**-k
    m = math.isqrt(N * D) // D
    if m * m * D == N:
        tail = _EXACT
    else:
        # compare sqrt(N/D) with m + 1/2, i.e. (2m+1)^2 D against 4N
        lhs = (2 * m + 1) ** 2 * D
        rhs = 4 * N
        tail = _BELOW_HALF if lhs > rhs else _HALF if lhs == rhs else _ABOVE_HALF
    return _finish(fmt, False, m, f, tail, mode)


def machine_epsilon(fmt: FpFormat) -> Fraction:
    return fmt.eps


def unit_roundoff(fmt: FpFormat, mode=NEAREST_EVEN) -> Fraction:
    return fmt.unit_roundoff(mode)


def ulp(v: FpValue, fmt: FpFormat) -> Fraction:
    """Spacing of the grid at ``v``; subnormals and zeros share the finest spacing."""
    if not v.is_finite():
        raise UlpUndefined(f"ulp of {v.kind.value} is undefined")
    if v.kind is FpClass.NORMAL:
        return Fraction(fmt.beta) ** (v.exponent - fmt.p + 1)
    return fmt.subnormal_min


def successor(v: FpValue, fmt: FpFormat) -> FpValue:
    """Smallest member of ``fmt`` strictly greater than ``v``."""
    if v.is_nan():
        return v
    if v.is_inf():
        return v if not v.negative else largest(fmt, True)
    # any member above v lies at least one finest spacing away
    return round_real(v.to_fraction() + fmt.subnormal_min / 2, fmt, UP)


def predecessor(v: FpValue, fmt: FpFormat) -> FpValue:
    """Largest member of ``fmt`` strictly smaller than ``v``."""
    if v.is_nan():
        return v
    if v.is_inf():
        return v if v.negative else largest(fmt, False)
    return round_real(v.to_fraction() - fmt.subnormal_min / 2, fmt, DOWN, negative_zero=True)


def count_normals(fmt: FpFormat) -> int:
    return 2 * (fmt.beta - 1) * fmt.radix_p1 * (fmt.U - fmt.L + 1)


def count_subnormals(fmt: FpFormat) -> int:
    """Nonzero subnormals, both signs."""
    return 2 * (fmt.radix_p1 - 1)


def enumerate_values(
    fmt: FpFormat,
    include_subnormals: bool | None = None,
    *,
    positive_only: bool = False,
    include_zero: bool = False,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> list:
    """All finite members of ``fmt`` in ascending order.

    Zero is excluded unless ``include_zero`` is set, so the count of a
    normals-only enumeration is 2(beta-1)beta**(p-1)(U-L+1).
    """
    if include_subnormals is None:
        include_subnormals = fmt.subnormals
    per_sign = count_normals(fmt) // 2
    if include_subnormals:
        per_sign += count_subnormals(fmt) // 2
    total = per_sign * (1 if positive_only else 2) + (1 if include_zero else 0)
    if total > cap:
        raise TooLarge(f"{fmt} has {total} members to enumerate, cap is {cap}")

    positives = []
    if include_subnormals:
        for m in range(1, fmt.radix_p1):
            positives.append(_finite(fmt, False, m, fmt.L))
    for e in range(fmt.L, fmt.U + 1):
        for m in range(fmt.radix_p1, fmt.radix_p):
            positives.append(_finite(fmt, False, m, e))

    out = [] if positive_only else [-v for v in reversed(positives)]
    if include_zero:
        out.append(_zero(fmt))
    out.extend(positives)
    return out


class Extremes(NamedTuple):
    x_min: Fraction
    x_max: Fraction
    subnormal_min: Fraction


def extremes(fmt: FpFormat) -> Extremes:
    return Extremes(fmt.x_min, fmt.x_max, fmt.subnormal_min)


class FixedPointStats(NamedTuple):
    count: int
    spacing: Fraction
    max: Fraction


def fixed_point_stats(beta: int, n: int, p: int) -> FixedPointStats:
    """Size, spacing and largest member of the fixed-point set F(beta, n, p).

    Members are +-(d_n ... d_0 . d_-1 ... d_-p)_beta with zero counted once.
    """
    if beta < 2:
        raise InvalidFormat(f"radix must be at least 2, got {beta}")
    if n < 0 or p < 0:
        raise InvalidFormat("digit counts must be non-negative")
    spacing = Fraction(1, beta**p)
    return FixedPointStats(
        count=2 * beta ** (n + p + 1) - 1,
        spacing=spacing,
        max=Fraction(beta ** (n + 1)) - spacing,
    )


def fp(x, fmt: FpFormat, mode=NEAREST_EVEN) -> FpValue:
    """Shorthand for rounding any exact-convertible ``x`` into ``fmt``."""
    if isinstance(x, float) and not math.isfinite(x):
        if math.isnan(x):
            return nan(fmt)
        return inf(fmt, x < 0)
    if isinstance(x, FpValue) and not x.is_finite():
        return nan(fmt) if x.is_nan() else inf(fmt, x.negative)
    if isinstance(x, FpValue) and x.is_zero():
        return _zero(fmt, x.negative)
    if isinstance(x, float) and x == 0:
        return _zero(fmt, math.copysign(1.0, x) < 0)
    return round_real(exact(x), fmt, mode)


def compare(a: FpValue, b: FpValue) -> int:
    """Numeric three-way comparison of two non-NaN values (-0 == +0)."""
    if a.is_nan() or b.is_nan():
        raise ValueError("NaN is unordered")

    def key(v):
        if v.is_inf():
            return (-1 if v.negative else 1, Fraction(0))
        return (0, v.to_fraction())

    ka, kb = key(a), key(b)
    return (ka > kb) - (ka < kb)


# -- text formats ---------------------------------------------------------


def _digit_char(d: int, beta: int) -> str:
    if beta > len(_DIGIT_CHARS):
        raise ValueError(f"radix {beta} has no single-character digits")
    return _DIGIT_CHARS[d]


def format_value(v: FpValue) -> str:
    """Render ``v`` as ``+(d0.d1...)_beta x beta^e``."""
    sign = "-" if v.negative else "+"
    if v.kind is FpClass.NAN:
        return "nan"
    if v.kind is FpClass.INF:
        return f"{sign}inf"
    if v.kind is FpClass.ZERO:
        return f"{sign}0"
    if v.beta <= len(_DIGIT_CHARS):
        chars = [_digit_char(d, v.beta) for d in v.digits]
        mantissa = chars[0] + ("." + "".join(chars[1:]) if len(chars) > 1 else "")
    else:
        mantissa = ",".join(map(str, v.digits))
    return f"{sign}({mantissa})_{v.beta} × {v.beta}^{v.exponent}"


_VALUE_RE = re.compile(
    r"""^\s*(?P<sign>[+-]?)\s*\(\s*(?P<mant>[0-9a-zA-Z.]+)\s*\)_?(?P<base>\d+)\s*
        (?:×|x|\*)\s*(?P<base2>\d+)\s*\^\s*(?P<exp>[+-]?\d+)\s*$""",
    re.VERBOSE,
)


def parse_value(text: str, fmt: FpFormat, mode=NEAREST_EVEN) -> FpValue:
    """Read the display form of :func:`format_value` (or any exact number)."""
    s = text.strip().lower()
    if s in ("nan", "+nan", "-nan"):
        return nan(fmt)
    if s in ("inf", "+inf", "-inf", "infinity", "+infinity", "-infinity"):
        return inf(fmt, s.startswith("-"))
    if s in ("-0", "-0.0"):
        return _zero(fmt, True)
    match = _VALUE_RE.match(text)
    if match is None:
        return round_real(exact(text), fmt, mode)
    beta = int(match["base"])
    if int(match["base2"]) != beta:
        raise ValueError(f"inconsistent radix in {text!r}")
    mag = parse_radix(match["mant"], beta) * Fraction(beta) ** int(match["exp"])
    q = -mag if match["sign"] == "-" else mag
    return round_real(q, fmt, mode, negative_zero=match["sign"] == "-")


def parse_radix(text: str, beta: int) -> Fraction:
    """Exact value of a radix-``beta`` numeral such as ``"-1011.01"``."""
    s = text.strip().lower()
    negative = s.startswith("-")
    s = s.lstrip("+-")
    if s.count(".") > 1 or not s or s == ".":
        raise ValueError(f"malformed radix-{beta} numeral {text!r}")
    whole, _, frac = s.partition(".")
    digits = whole + frac
    m = 0
    for ch in digits:
        d = _DIGIT_CHARS.find(ch)
        if d < 0 or d >= beta:
            raise ValueError(f"digit {ch!r} is not valid in radix {beta}")
        m = m * beta + d
    q = Fraction(m, beta ** len(frac))
    return -q if negative else q


def to_radix_string(q, beta: int, frac_digits: int) -> str:
    """Radix-``beta`` expansion of ``q`` truncated after ``frac_digits`` places."""
    q = exact(q)
    negative = q < 0
    scaled = abs(q) * beta**frac_digits
    m = scaled.numerator // scaled.denominator
    whole, frac = divmod(m, beta**frac_digits)
    whole_chars = []
    while True:
        whole, d = divmod(whole, beta)
        whole_chars.append(_digit_char(d, beta))
        if whole == 0:
            break
    frac_chars = [_digit_char(d, beta) for d in _to_digits(frac, beta, frac_digits)] if frac_digits else []
    out = "".join(reversed(whole_chars))
    if frac_digits:
        out += "." + "".join(frac_chars)
    return ("-" if negative else "") + out
