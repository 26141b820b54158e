"""Correctly rounded arithmetic on simulated systems.

Each operation computes the exact rational result and rounds it once.
Operands that are not already :class:`FpValue` instances are rounded into
the target format first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import LengthMismatch
from .fpsys import (
    NEAREST_EVEN,
    DOWN,
    FpClass,
    FpFormat,
    FpValue,
    RoundingMode,
    fp,
    inf,
    nan,
    round_real,
    round_sqrt,
    zero,
)

OPS = ("add", "sub", "mul", "div", "sqrt", "fma")


@dataclass
class FlopTally:
    """Operation counter shared by one computation."""

    counts: dict = field(default_factory=lambda: dict.fromkeys(OPS, 0))
    space_units: int = 0

    def record(self, op: str, k: int = 1) -> None:
        if op not in self.counts:
            raise KeyError(f"unknown operation {op!r}")
        self.counts[op] += k

    def declare_space(self, units: int) -> None:
        self.space_units = max(self.space_units, units)

    @property
    def flops(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, op: str) -> int:
        return self.counts[op]

    def reset(self) -> None:
        for op in self.counts:
            self.counts[op] = 0
        self.space_units = 0


def _tick(tally, op):
    if tally is not None:
        tally.counts[op] += 1


def _coerce(x, fmt):
    return x if isinstance(x, FpValue) else fp(x, fmt)


def _zero_sum_sign(a_neg: bool, b_neg: bool, mode: RoundingMode) -> bool:
    if a_neg and b_neg:
        return True
    return mode is DOWN


def _add_special(a: FpValue, b: FpValue, fmt: FpFormat):
    if a.is_nan() or b.is_nan():
        return nan(fmt)
    if a.is_inf() and b.is_inf():
        return a if a.negative == b.negative else nan(fmt)
    if a.is_inf():
        return a
    if b.is_inf():
        return b
    return None


def _exact_add(a: FpValue, b: FpValue, fmt: FpFormat, mode: RoundingMode) -> FpValue:
    special = _add_special(a, b, fmt)
    if special is not None:
        return special
    q = a.to_fraction() + b.to_fraction()
    if q == 0:
        # exact zero sums: -0 only for (-0) + (-0), or under round-down
        if a.is_zero() and b.is_zero():
            return zero(fmt, _zero_sum_sign(a.negative, b.negative, mode))
        return zero(fmt, mode is DOWN)
    return round_real(q, fmt, mode)


def _grid_exponent(v: FpValue, fmt: FpFormat) -> int:
    return v.exponent if v.kind is FpClass.NORMAL else fmt.L


def sub_no_guard(a, b, fmt: FpFormat, mode=NEAREST_EVEN) -> FpValue:
    """``a - b`` on hardware without a guard digit.

    The operand with the smaller exponent is shifted right and loses every
    digit that falls off the p-digit register before the subtraction.
    """
    mode = RoundingMode.parse(mode)
    a, b = _coerce(a, fmt), _coerce(b, fmt)
    return _add_no_guard(a, -b, fmt, mode)


def _add_no_guard(a: FpValue, b: FpValue, fmt: FpFormat, mode: RoundingMode) -> FpValue:
    special = _add_special(a, b, fmt)
    if special is not None:
        return special
    if a.is_zero() or b.is_zero():
        return _exact_add(a, b, fmt, mode)
    ea, eb = _grid_exponent(a, fmt), _grid_exponent(b, fmt)
    if ea < eb or (ea == eb and abs(b.to_fraction()) > abs(a.to_fraction())):
        a, b = b, a
        ea, eb = eb, ea
    grid = Fraction(fmt.beta) ** (ea - fmt.p + 1)
    qb = b.to_fraction()
    steps = abs(qb) / grid
    truncated = (steps.numerator // steps.denominator) * grid
    qb = -truncated if qb < 0 else truncated
    q = a.to_fraction() + qb
    if q == 0:
        return zero(fmt, mode is DOWN)
    return round_real(q, fmt, mode)


def _mul(a: FpValue, b: FpValue, fmt: FpFormat, mode: RoundingMode) -> FpValue:
    neg = a.negative != b.negative
    if a.is_nan() or b.is_nan():
        return nan(fmt)
    if a.is_inf() or b.is_inf():
        if a.is_zero() or b.is_zero():
            return nan(fmt)
        return inf(fmt, neg)
    q = a.to_fraction() * b.to_fraction()
    if q == 0:
        return zero(fmt, neg)
    return round_real(q, fmt, mode)


def _div(a: FpValue, b: FpValue, fmt: FpFormat, mode: RoundingMode) -> FpValue:
    neg = a.negative != b.negative
    if a.is_nan() or b.is_nan():
        return nan(fmt)
    if a.is_inf():
        return nan(fmt) if b.is_inf() else inf(fmt, neg)
    if b.is_inf():
        return zero(fmt, neg)
    if b.is_zero():
        return nan(fmt) if a.is_zero() else inf(fmt, neg)
    q = a.to_fraction() / b.to_fraction()
    if q == 0:
        return zero(fmt, neg)
    return round_real(q, fmt, mode)


def fl_op(op: str, a, b, fmt: FpFormat, mode=NEAREST_EVEN, tally: FlopTally | None = None) -> FpValue:
    """One rounded operation ``a op b`` with op in add, sub, mul, div."""
    mode = RoundingMode.parse(mode)
    a, b = _coerce(a, fmt), _coerce(b, fmt)
    if op == "add" or op == "sub":
        _tick(tally, op)
        if op == "sub":
            b = -b
        if not fmt.guard_digit:
            return _add_no_guard(a, b, fmt, mode)
        return _exact_add(a, b, fmt, mode)
    if op == "mul":
        _tick(tally, op)
        return _mul(a, b, fmt, mode)
    if op == "div":
        _tick(tally, op)
        return _div(a, b, fmt, mode)
    raise ValueError(f"unknown operation {op!r}")


def fl_add(a, b, fmt, mode=NEAREST_EVEN, tally=None):
    return fl_op("add", a, b, fmt, mode, tally)


def fl_sub(a, b, fmt, mode=NEAREST_EVEN, tally=None):
    return fl_op("sub", a, b, fmt, mode, tally)


def fl_mul(a, b, fmt, mode=NEAREST_EVEN, tally=None):
    return fl_op("mul", a, b, fmt, mode, tally)


def fl_div(a, b, fmt, mode=NEAREST_EVEN, tally=None):
    return fl_op("div", a, b, fmt, mode, tally)


def fl_sqrt(a, fmt: FpFormat, mode=NEAREST_EVEN, tally: FlopTally | None = None) -> FpValue:
    mode = RoundingMode.parse(mode)
    a = _coerce(a, fmt)
    _tick(tally, "sqrt")
    if a.is_nan():
        return a
    if a.is_zero():
        return a  # sqrt(-0) = -0
    if a.negative:
        return nan(fmt)
    if a.is_inf():
        return a
    return round_sqrt(a.to_fraction(), fmt, mode)


def fl_fma(a, b, c, fmt: FpFormat, mode=NEAREST_EVEN, tally: FlopTally | None = None) -> FpValue:
    """``a*b + c`` with a single rounding."""
    mode = RoundingMode.parse(mode)
    a, b, c = _coerce(a, fmt), _coerce(b, fmt), _coerce(c, fmt)
    _tick(tally, "fma")
    if a.is_nan() or b.is_nan() or c.is_nan():
        return nan(fmt)
    prod_neg = a.negative != b.negative
    if a.is_inf() or b.is_inf():
        if a.is_zero() or b.is_zero():
            return nan(fmt)
        return _add_special(inf(fmt, prod_neg), c, fmt)
    if c.is_inf():
        return c
    q = a.to_fraction() * b.to_fraction() + c.to_fraction()
    if q == 0:
        if c.is_zero() and (a.is_zero() or b.is_zero()):
            return zero(fmt, _zero_sum_sign(prod_neg, c.negative, mode))
        return zero(fmt, mode is DOWN)
    return round_real(q, fmt, mode)


def negate(a: FpValue) -> FpValue:
    return -a


def _magnitude_key(item):
    index, v = item
    if v.is_nan():
        return (2, Fraction(0), 0, index)
    if v.is_inf():
        return (1, Fraction(0), 0 if v.negative else 1, index)
    return (0, abs(v.to_fraction()), 0 if v.negative else 1, index)


def recursive_sum(
    xs: Sequence,
    fmt: FpFormat,
    mode=NEAREST_EVEN,
    order: str = "given",
    tally: FlopTally | None = None,
) -> FpValue:
    """Left-to-right sum with n-1 rounded additions.

    ``order="ascending_magnitude"`` sorts by |x| first (ties: negatives
    first, then original position).
    """
    values = [_coerce(x, fmt) for x in xs]
    if order == "ascending_magnitude":
        values = [v for _, v in sorted(enumerate(values), key=_magnitude_key)]
    elif order != "given":
        raise ValueError(f"unknown summation order {order!r}")
    if not values:
        return zero(fmt)
    s = values[0]
    for v in values[1:]:
        s = fl_op("add", s, v, fmt, mode, tally)
    return s


def recursive_prod(xs: Sequence, fmt: FpFormat, mode=NEAREST_EVEN, tally: FlopTally | None = None) -> FpValue:
    values = [_coerce(x, fmt) for x in xs]
    if not values:
        return fp(1, fmt)
    s = values[0]
    for v in values[1:]:
        s = fl_op("mul", s, v, fmt, mode, tally)
    return s


def _chain_dot(x, y, fmt, mode, use_fma, tally):
    if use_fma:
        s = zero(fmt)
        for a, b in zip(x, y):
            s = fl_fma(a, b, s, fmt, mode, tally)
        return s
    s = fl_op("mul", x[0], y[0], fmt, mode, tally)
    for a, b in zip(x[1:], y[1:]):
        s = fl_op("add", s, fl_op("mul", a, b, fmt, mode, tally), fmt, mode, tally)
    return s


def block_sizes(n: int, blocks: int) -> list:
    """Split n terms into ``blocks`` consecutive blocks; the last takes the remainder."""
    if blocks < 1:
        raise ValueError("need at least one block")
    blocks = min(blocks, max(n, 1))
    size = n // blocks
    sizes = [size] * blocks
    sizes[-1] += n - size * blocks
    return sizes


def inner_product(
    x: Sequence,
    y: Sequence,
    fmt: FpFormat,
    mode=NEAREST_EVEN,
    use_fma: bool = False,
    tally: FlopTally | None = None,
    blocks: int = 1,
) -> FpValue:
    """Inner product accumulated left to right.

    Without FMA this costs n multiplications and n-1 additions; with FMA it
    costs n fused operations.  With ``blocks = k`` the terms are split into k
    consecutive blocks whose partial products are then summed in order.
    """
    if len(x) != len(y):
        raise LengthMismatch(f"vector lengths differ: {len(x)} vs {len(y)}")
    x = [_coerce(v, fmt) for v in x]
    y = [_coerce(v, fmt) for v in y]
    if not x:
        return zero(fmt)
    if blocks == 1:
        return _chain_dot(x, y, fmt, mode, use_fma, tally)
    partials = []
    start = 0
    for size in block_sizes(len(x), blocks):
        partials.append(_chain_dot(x[start:start + size], y[start:start + size], fmt, mode, use_fma, tally))
        start += size
    return recursive_sum(partials, fmt, mode, tally=tally)


def kahan_sum(xs: Sequence, fmt: FpFormat, mode=NEAREST_EVEN, tally: FlopTally | None = None) -> FpValue:
    """Compensated summation (running sum plus carried correction)."""
    s = zero(fmt)
    c = zero(fmt)
    for x in xs:
        y = fl_op("sub", x, c, fmt, mode, tally)
        t = fl_op("add", s, y, fmt, mode, tally)
        c = fl_op("sub", fl_op("sub", t, s, fmt, mode, tally), y, fmt, mode, tally)
        s = t
    return s


def kahan_sum_native(values, state=None):
    """The same compensated loop in hardware binary64, vectorised over rows.

    ``values`` has shape (..., n) and is summed along the last axis.  Pass the
    returned ``(s, c)`` back as ``state`` to continue a sum over more columns.
    """
    arr = np.asarray(values, dtype=np.float64)
    cols = np.moveaxis(arr, -1, 0)
    if state is None:
        s = np.zeros(cols.shape[1:])
        c = np.zeros(cols.shape[1:])
    else:
        s, c = (np.array(v, dtype=np.float64) for v in state)
    cols = np.ascontiguousarray(cols)
    y = np.empty_like(s)
    t = np.empty_like(s)
    for col in cols:
        np.subtract(col, c, out=y)
        np.add(s, y, out=t)
        np.subtract(t, s, out=c)
        np.subtract(c, y, out=c)
        s, t = t, s
    return s, c


def det2x2_kahan(a, b, c, d, fmt: FpFormat, mode=NEAREST_EVEN, tally: FlopTally | None = None) -> FpValue:
    """ad - bc via w = bc, e = w - bc, x = (ad - w) + e using two FMAs."""
    w = fl_op("mul", b, c, fmt, mode, tally)
    b = _coerce(b, fmt)
    e = fl_fma(-b, c, w, fmt, mode, tally)
    x = fl_fma(a, d, -w, fmt, mode, tally)
    return fl_op("add", x, e, fmt, mode, tally)


def det2x2_naive(a, b, c, d, fmt: FpFormat, mode=NEAREST_EVEN, tally: FlopTally | None = None) -> FpValue:
    return fl_op("sub", fl_op("mul", a, d, fmt, mode, tally), fl_op("mul", b, c, fmt, mode, tally), fmt, mode, tally)
