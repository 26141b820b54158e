import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from fplab.arith import (
    FlopTally,
    block_sizes,
    det2x2_kahan,
    det2x2_naive,
    fl_add,
    fl_div,
    fl_fma,
    fl_mul,
    fl_op,
    fl_sqrt,
    fl_sub,
    inner_product,
    kahan_sum,
    kahan_sum_native,
    recursive_prod,
    recursive_sum,
    sub_no_guard,
)
from fplab.errbounds import gamma
from fplab.errors import LengthMismatch
from fplab.fpsys import (
    BINARY32,
    BINARY64,
    CHOP,
    DOWN,
    NEAREST_EVEN,
    TOY,
    UP,
    enumerate_values,
    fp,
    inf,
    make_format,
    nan,
    parse_value,
    round_real,
    zero,
)

EPS = Fraction(1, 2**52)
U64 = Fraction(1, 2**53)
finite64 = st.floats(allow_nan=False, allow_infinity=False)
HW = {"add": lambda a, b: a + b, "sub": lambda a, b: a - b, "mul": lambda a, b: a * b, "div": lambda a, b: a / b}


def val(v):
    return v.to_fraction()


def b64(x):
    return fp(x, BINARY64)


# -- basic examples ------------------------------------------------------------------


def test_toy_examples():
    assert val(fl_add(2, Fraction(3, 4), TOY)) == 3
    assert val(fl_fma(Fraction(5, 4), Fraction(5, 4), Fraction(-3, 2), TOY)) == Fraction(1, 16)
    assert val(fl_sub(fl_mul(Fraction(5, 4), Fraction(5, 4), TOY), Fraction(3, 2), TOY)) == 0
    assert val(fl_sqrt(Fraction(1, 4), TOY)) == Fraction(1, 2)
    assert fl_sqrt(4, TOY).is_inf()  # 4 is above x_max = 3.5
    assert val(fl_sqrt(2, TOY)) == Fraction(3, 2)
    assert val(fl_fma(1, 1, 0, TOY)) == 1


def test_associativity_fails_in_toy():
    x, y, z = Fraction(1, 2), Fraction(3, 2), Fraction(3, 4)
    left = fl_add(x, fl_add(y, z, TOY), TOY)
    right = fl_add(fl_add(x, y, TOY), z, TOY)
    assert (val(left), val(right)) == (Fraction(5, 2), 3)
    assert val(recursive_sum([x, y, z], TOY)) == 3


def test_binary64_eps_pair():
    two = b64(2)
    assert val(fl_sub(fl_add(two, EPS, BINARY64), two, BINARY64)) == 0
    d = fl_sub(EPS, two, BINARY64)
    assert val(d) == EPS - 2
    assert val(fl_add(two, d, BINARY64)) == EPS
    assert float(val(fl_add(two, d, BINARY64))) == 2.220446049250313e-16


def test_multiplication_not_associative_nor_distributive_in_toy():
    vals = enumerate_values(TOY)
    assoc = distrib = False
    for x, y, z in itertools.product(vals[::3], repeat=3):
        m1 = fl_mul(x, fl_mul(y, z, TOY), TOY)
        m2 = fl_mul(fl_mul(x, y, TOY), z, TOY)
        if m1.is_finite() and m2.is_finite() and val(m1) != val(m2):
            assoc = True
        d1 = fl_mul(x, fl_add(y, z, TOY), TOY)
        d2 = fl_add(fl_mul(x, y, TOY), fl_mul(x, z, TOY), TOY)
        if d1.is_finite() and d2.is_finite() and val(d1) != val(d2):
            distrib = True
    assert assoc and distrib


@pytest.mark.parametrize("op", ["add", "mul"])
def test_commutativity_exhaustive_toy(op):
    vals = enumerate_values(TOY, include_zero=True)
    for a, b in itertools.product(vals, repeat=2):
        assert fl_op(op, a, b, TOY) == fl_op(op, b, a, TOY)


def test_identity_multiplication():
    for v in enumerate_values(make_format(3, 3, -2, 2)):
        assert fl_mul(1, v, make_format(3, 3, -2, 2)) == v


# -- hardware oracles -----------------------------------------------------------------


@pytest.mark.parametrize("op", ["add", "sub", "mul", "div"])
@given(finite64, finite64)
def test_binary64_ops_match_hardware(op, a, b):
    assume(not (op == "div" and b == 0))
    expected = HW[op](a, b)
    got = fl_op(op, b64(a), b64(b), BINARY64)
    if math.isinf(expected):
        assert got.is_inf() and got.negative == (expected < 0)
    else:
        assert float(got) == expected
        if expected == 0:
            assert got.negative == (math.copysign(1, expected) < 0)


@pytest.mark.parametrize("op", ["add", "sub", "mul", "div"])
@given(st.floats(width=32, allow_nan=False, allow_infinity=False), st.floats(width=32, allow_nan=False, allow_infinity=False))
def test_binary32_ops_match_numpy(op, a, b):
    assume(not (op == "div" and b == 0))
    with np.errstate(all="ignore"):
        expected = float(HW[op](np.float32(a), np.float32(b)))
    got = fl_op(op, fp(a, BINARY32), fp(b, BINARY32), BINARY32)
    if math.isinf(expected):
        assert got.is_inf()
    else:
        assert float(got) == expected


@given(st.floats(min_value=0, allow_infinity=False))
def test_sqrt_matches_hardware(x):
    assert float(fl_sqrt(b64(x), BINARY64)) == math.sqrt(x)


@given(finite64, finite64, finite64)
def test_fma_single_rounding(a, b, c):
    q = Fraction(a) * Fraction(b) + Fraction(c)
    got = fl_fma(b64(a), b64(b), b64(c), BINARY64)
    assume(abs(q) <= BINARY64.x_max)
    assert val(got) == val(round_real(q, BINARY64)) or (q == 0 and got.is_zero())
    if q != 0:
        try:
            expected = q.numerator / q.denominator
        except OverflowError:
            return
        assert float(got) == expected


# -- standard model ---------------------------------------------------------------------


@pytest.mark.parametrize("mode", [NEAREST_EVEN, CHOP])
@pytest.mark.parametrize("op", ["add", "sub", "mul", "div"])
@given(finite64, finite64)
def test_standard_model_both_forms(mode, op, a, b):
    assume(b != 0 or op != "div")
    exact_res = {"add": Fraction(a) + Fraction(b), "sub": Fraction(a) - Fraction(b),
                 "mul": Fraction(a) * Fraction(b), "div": Fraction(a) / Fraction(b) if b else None}[op]
    assume(BINARY64.x_min <= abs(exact_res) <= BINARY64.x_max)
    r = fl_op(op, b64(a), b64(b), BINARY64, mode)
    assume(r.is_finite())
    u = BINARY64.unit_roundoff(mode)
    delta = val(r) / exact_res - 1
    assert abs(delta) <= u
    delta2 = exact_res / val(r) - 1
    assert abs(delta2) <= u


def test_sterbenz_exhaustive_small_binary():
    fmt = make_format(2, 5, -4, 4)
    vals = [v for v in enumerate_values(fmt, positive_only=True)]
    for x in vals:
        for y in vals:
            if val(y) / 2 <= val(x) <= 2 * val(y):
                assert val(fl_sub(x, y, fmt)) == val(x) - val(y)


def test_underflowing_sums_are_exact():
    fmt = make_format(2, 4, -3, 3)
    vals = enumerate_values(fmt)
    for x in vals:
        for y in vals:
            for op in ("add", "sub"):
                r = fl_op(op, x, y, fmt)
                exact_res = val(x) + val(y) if op == "add" else val(x) - val(y)
                if r.is_finite() and abs(val(r)) < fmt.x_min:
                    assert val(r) == exact_res


def test_equality_iff_zero_difference_with_subnormals():
    fmt = make_format(2, 4, -3, 3)
    vals = enumerate_values(fmt)
    for x in vals:
        for y in vals:
            assert (val(x) == val(y)) == fl_sub(x, y, fmt).is_zero()


def test_equality_criterion_breaks_without_subnormals():
    fmt = make_format(2, 4, -3, 3, subnormals=False)
    vals = enumerate_values(fmt)
    assert any(val(x) != val(y) and fl_sub(x, y, fmt).is_zero() for x in vals for y in vals)


@given(st.integers(0, 2**52 - 1))
def test_reciprocal_product_is_one_or_one_minus_half_eps(mant):
    x = Fraction(2**52 + mant, 2**52)
    r = fl_mul(x, fl_div(1, x, BINARY64), BINARY64)
    assert val(r) in (1, 1 - EPS / 2)


@pytest.mark.parametrize("beta", [2, 3, 10, 16])
def test_midpoint_formula_stays_inside(beta):
    fmt = make_format(beta, 3, -1, 1)
    vals = enumerate_values(fmt)
    rng = random.Random(beta)
    for _ in range(3000):
        x, y = sorted(rng.sample(vals, 2), key=val)
        d = fl_sub(y, x, fmt)
        m = fl_add(x, fl_div(d, 2, fmt), fmt)
        if d.is_finite():
            assert val(x) <= val(m) <= val(y)


def naive_midpoint_counterexample(fmt):
    # the lowest decade, largest first, with the rest of the range as headroom
    vals = [v for v in enumerate_values(fmt, positive_only=True) if v.exponent == fmt.L][::-1]
    for i, y in enumerate(vals):
        for x in vals[i:]:
            m = fl_div(fl_add(x, y, fmt), 2, fmt)
            if m.is_finite() and not val(x) <= val(m) <= val(y):
                return x, y, m
    return None


def test_naive_midpoint_fails_in_base_ten():
    found = naive_midpoint_counterexample(make_format(10, 3, 0, 1))
    assert found is not None
    x, y, m = found
    assert val(m) < val(x) or val(m) > val(y)


def test_naive_midpoint_holds_in_binary():
    assert naive_midpoint_counterexample(make_format(2, 4, -2, 2)) is None


# -- specials --------------------------------------------------------------------------


def test_special_value_rules():
    f = TOY
    P, N, Z, NZ, Q = inf(f), inf(f, True), zero(f), zero(f, True), nan(f)
    one = fp(1, f)
    assert fl_add(P, P, f) == P
    assert fl_sub(P, P, f).is_nan()
    assert fl_mul(Z, P, f).is_nan()
    assert fl_div(Z, Z, f).is_nan()
    assert fl_div(one, Z, f) == P
    assert fl_div(one, NZ, f) == N
    assert fl_div(-one, Z, f) == N
    assert fl_div(one, P, f).is_zero()
    assert fl_div(-one, P, f).negative
    assert fl_add(Q, one, f).is_nan()
    assert fl_mul(P, -one, f) == N
    assert fl_sqrt(-one, f).is_nan()
    assert fl_sqrt(NZ, f) == NZ
    assert fl_add(NZ, NZ, f) == NZ
    assert fl_add(Z, NZ, f) == Z
    assert fl_sub(one, one, f) == Z
    assert fl_sub(one, one, f, DOWN) == NZ


# -- guard digit -------------------------------------------------------------------------


def test_guard_digit_example():
    a = parse_value("+(1.00)_2 × 2^0", TOY)
    b = parse_value("+(1.11)_2 × 2^-1", TOY)
    fine = make_format(2, 3, -4, 1)
    assert val(fl_sub(val(a), val(b), fine)) == Fraction(1, 8)
    assert val(sub_no_guard(val(a), val(b), fine)) == Fraction(1, 4)
    nog = fine.replace(guard_digit=False)
    assert val(fl_sub(val(a), val(b), nog)) == Fraction(1, 4)
    assert sub_no_guard(a, a, TOY).is_zero() and not sub_no_guard(a, a, TOY).negative


def test_no_guard_exact_for_equal_exponents():
    fmt = make_format(2, 4, -3, 3)
    vals = enumerate_values(fmt, positive_only=True)
    for x in vals:
        for y in vals:
            if x.exponent == y.exponent and x.kind == y.kind:
                assert val(sub_no_guard(x, y, fmt)) == val(fl_sub(x, y, fmt))


# -- composite --------------------------------------------------------------------------


def test_recursive_sum_and_prod():
    assert recursive_sum([], TOY).is_zero()
    assert val(recursive_sum([Fraction(1, 2), Fraction(9, 4)], TOY)) == Fraction(5, 2)
    assert val(recursive_prod([Fraction(3, 2), Fraction(3, 2)], TOY)) == 2
    v = fp(Fraction(5, 4), TOY)
    assert recursive_prod([v], TOY) == v
    t = FlopTally()
    recursive_sum([1, 2, 3, 4], BINARY64, tally=t)
    assert t["add"] == 3


def test_ascending_order_sort():
    xs = [Fraction(1), Fraction(-1, 4), Fraction(1, 4), Fraction(1, 2)]
    t = FlopTally()
    s = recursive_sum(xs, TOY, order="ascending_magnitude", tally=t)
    assert val(s) == Fraction(3, 2)
    with pytest.raises(ValueError):
        recursive_sum(xs, TOY, order="random")


@given(st.lists(st.floats(min_value=0.5, max_value=2.0), min_size=1, max_size=30))
def test_product_error_within_gamma(xs):
    exact_p = math.prod(Fraction(x) for x in xs)
    got = recursive_prod([b64(x) for x in xs], BINARY64)
    assert abs(val(got) - exact_p) <= gamma(len(xs) - 1) * abs(exact_p)


@given(st.lists(finite64.filter(lambda v: abs(v) < 1e100), min_size=1, max_size=20))
def test_self_inner_product_high_relative_accuracy(xs):
    exact_d = sum(Fraction(x) ** 2 for x in xs)
    got = inner_product(xs, xs, BINARY64)
    assert val(got) >= 0
    assume(exact_d > 2**-900)
    assert abs(val(got) - exact_d) <= gamma(len(xs)) * exact_d


def test_inner_product_counts():
    t = FlopTally()
    assert val(inner_product([1, 0], [0, 1], BINARY64, tally=t)) == 0
    t.reset()
    inner_product([1, 2, 3], [4, 5, 6], BINARY64, tally=t)
    assert t.flops == 5 and t["mul"] == 3 and t["add"] == 2
    t.reset()
    inner_product([1, 2, 3], [4, 5, 6], BINARY64, use_fma=True, tally=t)
    assert t.flops == 3 and t["fma"] == 3
    with pytest.raises(LengthMismatch):
        inner_product([1], [1, 2], BINARY64)


def test_blocked_inner_product():
    xs = [Fraction(1, k) for k in range(1, 11)]
    exact_d = sum(x * x for x in xs)
    for k in (1, 2, 3, 10):
        got = inner_product(xs, xs, BINARY64, blocks=k)
        assert abs(val(got) - exact_d) <= gamma(12) * exact_d
    assert block_sizes(10, 3) == [3, 3, 4]
    assert block_sizes(2, 5) == [1, 1]


def test_tally_space_keeps_max():
    t = FlopTally()
    t.declare_space(10)
    t.declare_space(4)
    assert t.space_units == 10


# -- compensated summation ------------------------------------------------------------


def test_kahan_small_cases():
    assert kahan_sum([], BINARY64).is_zero()
    xs = [Fraction(1), U64, Fraction(-1)]
    assert val(kahan_sum(xs, BINARY64)) == U64
    assert val(recursive_sum(xs, BINARY64)) == 0
    # with a full epsilon both methods are exact
    ys = [Fraction(1), EPS, Fraction(-1)]
    assert val(kahan_sum(ys, BINARY64)) == EPS
    assert val(recursive_sum(ys, BINARY64)) == EPS


@pytest.mark.slow
def test_kahan_many_tenths():
    n = 10**5
    tenth = b64(0.1)
    exact_s = n * val(tenth)
    k = kahan_sum([tenth] * n, BINARY64)
    r = recursive_sum([tenth] * n, BINARY64)
    assert abs(val(k) - exact_s) <= 4 * U64 * 10**4
    assert abs(val(r) - exact_s) > 100 * abs(val(k) - exact_s)


@given(st.lists(finite64.filter(lambda v: abs(v) < 1e300), max_size=25))
def test_native_kahan_matches_simulated(xs):
    s, _ = kahan_sum_native(np.array(xs, dtype=float))
    assert float(s) == float(kahan_sum(xs, BINARY64))


def test_native_kahan_chunked_state():
    rng = np.random.default_rng(3)
    data = rng.standard_normal((4, 300))
    whole, _ = kahan_sum_native(data)
    state = None
    for chunk in np.array_split(data, 7, axis=1):
        state = kahan_sum_native(chunk, state)
    assert np.array_equal(whole, state[0])


# -- determinant ---------------------------------------------------------------------------


def test_det_examples():
    assert val(det2x2_kahan(1, 2, 3, 4, BINARY64)) == -2
    assert val(det2x2_kahan(1, 0, 0, 1, BINARY64)) == 1


def test_det_kahan_accurate_where_naive_fails():
    rng = random.Random(7)
    worst_naive = Fraction(0)
    for _ in range(300):
        a, d = rng.uniform(1, 2), rng.uniform(1, 2)
        b = rng.uniform(1, 2)
        c = float(Fraction(a) * Fraction(d) / Fraction(b))
        exact_det = Fraction(a) * Fraction(d) - Fraction(b) * Fraction(c)
        if exact_det == 0:
            continue
        k = det2x2_kahan(a, b, c, d, BINARY64)
        assert abs(val(k) - exact_det) <= 2 * U64 * abs(exact_det)
        n = det2x2_naive(a, b, c, d, BINARY64)
        worst_naive = max(worst_naive, abs(val(n) - exact_det) / abs(exact_det))
    assert worst_naive > 1000 * U64


def test_modes_parse_from_strings():
    assert fl_add(1, Fraction(1, 3), TOY, "up") == fl_add(1, Fraction(1, 3), TOY, UP)
    assert val(fl_add(1, Fraction(1, 3), TOY, CHOP)) == Fraction(5, 4)
