from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fplab.arith import FlopTally
from fplab.conditioning import hilbert, hilbert_rhs
from fplab.errbounds import error_measure, matvec_bound, posterior_bound
from fplab.errors import ShapeMismatch, SingularMatrix, UnsupportedNorm, ZeroPivot
from fplab.fpsys import TOY, make_format
from fplab.linalg import (
    Simulated,
    as_float_array,
    complexity_report,
    gauss_flops,
    gauss_solve,
    gauss_space_units,
    identity,
    inner,
    matmul,
    matvec,
    norm,
    rational_inverse,
    read_matrix,
    read_vector,
    residual,
    transpose,
    write_matrix,
    write_vector,
)


def test_norm_examples():
    assert norm([3, 4], 2) == 5
    assert norm([3, -4], 1) == 7
    assert norm([3, -4], "inf") == 4
    assert norm(hilbert(2), "inf") == Fraction(3, 2)
    assert norm(hilbert(2), "1") == Fraction(3, 2)
    assert norm([[1, 2], [3, 4]], "fro") == pytest.approx(30**0.5)
    with pytest.raises(UnsupportedNorm):
        norm([[1, 2], [3, 4]], 2)


@given(st.lists(st.lists(st.integers(-50, 50), min_size=3, max_size=3), min_size=1, max_size=5))
def test_norm_duality(A):
    assert norm(A, "1") == norm(transpose(A), "inf")
    assert norm(A, "fro") == pytest.approx(np.linalg.norm(np.array(A, dtype=float), "fro"))


def test_rational_inverse():
    assert rational_inverse(identity(3)) == identity(3)
    inv = rational_inverse(hilbert(3))
    assert inv[0] == [9, -36, 30]
    assert matmul(hilbert(3), inv, backend="rational") == identity(3)
    with pytest.raises(SingularMatrix):
        rational_inverse([[1, 1], [1, 1]])


def test_gauss_identity_and_exact_backend():
    assert gauss_solve(identity(3), [1.5, -2.0, 7.0]) == [1.5, -2.0, 7.0]
    H = hilbert(11)
    x = gauss_solve(H, hilbert_rhs(11), backend="rational")
    assert x == [1] * 11
    assert residual(H, hilbert_rhs(11), x) == [0] * 11


def test_gauss_hilbert_binary64():
    H = hilbert(11)
    b = hilbert_rhs(11)
    xh = gauss_solve(H, b)
    rel = float(error_measure([1] * 11, xh, "inf").relative)
    assert 1e-5 <= rel <= 1
    assert posterior_bound(H, b, xh) >= error_measure([1] * 11, xh, "inf").relative


@given(st.integers(2, 6), st.randoms(use_true_random=False))
def test_gauss_rational_is_exact(n, rnd):
    A = [[Fraction(rnd.randint(-9, 9), rnd.randint(1, 4)) for _ in range(n)] for _ in range(n)]
    b = [Fraction(rnd.randint(-9, 9)) for _ in range(n)]
    try:
        x = gauss_solve(A, b, backend="rational")
    except SingularMatrix:
        with pytest.raises(SingularMatrix):
            rational_inverse(A)
        return
    assert residual(A, b, x) == [0] * n


@given(st.integers(2, 6), st.randoms(use_true_random=False))
def test_gauss_binary64_matches_numpy_and_bound(n, rnd):
    A = [[rnd.randint(-100, 100) / 8 for _ in range(n)] for _ in range(n)]
    b = [rnd.randint(-100, 100) / 8 for _ in range(n)]
    try:
        xq = gauss_solve(A, b, backend="rational")
    except SingularMatrix:
        return
    try:
        x = gauss_solve(A, b)
    except SingularMatrix:
        return
    ref = np.linalg.solve(np.array(A), np.array(b))
    assert np.allclose(x, ref, rtol=1e-6, atol=1e-6 * max(1, np.abs(ref).max()))
    if any(xq):
        assert posterior_bound(A, b, x) >= error_measure(xq, x, "inf").relative


def test_pivoting_behaviour():
    A = [[0, 1], [1, 1]]
    with pytest.raises(ZeroPivot):
        gauss_solve(A, [1, 2], pivoting="none")
    assert gauss_solve(A, [1, 2], pivoting="partial") == [1.0, 1.0]
    with pytest.raises(SingularMatrix):
        gauss_solve([[1, 2], [2, 4]], [1, 2], backend="rational")


def test_pivoting_helps_in_simulated_system():
    fmt = make_format(10, 3, -9, 9)
    A = [[Fraction(1, 10**4), 1], [1, 1]]
    b = [1, 2]
    exact_x = gauss_solve(A, b, backend="rational")
    good = gauss_solve(A, b, backend=Simulated(fmt), pivoting="partial")
    bad = gauss_solve(A, b, backend=Simulated(fmt), pivoting="none")
    err_good = error_measure(exact_x, good, "inf").relative
    err_bad = error_measure(exact_x, bad, "inf").relative
    assert err_good < Fraction(1, 100) < err_bad


def test_simulated_toy_solve_counts():
    t = FlopTally()
    x = gauss_solve([[2, 1], [1, 1]], [3, 2], backend=TOY, tally=t)
    assert [v.to_fraction() for v in x] == [1, 1]
    assert t.flops == gauss_flops(2)


@pytest.mark.parametrize("n", [1, 2, 5, 10, 30])
def test_gauss_flop_and_space_counts(n):
    rng = np.random.default_rng(n)
    A = (rng.standard_normal((n, n)) + n * np.eye(n)).tolist()
    b = rng.standard_normal(n).tolist()
    for piv, space in (("none", n * n + 2 * n), ("partial", n * n + 4 * n + 1)):
        t = FlopTally()
        gauss_solve(A, b, pivoting=piv, tally=t)
        assert t.flops == gauss_flops(n)
        assert t.space_units == space == gauss_space_units(n, piv)
    assert Fraction(2, 3) * n**3 <= gauss_flops(n) <= Fraction(2, 3) * n**3 + 3 * n * n


@pytest.mark.parametrize("n", [1, 2, 3, 8, 17])
def test_product_tallies(n):
    x = list(range(1, n + 1))
    A = [[i + j for j in range(n)] for i in range(n)]
    t = FlopTally()
    inner(x, x, tally=t)
    assert t.flops == 2 * n - 1
    t = FlopTally()
    matvec(A, x, tally=t)
    assert t.flops == 2 * n * n - n
    t = FlopTally()
    matmul(A, A, tally=t)
    assert t.flops == 2 * n**3 - n * n


def test_product_examples():
    t = FlopTally()
    matvec([[1, 2], [3, 4]], [1, 1], tally=t)
    assert t.flops == 6
    t = FlopTally()
    assert matmul([[1, 2], [3, 4]], [[1, 0], [0, 1]], tally=t) == [[1, 2], [3, 4]]
    assert t.flops == 12
    with pytest.raises(ShapeMismatch):
        matvec([[1, 2]], [1, 2, 3])
    with pytest.raises(ShapeMismatch):
        matmul([[1, 2]], [[1, 2]])


@given(st.integers(1, 6), st.randoms(use_true_random=False))
def test_binary64_matvec_within_bound_of_rational(n, rnd):
    A = [[rnd.randint(-1000, 1000) / 7 for _ in range(n)] for _ in range(n)]
    x = [rnd.randint(-1000, 1000) / 3 for _ in range(n)]
    y = matvec(A, x)
    yq = matvec(A, x, backend="rational")
    for a, b, bound in zip(y, yq, matvec_bound(A, x).value):
        assert abs(Fraction(a) - b) <= bound


def test_complexity_report():
    assert complexity_report("inner", 10) == 19
    assert complexity_report("gauss_space", 4) == 24
    assert complexity_report("gauss_space_pivoting", 4) == 33
    assert complexity_report("gauss_time", 3) == 18
    assert complexity_report("matvec", 2) == 6
    assert complexity_report("matmul", 2) == 12
    with pytest.raises(ValueError):
        complexity_report("inner", 0)


def test_text_exchange_round_trip():
    A = [[Fraction(1, 3), Fraction(-2)], [Fraction(5, 2), Fraction(0)]]
    text = write_matrix(A)
    assert text.splitlines()[0] == "2 2"
    assert read_matrix(text) == A
    assert read_vector(write_vector([Fraction(1, 7), 2])) == [Fraction(1, 7), 2]
    assert read_vector("1 3\n0.1 2 3/4") == [Fraction(1, 10), 2, Fraction(3, 4)]
    with pytest.raises(ShapeMismatch):
        read_matrix("2 2\n1 2 3")
    assert as_float_array(A).shape == (2, 2)


@given(st.lists(st.lists(st.fractions(max_denominator=1000), min_size=2, max_size=2), min_size=1, max_size=4))
def test_text_exchange_property(A):
    assert read_matrix(write_matrix(A)) == A


@given(st.lists(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=3, max_size=3), min_size=1, max_size=3))
def test_float_text_exchange_round_trips_binary64(A):
    # floats are written in shortest repr, so they come back as the same double
    assert [[float(v) for v in row] for row in read_matrix(write_matrix(A))] == A
