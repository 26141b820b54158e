"""Dense linear algebra over exact, binary64 and simulated arithmetic.

Matrices are row-major lists of lists; vectors are flat lists.  Every
scalar operation in the solvers goes through a backend so the flop tally
and the rounding behaviour are uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import FlopTally, fl_op
from .errors import ShapeMismatch, SingularMatrix, UnsupportedNorm, ZeroPivot
from .fpsys import NEAREST_EVEN, FpFormat, FpValue, RoundingMode, exact, fp


class _Backend:
    name = "abstract"

    def __init__(self, tally: FlopTally | None):
        self.tally = tally

    def _count(self, op):
        if self.tally is not None:
            self.tally.counts[op] += 1

    def add(self, a, b):
        self._count("add")
        return a + b

    def sub(self, a, b):
        self._count("sub")
        return a - b

    def mul(self, a, b):
        self._count("mul")
        return a * b

    def div(self, a, b):
        self._count("div")
        return a / b

    def magnitude(self, a) -> Fraction | float:
        return abs(a)

    def is_zero(self, a) -> bool:
        return a == 0


class RationalBackend(_Backend):
    name = "rational"

    def convert(self, x):
        return exact(x)


class Binary64Backend(_Backend):
    name = "binary64"

    def convert(self, x):
        return float(x)


class SimulatedBackend(_Backend):
    name = "simulated"

    def __init__(self, tally, fmt: FpFormat, mode=NEAREST_EVEN):
        super().__init__(tally)
        self.fmt = fmt
        self.mode = RoundingMode.parse(mode)

    def convert(self, x):
        return x if isinstance(x, FpValue) else fp(x, self.fmt, self.mode)

    def add(self, a, b):
        return fl_op("add", a, b, self.fmt, self.mode, self.tally)

    def sub(self, a, b):
        return fl_op("sub", a, b, self.fmt, self.mode, self.tally)

    def mul(self, a, b):
        return fl_op("mul", a, b, self.fmt, self.mode, self.tally)

    def div(self, a, b):
        return fl_op("div", a, b, self.fmt, self.mode, self.tally)

    def magnitude(self, a):
        if not a.is_finite():
            return math.inf
        return abs(a.to_fraction())

    def is_zero(self, a):
        return a.is_zero()


@dataclass(frozen=True)
class Simulated:
    """Backend selector for a simulated system."""

    fmt: FpFormat
    mode: RoundingMode = NEAREST_EVEN


def make_backend(backend="binary64", tally: FlopTally | None = None) -> _Backend:
    if isinstance(backend, _Backend):
        return backend
    if isinstance(backend, Simulated):
        return SimulatedBackend(tally, backend.fmt, backend.mode)
    if isinstance(backend, FpFormat):
        return SimulatedBackend(tally, backend)
    if backend == "rational":
        return RationalBackend(tally)
    if backend == "binary64":
        return Binary64Backend(tally)
    raise ValueError(f"unknown backend {backend!r}")


# -- shapes and conversion --------------------------------------------------


def shape(A) -> tuple:
    rows = len(A)
    cols = len(A[0]) if rows else 0
    for row in A:
        if len(row) != cols:
            raise ShapeMismatch("ragged matrix")
    return rows, cols


def _is_matrix(x) -> bool:
    if isinstance(x, np.ndarray):
        return x.ndim == 2
    return len(x) > 0 and isinstance(x[0], (list, tuple, np.ndarray))


def to_rational(A):
    """Exact copy of a vector or matrix."""
    if _is_matrix(A):
        return [[exact(v) for v in row] for row in A]
    return [exact(v) for v in A]


def identity(n: int):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def transpose(A):
    return [list(col) for col in zip(*A)]


# -- norms --------------------------------------------------------------------


def _abs(v):
    if isinstance(v, FpValue):
        return abs(v.to_fraction())
    if isinstance(v, (int, Fraction)):
        return abs(v)
    return abs(exact(v))


def _norm_key(p):
    if p in (1, "1"):
        return "1"
    if p in (2, "2"):
        return "2"
    if p in ("inf", math.inf, "Inf", "infinity"):
        return "inf"
    if p in ("fro", "F", "frobenius"):
        return "fro"
    raise UnsupportedNorm(f"unknown norm {p!r}")


def norm_squared(x, p="fro") -> Fraction:
    """Exact squared 2-norm of a vector or Frobenius norm of a matrix."""
    if _is_matrix(x):
        return sum((_abs(v) ** 2 for row in x for v in row), Fraction(0))
    return sum((_abs(v) ** 2 for v in x), Fraction(0))


def norm(x, p="inf"):
    """Vector 1/2/inf norms and matrix 1/inf/fro norms.

    1 and inf are exact; 2 and fro are square roots of an exact square and
    come back as floats.  The matrix 2-norm lives in the conditioning module.
    """
    key = _norm_key(p)
    if _is_matrix(x):
        if key == "2":
            raise UnsupportedNorm("matrix 2-norm needs the iterative path (conditioning.spectral_norm)")
        if key == "fro":
            return math.sqrt(norm_squared(x))
        rows = x if key == "inf" else transpose(x)
        return max((sum((_abs(v) for v in row), Fraction(0)) for row in rows), default=Fraction(0))
    if key == "fro":
        key = "2"
    if key == "1":
        return sum((_abs(v) for v in x), Fraction(0))
    if key == "inf":
        return max((_abs(v) for v in x), default=Fraction(0))
    sq = norm_squared(x)
    r = math.isqrt(sq.numerator) if sq.denominator == 1 else None
    if r is not None and r * r == sq.numerator:
        return Fraction(r)
    return math.sqrt(sq)


# -- products -----------------------------------------------------------------


def inner(x, y, backend="binary64", tally: FlopTally | None = None):
    if len(x) != len(y):
        raise ShapeMismatch(f"vector lengths differ: {len(x)} vs {len(y)}")
    be = make_backend(backend, tally)
    x = [be.convert(v) for v in x]
    y = [be.convert(v) for v in y]
    return _dot(be, x, y)


def _dot(be, x, y):
    if not x:
        return be.convert(0)
    s = be.mul(x[0], y[0])
    for a, b in zip(x[1:], y[1:]):
        s = be.add(s, be.mul(a, b))
    return s


def matvec(A, x, backend="binary64", tally: FlopTally | None = None):
    m, n = shape(A)
    if len(x) != n:
        raise ShapeMismatch(f"matrix has {n} columns, vector has {len(x)} entries")
    be = make_backend(backend, tally)
    xs = [be.convert(v) for v in x]
    return [_dot(be, [be.convert(v) for v in row], xs) for row in A]


def matmul(A, B, backend="binary64", tally: FlopTally | None = None):
    m, n = shape(A)
    n2, q = shape(B)
    if n != n2:
        raise ShapeMismatch(f"inner dimensions differ: {n} vs {n2}")
    be = make_backend(backend, tally)
    Ac = [[be.convert(v) for v in row] for row in A]
    Bt = [[be.convert(v) for v in col] for col in zip(*B)]
    return [[_dot(be, row, col) for col in Bt] for row in Ac]


def residual(A, b, x):
    """b - A x in exact arithmetic."""
    Ax = matvec(to_rational(A), to_rational(x), "rational")
    return [exact(bi) - v for bi, v in zip(b, Ax)]


# -- elimination --------------------------------------------------------------


def gauss_space_units(n: int, pivoting: str = "partial") -> int:
    return n * n + 2 * n + (2 * n + 1 if pivoting == "partial" else 0)


def gauss_flops(n: int) -> int:
    """Exact flop count of :func:`gauss_solve` for an n by n system."""
    # elimination: sum over m = n-1..0 of m * (2m + 3); back substitution: n^2
    return sum(m * (2 * m + 3) for m in range(n)) + n * n


def gauss_solve(
    A,
    b,
    pivoting: str = "partial",
    backend="binary64",
    tally: FlopTally | None = None,
    tol=None,
):
    """Solve Ax = b by Gaussian elimination and back substitution.

    ``tol`` overrides the singularity threshold used with partial pivoting.
    By default binary64 declares singularity when the largest pivot candidate
    is below n * eps * ||A||_inf; the exact and simulated backends only reject
    an exactly zero column.
    """
    n, cols = shape(A)
    if n != cols:
        raise ShapeMismatch("matrix must be square")
    if len(b) != n:
        raise ShapeMismatch(f"right-hand side has {len(b)} entries, expected {n}")
    if pivoting not in ("partial", "none"):
        raise ValueError(f"unknown pivoting strategy {pivoting!r}")
    be = make_backend(backend, tally)
    if tally is not None:
        tally.declare_space(gauss_space_units(n, pivoting))
    M = [[be.convert(v) for v in row] for row in A]
    rhs = [be.convert(v) for v in b]

    if tol is None:
        if isinstance(be, Binary64Backend):
            tol = n * 2.0**-52 * float(norm(A, "inf"))
        else:
            tol = 0

    for k in range(n):
        if pivoting == "partial":
            p = max(range(k, n), key=lambda i: be.magnitude(M[i][k]))
            mag = be.magnitude(M[p][k])
            if mag == 0 or mag < tol:
                raise SingularMatrix(f"no usable pivot in column {k}")
            if p != k:
                M[k], M[p] = M[p], M[k]
                rhs[k], rhs[p] = rhs[p], rhs[k]
        elif be.is_zero(M[k][k]):
            raise ZeroPivot(f"zero pivot at step {k}")
        pivot = M[k][k]
        for i in range(k + 1, n):
            l = be.div(M[i][k], pivot)
            row_i, row_k = M[i], M[k]
            for j in range(k + 1, n):
                row_i[j] = be.sub(row_i[j], be.mul(l, row_k[j]))
            rhs[i] = be.sub(rhs[i], be.mul(l, rhs[k]))

    x = [None] * n
    for i in range(n - 1, -1, -1):
        s = rhs[i]
        for j in range(i + 1, n):
            s = be.sub(s, be.mul(M[i][j], x[j]))
        x[i] = be.div(s, M[i][i])
    return x


def rational_inverse(A):
    """Exact inverse by Gauss-Jordan elimination."""
    n, cols = shape(A)
    if n != cols:
        raise ShapeMismatch("matrix must be square")
    M = [[exact(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    for k in range(n):
        p = next((i for i in range(k, n) if M[i][k] != 0), None)
        if p is None:
            raise SingularMatrix("matrix is singular")
        M[k], M[p] = M[p], M[k]
        pivot = M[k][k]
        row_k = [v / pivot for v in M[k]]
        M[k] = row_k
        for i in range(n):
            if i != k and M[i][k] != 0:
                f = M[i][k]
                M[i] = [a - f * c for a, c in zip(M[i], row_k)]
    return [row[n:] for row in M]


def complexity_report(kind: str, n: int):
    """Closed-form operation and storage counts."""
    if n < 1:
        raise ValueError("n must be positive")
    formulas = {
        "inner": lambda: 2 * n - 1,
        "matvec": lambda: 2 * n * n - n,
        "matmul": lambda: 2 * n**3 - n * n,
        "gauss_time": lambda: Fraction(2, 3) * n**3,
        "gauss_space": lambda: gauss_space_units(n, "none"),
        "gauss_space_pivoting": lambda: gauss_space_units(n, "partial"),
    }
    if kind not in formulas:
        raise ValueError(f"unknown complexity kind {kind!r}")
    return formulas[kind]()


COMPLEXITY_KINDS = ("inner", "matvec", "matmul", "gauss_time", "gauss_space", "gauss_space_pivoting")


# -- text exchange --------------------------------------------------------------


def read_matrix(text: str):
    """Parse ``rows cols`` followed by entries (decimal or ``p/q``)."""
    tokens = text.split()
    if len(tokens) < 2:
        raise ValueError("matrix text needs a 'rows cols' header")
    rows, cols = int(tokens[0]), int(tokens[1])
    entries = tokens[2:]
    if len(entries) != rows * cols:
        raise ShapeMismatch(f"expected {rows * cols} entries, found {len(entries)}")
    values = [exact(t) for t in entries]
    return [values[i * cols:(i + 1) * cols] for i in range(rows)]


def read_vector(text: str):
    A = read_matrix(text)
    if len(A) == 1:
        return A[0]
    if A and len(A[0]) == 1:
        return [row[0] for row in A]
    raise ShapeMismatch("vector text must have one row or one column")


def _render(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, FpValue):
        return _render(v.to_fraction()) if v.is_finite() else str(float(v))
    return str(v)


def write_matrix(A) -> str:
    rows, cols = shape(A)
    lines = [f"{rows} {cols}"]
    lines += [" ".join(_render(v) for v in row) for row in A]
    return "\n".join(lines) + "\n"


def write_vector(x) -> str:
    return write_matrix([[v] for v in x])


def as_float_array(A) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in A] if _is_matrix(A) else [float(v) for v in A])
