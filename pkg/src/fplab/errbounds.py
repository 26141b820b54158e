"""A-priori rounding error bounds, error measures and the exponential Taylor demo."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import mpmath

from .arith import block_sizes
from .errors import DomainError, LengthMismatch, RelativeUndefined, ShapeMismatch
from .fpsys import BINARY64, FpFormat, exact
from .linalg import norm, residual, shape, to_rational


def _u(u) -> Fraction:
    if isinstance(u, FpFormat):
        return u.unit_roundoff()
    if u is None:
        return BINARY64.unit_roundoff()
    return exact(u)


def gamma(n: int, u=None) -> Fraction:
    """gamma_n = n u / (1 - n u), exactly."""
    u = _u(u)
    if n < 0 or u < 0:
        raise DomainError("gamma needs n >= 0 and u >= 0")
    nu = n * u
    if nu >= 1:
        raise DomainError(f"n*u = {float(nu)} must be below 1")
    return nu / (1 - nu)


@dataclass(frozen=True)
class ErrorBound:
    kind: str
    value: object
    n: int
    u: Fraction

    def __float__(self) -> float:
        return float(self.value)


class ErrorMeasure(NamedTuple):
    absolute: object
    relative: object


def _is_vector(x) -> bool:
    return not isinstance(x, str) and hasattr(x, "__len__")


def error_measure(x, xhat, norm_p="abs") -> ErrorMeasure:
    """Absolute and relative error of ``xhat`` as an approximation of ``x``."""
    if _is_vector(x):
        if len(x) != len(xhat):
            raise LengthMismatch("vectors differ in length")
        p = "inf" if norm_p == "abs" else norm_p
        diff = [exact(a) - exact(b) for a, b in zip(x, xhat)]
        absolute = norm(diff, p)
        scale = norm(to_rational(x), p)
    else:
        absolute = abs(exact(x) - exact(xhat))
        scale = abs(exact(x))
    if scale == 0:
        raise RelativeUndefined("relative error is undefined for x = 0")
    return ErrorMeasure(absolute, absolute / scale)


class TaylorResult(NamedTuple):
    p_n: Fraction
    remainder_bound: float


def taylor_exp(x, n: int) -> TaylorResult:
    """Degree-n Taylor polynomial of exp at 0 and the Lagrange remainder bound.

    The bound is max(1, e^x) |x|^(n+1) / (n+1)!.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    q = exact(x)
    term = Fraction(1)
    total = Fraction(1)
    for k in range(1, n + 1):
        term = term * q / k
        total += term
    with mpmath.workdps(30):
        xm = mpmath.mpf(q.numerator) / q.denominator
        bound = max(mpmath.mpf(1), mpmath.exp(xm)) * abs(xm) ** (n + 1) / mpmath.factorial(n + 1)
    return TaylorResult(total, float(bound))


def prod_bound(n: int, u=None) -> ErrorBound:
    """Forward relative bound gamma_{n-1} for a product of n numbers."""
    u = _u(u)
    return ErrorBound("forward_relative", gamma(max(n - 1, 0), u), n, u)


def sum_bound(xs, u=None, variant: str = "uniform") -> ErrorBound:
    """Absolute bound for left-to-right summation.

    ``uniform`` is gamma_{n-1} sum |x_k|; ``per_term`` charges x_1 and x_2
    with gamma_{n-1} and x_k with gamma_{n-k+1} for k >= 3, so it depends on
    the order of the inputs.
    """
    u = _u(u)
    mags = [abs(exact(v)) for v in xs]
    n = len(mags)
    if n <= 1:
        return ErrorBound("forward_absolute", Fraction(0), n, u)
    if variant == "uniform":
        value = gamma(n - 1, u) * sum(mags, Fraction(0))
    elif variant == "per_term":
        value = gamma(n - 1, u) * mags[0]
        for k in range(2, n + 1):
            value += gamma(n - k + 1, u) * mags[k - 1]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return ErrorBound("forward_absolute", value, n, u)


def inner_factor(n: int, blocks: int = 1) -> int:
    """Number of rounding factors charged to the blocked inner product."""
    if n == 0:
        return 0
    sizes = block_sizes(n, blocks)
    return max(sizes) + len(sizes) - 1


def optimal_blocks(n: int) -> int:
    """Smallest block count minimising :func:`inner_factor`."""
    return min(range(1, max(n, 1) + 1), key=lambda k: (inner_factor(n, k), k))


def inner_bound(x, y, u=None, blocks: int = 1) -> ErrorBound:
    """gamma_{n/k + k - 1} |x|^T |y| for k consecutive blocks (k = 1 gives gamma_n)."""
    if len(x) != len(y):
        raise LengthMismatch(f"vector lengths differ: {len(x)} vs {len(y)}")
    u = _u(u)
    n = len(x)
    dot = sum((abs(exact(a)) * abs(exact(b)) for a, b in zip(x, y)), Fraction(0))
    return ErrorBound("forward_absolute", gamma(inner_factor(n, blocks), u) * dot, n, u)


def _abs_matvec(A, x):
    return [sum((abs(exact(a)) * abs(exact(b)) for a, b in zip(row, x)), Fraction(0)) for row in A]


def matvec_bound(A, x, u=None, norm_p="componentwise") -> ErrorBound:
    """gamma_n |A||x| componentwise, or a norm bound for y = Ax.

    Norm forms are gamma_n ||A|| ||x|| for 1 and inf, and
    gamma_n sqrt(min(m, n)) ||A||_2 ||x||_2 for 2.
    """
    m, n = shape(A)
    if len(x) != n:
        raise ShapeMismatch(f"matrix has {n} columns, vector has {len(x)} entries")
    u = _u(u)
    g = gamma(n, u)
    if norm_p == "componentwise":
        return ErrorBound("forward_absolute", [g * v for v in _abs_matvec(A, x)], n, u)
    key = str(norm_p).lower()
    if key in ("1", "inf"):
        value = g * norm(to_rational(A), key) * norm(to_rational(x), key)
    elif key == "2":
        from .conditioning import spectral_norm

        value = float(g) * math.sqrt(min(m, n)) * float(spectral_norm(A)) * float(norm(to_rational(x), 2))
    else:
        raise ValueError(f"unknown norm {norm_p!r}")
    return ErrorBound("forward_absolute", value, n, u)


def matmul_bound(A, B, u=None) -> ErrorBound:
    """gamma_p |A||B| componentwise, p the inner dimension."""
    m, p = shape(A)
    p2, q = shape(B)
    if p != p2:
        raise ShapeMismatch(f"inner dimensions differ: {p} vs {p2}")
    u = _u(u)
    g = gamma(p, u)
    cols = list(zip(*B))
    value = [[g * sum((abs(exact(a)) * abs(exact(b)) for a, b in zip(row, col)), Fraction(0)) for col in cols] for row in A]
    return ErrorBound("forward_absolute", value, p, u)


def posterior_bound(A, b, xhat, norm_p="inf"):
    """cond(A) ||r|| / ||b|| with r = b - A xhat computed exactly."""
    from .conditioning import cond_matrix

    bq = to_rational(b)
    nb = norm(bq, norm_p)
    if nb == 0:
        raise RelativeUndefined("b must be nonzero")
    r = residual(A, bq, xhat)
    c = cond_matrix(A, norm_p).value
    value = c * norm(r, norm_p) / nb
    return value
