"""Condition numbers: scalar and multivariate maps, matrices and polynomial roots."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .errors import (
    DegreeZero,
    DuplicateNodes,
    MultipleRoot,
    PerturbationTooLarge,
    ShapeMismatch,
    ZeroRoot,
)
from .fpsys import exact
from .linalg import norm, norm_squared, rational_inverse, shape, to_rational, transpose

CASE_REGULAR = "x≠0∧y≠0"
CASE_X_ZERO = "x=0"
CASE_Y_ZERO = "y=0"
CASE_BOTH_ZERO = "x=0∧y=0"


@dataclass(frozen=True)
class CondReport:
    value: object
    formula: str
    norm: str = "none"
    case: str = CASE_REGULAR

    def __float__(self) -> float:
        return float(self.value)


def _num(x):
    """Keep exact inputs exact; leave floats and mpmath numbers alone."""
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, str):
        return exact(x)
    return x


def _scalar(f, df, x):
    f, df, x = _num(f), _num(df), _num(x)
    if x != 0 and f != 0:
        return abs(x) * abs(df) / abs(f), CASE_REGULAR
    if x == 0 and f != 0:
        return abs(df) / abs(f), CASE_X_ZERO
    if x != 0:
        return abs(x) * abs(df), CASE_Y_ZERO
    return abs(df), CASE_BOTH_ZERO


def cond_scalar(f_value, f_deriv, x) -> CondReport:
    """Relative condition number of y = f(x) from caller-supplied f(x), f'(x).

    Exact zeros of x or f(x) switch to the absolute or mixed variants.
    """
    value, case = _scalar(f_value, f_deriv, x)
    return CondReport(value, "scalar_def1", "none", case)


def _matrix_norm_float(K, p) -> float:
    arr = np.array([[float(v) for v in row] for row in K])
    if p in ("inf", math.inf):
        return float(np.abs(arr).sum(axis=1).max())
    if p in (1, "1"):
        return float(np.abs(arr).sum(axis=0).max())
    if p in (2, "2"):
        return float(np.linalg.norm(arr, 2))
    return float(np.linalg.norm(arr, "fro"))


def cond_multivariate(f_values, jacobian, x, mode: str = "entrywise", norm_p="inf") -> CondReport:
    """Condition of f: R^n -> R^m at x.

    ``entrywise`` returns the matrix of kappa_kj = |df_k/dx_j| |x_j| / |f_k|;
    ``norm2of_entrywise`` returns a norm of that matrix; ``jacobian_norm``
    returns ||J|| ||x|| / ||f||.
    """
    m, n = len(f_values), len(x)
    if shape(jacobian) != (m, n):
        raise ShapeMismatch(f"jacobian must be {m} by {n}")
    if mode in ("entrywise", "norm2of_entrywise"):
        K = []
        cases = set()
        for k in range(m):
            row = []
            for j in range(n):
                v, case = _scalar(f_values[k], jacobian[k][j], x[j])
                row.append(v)
                cases.add(case)
            K.append(row)
        case = cases.pop() if len(cases) == 1 else CASE_REGULAR
        if mode == "entrywise":
            return CondReport(K, "entrywise_defkj", "none", case)
        if norm_p in ("inf", math.inf, 1, "1"):
            rows = K if norm_p in ("inf", math.inf) else transpose(K)
            value = max(sum(row) for row in rows)
        else:
            value = _matrix_norm_float(K, norm_p)
        return CondReport(value, "norm_def2", str(norm_p), case)
    if mode == "jacobian_norm":
        xs, fs = [_num(v) for v in x], [_num(v) for v in f_values]
        J = [[_num(v) for v in row] for row in jacobian]
        if norm_p in ("inf", math.inf):
            nj = max(sum(abs(v) for v in row) for row in J)
            nx = max(abs(v) for v in xs)
            nf = max(abs(v) for v in fs)
        elif norm_p in (1, "1"):
            nj = max(sum(abs(v) for v in col) for col in zip(*J))
            nx = sum(abs(v) for v in xs)
            nf = sum(abs(v) for v in fs)
        else:
            nj = _matrix_norm_float(J, norm_p)
            nx = math.sqrt(sum(float(v) ** 2 for v in xs))
            nf = math.sqrt(sum(float(v) ** 2 for v in fs))
        if nf == 0:
            value = nj if nx == 0 else nj * nx
            case = CASE_BOTH_ZERO if nx == 0 else CASE_Y_ZERO
        elif nx == 0:
            value, case = nj / nf, CASE_X_ZERO
        else:
            value, case = nj * nx / nf, CASE_REGULAR
        return CondReport(value, "jacobian_def3", str(norm_p), case)
    raise ValueError(f"unknown mode {mode!r}")


# -- matrices -------------------------------------------------------------------


def _to_mp(A):
    return mpmath.matrix([[mpmath.mpf(v.numerator) / v.denominator for v in row] for row in A])


def _gram(A):
    """A^T A in exact arithmetic."""
    At = transpose(A)
    return [[sum((a * b for a, b in zip(ri, rj)), Fraction(0)) for rj in At] for ri in At]


def _top_eigenvalue(S, dps: int, rtol: float, maxiter: int):
    """Largest eigenvalue of a symmetric positive semidefinite matrix by power iteration."""
    n = len(S)
    with mpmath.workdps(dps):
        M = _to_mp(S)
        # a start vector with no special symmetry
        v = mpmath.matrix([mpmath.mpf(1) / (k + mpmath.mpf(1.5)) for k in range(n)])
        v /= mpmath.norm(v)
        lam = mpmath.mpf(0)
        for _ in range(maxiter):
            w = M * v
            new = mpmath.fdot(v, w)
            nw = mpmath.norm(w)
            if nw == 0:
                return mpmath.mpf(0)
            v = w / nw
            if lam and abs(new - lam) <= rtol * abs(new):
                lam = new
                break
            lam = new
        return +lam


def spectral_norm(A, dps: int = 60, rtol: float = 1e-20, maxiter: int = 20000):
    """||A||_2 as a high-precision number (power iteration on A^T A)."""
    A = to_rational(A)
    with mpmath.workdps(dps):
        return mpmath.sqrt(_top_eigenvalue(_gram(A), dps, rtol, maxiter))


def cond_matrix(A, norm_p="inf", *, dps: int = 60, rtol: float = 1e-20) -> CondReport:
    """cond(A) = ||A|| ||A^-1||.

    1 and inf are exact rationals; fro is the square root of an exact
    rational.  The 2-norm runs power iteration in ``dps``-digit arithmetic on
    A^T A and on A^-T A^-1 (the latter built from the exact inverse).
    """
    n, m = shape(A)
    if n != m:
        raise ShapeMismatch("matrix must be square")
    R = to_rational(A)
    inv = rational_inverse(R)
    key = str(norm_p).lower()
    if key in ("1", "inf"):
        return CondReport(norm(R, key) * norm(inv, key), "matrix_condA", key)
    if key in ("fro", "f"):
        return CondReport(math.sqrt(norm_squared(R) * norm_squared(inv)), "matrix_condA", "fro")
    if key == "2":
        hi = _top_eigenvalue(_gram(R), dps, rtol, 20000)
        lo = _top_eigenvalue(_gram(transpose(inv)), dps, rtol, 20000)
        with mpmath.workdps(dps):
            value = mpmath.sqrt(hi * lo)
        return CondReport(float(value), "matrix_condA", "2")
    raise ValueError(f"unknown norm {norm_p!r}")


def hilbert(n: int):
    if n < 1:
        raise ValueError("n must be positive")
    return [[Fraction(1, i + j + 1) for j in range(n)] for i in range(n)]


def hilbert_rhs(n: int):
    """Row sums of H_n, so that the exact solution is all ones."""
    return [sum(row, Fraction(0)) for row in hilbert(n)]


def equispaced_nodes(n: int):
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return [Fraction(0)]
    return [Fraction(-1) + Fraction(2 * k, n - 1) for k in range(n)]


def harmonic_nodes(n: int):
    return [Fraction(1, k) for k in range(1, n + 1)]


def vandermonde(nodes, orientation: str = "nodes"):
    """Vandermonde matrix of distinct nodes.

    ``orientation="nodes"`` puts node t_j in row j as [1, t_j, t_j^2, ...];
    ``orientation="powers"`` is the transpose, row k holding t_j^k.  The two
    share cond_2 and swap cond_1 with cond_inf.
    """
    t = [exact(v) for v in nodes]
    if len(set(t)) != len(t):
        raise DuplicateNodes("Vandermonde nodes must be distinct")
    n = len(t)
    V = [[tj**k for k in range(n)] for tj in t]
    if orientation == "nodes":
        return V
    if orientation == "powers":
        return transpose(V)
    raise ValueError(f"unknown orientation {orientation!r}")


# -- polynomials ----------------------------------------------------------------


def _strip(coeffs):
    cs = list(coeffs)
    while cs and cs[0] == 0:
        cs.pop(0)
    return cs


def _mp(c):
    if isinstance(c, complex):
        return mpmath.mpc(c.real, c.imag)
    if isinstance(c, Fraction):
        return mpmath.mpf(c.numerator) / c.denominator
    if isinstance(c, str):
        q = exact(c)
        return mpmath.mpf(q.numerator) / q.denominator
    if isinstance(c, (mpmath.mpf, mpmath.mpc)):
        return c
    if isinstance(c, (int, float, np.floating, np.integer)):
        return mpmath.mpf(c)
    return mpmath.mpmathify(c)


def _horner(a, z):
    p = a[0]
    dp = 0
    for c in a[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def poly_roots(coeffs, *, dps: int = 40, maxiter: int = 500, tol: float = 1e-13, polish: int = 2):
    """All complex roots of a polynomial given highest-degree coefficient first.

    Simultaneous Aberth-Ehrlich iteration on the monic polynomial, started on
    a circle around the root centroid.  Roots come back as Python complex
    numbers sorted by decreasing real part (then decreasing imaginary part);
    for real coefficients, imaginary parts below rounding level are zeroed.
    """
    cs = _strip(coeffs)
    if len(cs) < 2:
        raise DegreeZero("polynomial must have degree at least 1")
    real_input = all(not isinstance(c, complex) for c in cs)
    with mpmath.workdps(dps):
        a = [_mp(c) for c in cs]
        lead = a[0]
        a = [c / lead for c in a]
        n = len(a) - 1
        zero_roots = 0
        while a[-1] == 0:
            a.pop()
            zero_roots += 1
        m = len(a) - 1
        z = []
        if m > 0:
            centre = -a[1] / m
            pc, _ = _horner(a, centre)
            radius = max(abs(pc) ** (mpmath.mpf(1) / m), mpmath.mpf("0.5"))
            z = [centre + radius * mpmath.expj(2 * mpmath.pi * k / m + mpmath.mpf("0.4")) for k in range(m)]
            if m == 1:
                z = [-a[1]]
            for _ in range(maxiter):
                worst = mpmath.mpf(0)
                for i in range(m):
                    p, dp = _horner(a, z[i])
                    if p == 0:
                        continue
                    ratio = p / dp if dp != 0 else mpmath.mpf(1)
                    s = mpmath.fsum(1 / (z[i] - z[j]) for j in range(m) if j != i)
                    w = ratio / (1 - ratio * s)
                    z[i] -= w
                    worst = max(worst, abs(w) / (1 + abs(z[i])))
                if worst < tol:
                    break
            for _ in range(polish):
                for i in range(m):
                    p, dp = _horner(a, z[i])
                    if p == 0:
                        continue
                    ratio = p / dp if dp != 0 else mpmath.mpf(0)
                    s = mpmath.fsum(1 / (z[i] - z[j]) for j in range(m) if j != i)
                    z[i] -= ratio / (1 - ratio * s)
        roots = [complex(v) for v in z] + [0j] * zero_roots
    if real_input:
        roots = [complex(r.real, 0.0) if abs(r.imag) <= 1e-12 * (1 + abs(r)) else r for r in roots]
    return sorted(roots, key=lambda r: (-r.real, -r.imag))


def poly_eval(coeffs, x):
    """p(x) and p'(x), highest-degree coefficient first."""
    cs = _strip(coeffs)
    return _horner(cs, x)


def poly_root_cond(coeffs, root, *, dps: int = 40, rtol: float = 1e-10) -> float:
    """Condition of a simple nonzero root as a function of the coefficients.

    With p normalised to monic form x^n + a_{n-1} x^{n-1} + ... + a_0, the
    value is sum_{k<n} |a_k| |xi|^k / |xi p'(xi)|.
    """
    cs = _strip(coeffs)
    if len(cs) < 2:
        raise DegreeZero("polynomial must have degree at least 1")
    if root == 0:
        raise ZeroRoot("root at the origin has no relative condition number")
    with mpmath.workdps(dps):
        a = [_mp(c) for c in cs]
        a = [c / a[0] for c in a]
        n = len(a) - 1
        xi = mpmath.mpc(root) if isinstance(root, complex) else _mp(root)
        r = abs(xi)
        # a[i] multiplies x^(n - i)
        num = mpmath.fsum(abs(a[n - k]) * r**k for k in range(n))
        dp = mpmath.fsum(k * a[n - k] * xi ** (k - 1) for k in range(1, n + 1))
        scale = mpmath.fsum(k * abs(a[n - k]) * r ** (k - 1) for k in range(1, n + 1))
        if abs(dp) <= rtol * scale:
            raise MultipleRoot("p'(root) vanishes to working tolerance")
        return float(num / abs(xi * dp))


def implicit_root(n: int, a, *, dps: int = 40):
    """Positive solution xi of x^n = a e^(-x), with its condition as a function of a.

    The condition comes from implicit differentiation and equals 1/(n + xi).
    """
    if n < 1:
        raise ValueError("n must be positive")
    with mpmath.workdps(dps):
        a = _mp(a)
        if a <= 0:
            raise ValueError("a must be positive")
        f = lambda x: x**n - a * mpmath.exp(-x)
        xi = mpmath.findroot(f, mpmath.mpf(1) if a >= 1 else a ** (mpmath.mpf(1) / n))
        dxi_da = mpmath.exp(-xi) / (n * xi ** (n - 1) + a * mpmath.exp(-xi))
        report = cond_scalar(xi, dxi_da, a)
        return float(xi), float(report.value)


def linear_perturb_bounds(condA, rel_dA, rel_db):
    """Relative forward error bound for (A + dA)(x + dx) = b + db."""
    condA, rel_dA, rel_db = _num(condA), _num(rel_dA), _num(rel_db)
    if condA * rel_dA >= 1:
        raise PerturbationTooLarge("cond(A) * ||dA||/||A|| must be below 1")
    return condA / (1 - condA * rel_dA) * (rel_db + rel_dA)


def quadratic_root_cond(a):
    """Condition of f(a) = a +- sqrt(a^2 - 1) for a > 1: |a| / sqrt(a^2 - 1)."""
    a = float(a)
    return abs(a) / math.sqrt(a * a - 1)


__all__ = [
    "CondReport",
    "cond_scalar",
    "cond_multivariate",
    "cond_matrix",
    "spectral_norm",
    "hilbert",
    "hilbert_rhs",
    "equispaced_nodes",
    "harmonic_nodes",
    "vandermonde",
    "poly_roots",
    "poly_eval",
    "poly_root_cond",
    "implicit_root",
    "linear_perturb_bounds",
    "quadratic_root_cond",
]
