"""Reproducible numerical experiments.

Every runner returns an :class:`ExperimentReport` whose rows depend only on
the parameters.  Verdict thresholds live in :data:`EXPECTATIONS`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import arith
from .arith import FlopTally, fl_fma, fl_op
from .conditioning import (
    cond_matrix,
    cond_scalar,
    hilbert,
    hilbert_rhs,
    implicit_root,
    poly_root_cond,
    poly_roots,
)
from .errors import ConversionOverflow, DomainError
from .fpsys import BINARY64, TOY, exact, fp, make_format, parse_radix, round_real, to_radix_string
from .ieee754 import float_to_int16
from .linalg import gauss_solve, norm

PI_30 = Fraction("3.14159265358979323846264338328")

WILKINSON_8 = (1, -36, 546, -4536, 22449, -67284, 118124, -109584, 40320)

EXPECTATIONS = {
    "pi": {
        "min_K_for_verdict": 30,
        "unstable_argmin_k": (12, 16),
        "unstable_min_error_max": 1e-7,
        "unstable_late_k": 29,
        "unstable_late_error_min": 1e-1,
        "stable_jitter_eps": 2,
        "stable_late_error_max": 1e-14,
    },
    "cancellation": {
        "x": "1.23456702645",
        "y": "1.2345664932563685",
        "beta": 10,
        "p": 7,
        "fl_difference": Fraction(1, 10**6),
        "exact_difference": Fraction("5.331936315e-7"),
        "relative_error_range": (0.86, 0.88),
    },
    "patriot": {
        "register": "0.00011001100110011001100",
        "ticks": 100 * 60 * 60 * 10,
        "speed_m_per_s": 1676,
        "time_error_range": (0.33, 0.35),
        "distance_min_m": 500,
    },
    "hilbert": {
        "relative_error_range": {11: (1e-5, 1.0)},
    },
    "wilkinson": {
        "unperturbed_tol": 1e-6,
        "perturbed_tol": 1e-3,
        "perturbed_index": 1,
        "perturbation": 0.001,
        "perturbed_pair": complex(6.49986, 0.72927),
        "perturbed_largest": 8.27260,
        "root_conditions": {8: 0.14e9, 7: 0.47e9, 6: 0.44e9, 5: 0.18e9, 4: 0.35e8, 3: 0.25e7, 2: 0.48e5, 1: 0.72e2},
        "root_condition_rel_tol": 0.05,
    },
    "quadratic": {
        "reformulated_cond": 1,
        "closed_form_rel_tol": 1e-9,
        "rel_tol": 1e-12,
    },
    "misc": {
        "toy_assoc": (Fraction(3), Fraction(5, 2)),
        "implicit_n": 2,
        "implicit_a": 1,
        "ariane_value": 32768,
    },
}


@dataclass
class ExperimentReport:
    name: str
    params: dict
    columns: list
    rows: list
    verdict: str = "informational"
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "columns": self.columns,
            "rows": [list(r) for r in self.rows],
            "verdict": self.verdict,
            "notes": self.notes,
        }


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


# -- pi ------------------------------------------------------------------------


def pi_sequence(K: int, formula: str = "unstable") -> list:
    """p_0 .. p_{K-1} in hardware binary64."""
    p = [2.0]
    for k in range(1, K):
        prev = p[-1]
        s = 2 ** (-2 * k) * prev**2
        if formula == "unstable":
            p.append(2 ** (k + 1) * math.sqrt(0.5 * (1 - math.sqrt(1 - s))))
        elif formula == "stable":
            p.append(prev * math.sqrt(2 / (1 + math.sqrt(1 - s))))
        else:
            raise ValueError(f"unknown formula {formula!r}")
    return p


def _pi_error(x: float) -> float:
    return float(abs(PI_30 - Fraction(x)))


def run_pi_recursion(K: int = 30, formula: str = "unstable", check: bool | None = None) -> ExperimentReport:
    """Archimedes-style polygon recursion for pi in two algebraically equal forms.

    Verdicts are only issued with ``check=True`` (and K >= 30); otherwise the
    report is informational and the notes say whether the expected shape shows.
    """
    if not 1 <= K <= 60:
        raise DomainError("K must be between 1 and 60")
    exp = EXPECTATIONS["pi"]
    p = pi_sequence(K, formula)
    errors = [_pi_error(v) for v in p]
    rows = [(k, p[k], errors[k]) for k in range(K)]
    report = ExperimentReport("pi", {"K": K, "formula": formula}, ["k", "p_k", "abs_error"], rows)

    late = exp["unstable_late_k"]
    if K <= late:
        report.notes.append(f"K={K} does not reach k={late}; shape checks need K >= {exp['min_K_for_verdict']}")
        ok = None
    elif formula == "unstable":
        kmin = min(range(K), key=lambda k: errors[k])
        lo, hi = exp["unstable_argmin_k"]
        ok = lo <= kmin <= hi and errors[kmin] <= exp["unstable_min_error_max"] and errors[late] >= exp["unstable_late_error_min"]
        report.notes.append(f"minimum error {errors[kmin]:.3g} at k={kmin}; error at k={late} is {errors[late]:.3g}")
    else:
        jitter = exp["stable_jitter_eps"] * float(BINARY64.eps)
        monotone = all(errors[k] <= errors[k - 1] + jitter for k in range(2, K))
        ok = monotone and errors[late] <= exp["stable_late_error_max"]
        report.notes.append(f"monotone={monotone}; error at k={late} is {errors[late]:.3g}")
    if check and ok is not None:
        report.verdict = _verdict(ok)
    elif ok is not None:
        report.notes.append("expected shape " + ("observed" if ok else "NOT observed"))
    return report


# -- cancellation -----------------------------------------------------------------


def run_cancellation_decimal() -> ExperimentReport:
    """Subtracting two close numbers after rounding them to 7 decimal digits."""
    exp = EXPECTATIONS["cancellation"]
    fmt = make_format(exp["beta"], exp["p"], -99, 99)
    x, y = exact(exp["x"]), exact(exp["y"])
    xh, yh = round_real(x, fmt), round_real(y, fmt)
    d = fl_op("sub", xh, yh, fmt)
    true = x - y
    rel = abs(d.to_fraction() - true) / abs(true)
    rows = [
        ("x_hat", _fraction_text(xh.to_fraction()), float(xh)),
        ("y_hat", _fraction_text(yh.to_fraction()), float(yh)),
        ("fl(x_hat - y_hat)", _fraction_text(d.to_fraction()), float(d)),
        ("x - y", _fraction_text(true), float(true)),
        ("relative_error", _fraction_text(rel), float(rel)),
    ]
    lo, hi = exp["relative_error_range"]
    ok = d.to_fraction() == exp["fl_difference"] and true == exp["exact_difference"] and lo <= rel <= hi
    return ExperimentReport(
        "cancellation",
        {"x": exp["x"], "y": exp["y"], "beta": fmt.beta, "p": fmt.p},
        ["quantity", "exact", "value"],
        rows,
        _verdict(ok),
        [f"exact difference is {float(true):.10e}"],
    )


def _fraction_text(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# -- Patriot -----------------------------------------------------------------------


def run_patriot() -> ExperimentReport:
    """Clock drift from storing 1/10 in a chopped binary register."""
    exp = EXPECTATIONS["patriot"]
    tenth = Fraction(1, 10)
    register = exp["register"]
    stored = parse_radix(register, 2)
    frac_bits = len(register.split(".")[1])
    chopped = to_radix_string(tenth, 2, frac_bits)
    per_tick = tenth - stored
    drift = per_tick * exp["ticks"]
    distance = drift * exp["speed_m_per_s"]
    nearest24 = round(tenth * 2**24) / Fraction(2**24)
    alt_drift = abs(tenth - nearest24) * exp["ticks"]
    rows = [
        ("stored_value", _fraction_text(stored), float(stored)),
        ("error_per_tick", _fraction_text(per_tick), float(per_tick)),
        ("ticks", str(exp["ticks"]), float(exp["ticks"])),
        ("time_error_s", _fraction_text(drift), float(drift)),
        ("distance_m", _fraction_text(distance), float(distance)),
        ("time_error_if_rounded_to_24_bits_s", _fraction_text(alt_drift), float(alt_drift)),
    ]
    lo, hi = exp["time_error_range"]
    ok = chopped == register and lo <= drift <= hi and distance > exp["distance_min_m"]
    notes = [
        f"register holds {frac_bits} fraction bits, the chop of 1/10 to that width",
        "rounding 1/10 to 24 fraction bits instead would give the last row",
    ]
    return ExperimentReport("patriot", {"register": register}, ["quantity", "exact", "value"], rows, _verdict(ok), notes)


# -- Hilbert ---------------------------------------------------------------------------


def run_hilbert_solve(n: int = 11, backend: str = "binary64", pivoting: str = "partial") -> ExperimentReport:
    """Solve H_n x = H_n 1 and compare with the all-ones solution."""
    if not 2 <= n <= 13:
        raise DomainError("n must be between 2 and 13")
    A = hilbert(n)
    b = hilbert_rhs(n)
    # tol=0: only an exactly vanishing pivot column is refused here
    xhat = gauss_solve(A, b, pivoting=pivoting, backend=backend, tol=0)
    diff = [exact(v) - 1 for v in xhat]
    rel = norm(diff, "inf")  # ||ones||_inf = 1
    cond = cond_matrix(A, "inf").value
    u = BINARY64.unit_roundoff() if backend == "binary64" else Fraction(0)
    bound = cond * u
    rows = [(f"x[{i}]", float(v), float(d)) for i, (v, d) in enumerate(zip(xhat, diff))]
    rows += [
        ("relative_error_inf", float(rel), None),
        ("cond_inf", float(cond), None),
        ("cond_inf_times_u", float(bound), None),
    ]
    ok = rel <= bound
    rng = EXPECTATIONS["hilbert"]["relative_error_range"].get(n)
    if rng and backend == "binary64":
        ok = ok and rng[0] <= rel <= rng[1]
    if backend == "rational":
        ok = rel == 0
    return ExperimentReport(
        "hilbert",
        {"n": n, "backend": backend, "pivoting": pivoting},
        ["quantity", "value", "error"],
        rows,
        _verdict(ok),
    )


# -- Wilkinson ---------------------------------------------------------------------------


def run_wilkinson(perturbation: float = 0.001, index: int = 1) -> ExperimentReport:
    """Roots of (x-1)...(x-8) before and after nudging one coefficient."""
    exp = EXPECTATIONS["wilkinson"]
    coeffs = list(WILKINSON_8)
    perturbed = [float(c) for c in coeffs]
    perturbed[index] -= perturbation
    original = poly_roots(coeffs)
    moved = poly_roots(perturbed)
    rows = []
    table = exp["root_conditions"]
    table_ok = True
    for i, r in enumerate(original):
        xi = round(r.real)
        c = poly_root_cond(coeffs, xi)
        ref = table.get(xi)
        ratio = c / ref if ref else None
        if ratio is None or abs(ratio - 1) > exp["root_condition_rel_tol"]:
            table_ok = False
        rows.append(("original", i, r.real, r.imag, c, ref, ratio))
    for i, r in enumerate(moved):
        rows.append(("perturbed", i, r.real, r.imag, None, None, None))

    ok = all(abs(r - k) <= exp["unperturbed_tol"] for r, k in zip(original, range(8, 0, -1)))
    notes = []
    if index == exp["perturbed_index"] and perturbation == exp["perturbation"]:
        pair = exp["perturbed_pair"]
        has_pair = any(abs(r - pair) <= exp["perturbed_tol"] for r in moved) and any(
            abs(r - pair.conjugate()) <= exp["perturbed_tol"] for r in moved
        )
        largest = max((r for r in moved if r.imag == 0), key=lambda r: r.real)
        ok = ok and has_pair and abs(largest.real - exp["perturbed_largest"]) <= exp["perturbed_tol"]
    notes.append(
        "root condition numbers "
        + ("agree" if table_ok else "do not agree")
        + f" with the reference table within {exp['root_condition_rel_tol']:.0%} (see ratio column)"
    )
    return ExperimentReport(
        "wilkinson",
        {"perturbation": perturbation, "index": index},
        ["set", "i", "real", "imag", "cond", "reference_cond", "ratio"],
        rows,
        _verdict(ok),
        notes,
    )


# -- quadratic --------------------------------------------------------------------------


def run_quadratic_reformulation(a_values=(1.0001, 1.01, 1.1, 2.0, 10.0)) -> ExperimentReport:
    """Roots of y^2 - 2ay + 1 = 0 as functions of a, and of b = a + sqrt(a^2 - 1)."""
    exp = EXPECTATIONS["quadratic"]
    rows = []
    ok = True
    for a in a_values:
        a = float(a)
        if a <= 1:
            raise DomainError("a must exceed 1")
        s = math.sqrt(a * a - 1)
        b = a + s
        plus = cond_scalar(a + s, 1 + a / s, a).value
        minus = cond_scalar(a - s, 1 - a / s, a).value
        closed = abs(a) / s
        y_plus_b = cond_scalar(1 / b, -1 / b**2, b).value
        y_minus_b = cond_scalar(b, 1, b).value
        tol = exp["closed_form_rel_tol"] * closed
        ok = ok and abs(plus - closed) <= tol and abs(minus - closed) <= tol
        ok = ok and abs(y_plus_b - exp["reformulated_cond"]) <= exp["rel_tol"] and abs(y_minus_b - exp["reformulated_cond"]) <= exp["rel_tol"]
        rows.append((a, b, float(plus), float(minus), closed, float(y_plus_b), float(y_minus_b)))
    return ExperimentReport(
        "quadratic",
        {"a_values": list(map(float, a_values))},
        ["a", "b", "cond_f_plus", "cond_f_minus", "abs_a_over_sqrt", "cond_1_over_b", "cond_b"],
        rows,
        _verdict(ok),
    )


# -- miscellany ------------------------------------------------------------------------------


def _newton_reciprocal(a: float, x0: float, steps: int, use_fma: bool):
    """x <- x + x(1 - a x) in simulated binary64; returns x and the number of roundings."""
    fmt = BINARY64
    tally = FlopTally()
    x = fp(x0, fmt)
    av = fp(a, fmt)
    for _ in range(steps):
        if use_fma:
            e = fl_fma(-av, x, 1, fmt, tally=tally)
            x = fl_fma(x, e, x, fmt, tally=tally)
        else:
            e = fl_op("sub", 1, fl_op("mul", av, x, fmt, tally=tally), fmt, tally=tally)
            x = fl_op("add", x, fl_op("mul", x, e, fmt, tally=tally), fmt, tally=tally)
    return x, tally.flops


def run_misc_demos() -> ExperimentReport:
    exp = EXPECTATIONS["misc"]
    rows = []

    left = arith.recursive_sum([Fraction(1, 2), Fraction(3, 2), Fraction(3, 4)], TOY)
    right = fl_op("add", Fraction(1, 2), fl_op("add", Fraction(3, 2), Fraction(3, 4), TOY), TOY)
    pair = (left.to_fraction(), right.to_fraction())
    rows.append(("toy (0.5+1.5)+0.75", float(pair[0]), float(exp["toy_assoc"][0]), pair[0] == exp["toy_assoc"][0]))
    rows.append(("toy 0.5+(1.5+0.75)", float(pair[1]), float(exp["toy_assoc"][1]), pair[1] == exp["toy_assoc"][1]))

    eps = BINARY64.eps
    a1 = fl_op("sub", fl_op("add", 2, eps, BINARY64), 2, BINARY64).to_fraction()
    a2 = fl_op("add", 2, fl_op("sub", eps, 2, BINARY64), BINARY64).to_fraction()
    rows.append(("binary64 (2+eps)-2", float(a1), 0.0, a1 == 0))
    rows.append(("binary64 2+(eps-2)", float(a2), float(eps), a2 == eps))

    a = 3.0
    target = Fraction(1) / Fraction(a)
    for use_fma in (False, True):
        x, roundings = _newton_reciprocal(a, 0.3, 6, use_fma)
        err = abs(x.to_fraction() - target) / target
        per_step = roundings // 6
        label = "with FMA" if use_fma else "without FMA"
        rows.append((f"Newton 1/3 {label}: roundings per step", per_step, 2 if use_fma else 4, per_step == (2 if use_fma else 4)))
        rows.append((f"Newton 1/3 {label}: relative error", float(err), float(BINARY64.eps), err <= BINARY64.eps))

    xi, c = implicit_root(exp["implicit_n"], exp["implicit_a"])
    closed = 1 / (exp["implicit_n"] + xi)
    rows.append(("implicit root xi (x^2 = e^-x)", xi, None, True))
    rows.append(("implicit root condition", c, closed, abs(c - closed) <= 1e-12 and c < 1 / exp["implicit_n"]))

    try:
        float_to_int16(float(exp["ariane_value"]))
        raised = False
    except ConversionOverflow:
        raised = True
    rows.append(("Ariane int16 conversion of 32768.0 overflows", 1.0 if raised else 0.0, 1.0, raised))

    ok = all(r[3] for r in rows)
    return ExperimentReport("misc", {}, ["demo", "value", "expected", "ok"], rows, _verdict(ok))


EXPERIMENTS = {
    "pi": run_pi_recursion,
    "cancellation": run_cancellation_decimal,
    "patriot": run_patriot,
    "hilbert": run_hilbert_solve,
    "wilkinson": run_wilkinson,
    "quadratic": run_quadratic_reformulation,
    "misc": run_misc_demos,
}


def run(name: str, **params) -> ExperimentReport:
    try:
        runner = EXPERIMENTS[name]
    except KeyError:
        raise ValueError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}") from None
    return runner(**params)
