"""Command-line interface: ``fplab <command> ...``.

Every command produces a small table (columns + rows) that is rendered as
an aligned table, CSV or JSON.  Exit status is 0 on success, 1 when an
experiment verdict fails and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

from . import conditioning, errbounds, experiments, fpsys, ieee754, linalg
from .arith import FlopTally
from .errors import FplabError
from .fpsys import FpValue, RoundingMode, exact


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- rendering -------------------------------------------------------------------


def render_cell(v, precision: int = 17) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.{precision}g}"
    if isinstance(v, complex):
        return f"{render_cell(v.real, precision)}{'+' if v.imag >= 0 else '-'}{render_cell(abs(v.imag), precision)}j"
    if isinstance(v, FpValue):
        return str(v)
    return str(v)


def _json_cell(v, precision: int):
    if v is None or isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, float) and math.isfinite(v):
        return float(render_cell(v, precision))
    return render_cell(v, precision)


def _json_params(params):
    return {k: (_json_cell(v, 17) if not isinstance(v, (list, tuple)) else [_json_cell(x, 17) for x in v]) for k, v in params.items()}


def render(report, fmt: str, precision: int) -> str:
    columns, rows = report.columns, report.rows
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([render_cell(v, precision) for v in r])
        return buf.getvalue()
    if fmt == "json":
        obj = {
            "name": report.name,
            "params": _json_params(report.params),
            "columns": columns,
            "rows": [[_json_cell(v, precision) for v in r] for r in rows],
            "verdict": report.verdict,
            "notes": report.notes,
        }
        return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"
    cells = [[render_cell(v, precision) for v in r] for r in rows]
    if len(cells) == 1 and len(columns) == 1:
        return cells[0][0] + "\n"
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    if report.verdict != "informational" or report.notes:
        lines.append("")
        lines.append(f"verdict: {report.verdict}")
    lines += [f"note: {n}" for n in report.notes]
    return "\n".join(lines) + "\n"


def _report(name, columns, rows, params=None, verdict="informational", notes=None):
    return experiments.ExperimentReport(name, params or {}, list(columns), rows, verdict, notes or [])


# -- argument helpers ---------------------------------------------------------------

PRESETS = {"toy": fpsys.TOY, "binary32": fpsys.BINARY32, "binary64": fpsys.BINARY64}


def _add_output(p):
    g = p.add_argument_group("output")
    g.add_argument("--format", dest="out_format", choices=("table", "csv", "json"), default="table")
    g.add_argument("--output", "-o", default="-", help="file path, or - for standard output")
    g.add_argument("--precision", type=int, default=17, help="significant digits for floats")


def _add_fmt(p, with_mode=True):
    g = p.add_argument_group("floating-point system")
    g.add_argument("--preset", choices=sorted(PRESETS), help="named system (overrides --beta/--p/--L/--U)")
    g.add_argument("--beta", type=int)
    g.add_argument("--p", type=int)
    g.add_argument("--L", type=int)
    g.add_argument("--U", type=int)
    g.add_argument("--no-subnormals", action="store_true")
    g.add_argument("--no-guard-digit", action="store_true")
    if with_mode:
        g.add_argument("--mode", default="nearest_even", help="nearest_even, chop, up or down")


def _fmt(args, default="binary64"):
    if args.preset:
        base = PRESETS[args.preset]
    elif any(getattr(args, k) is not None for k in ("beta", "p", "L", "U")):
        missing = [k for k in ("beta", "p", "L", "U") if getattr(args, k) is None]
        if missing:
            raise UsageError(f"--{missing[0]} is required when describing a system by parameters")
        base = fpsys.make_format(args.beta, args.p, args.L, args.U)
    else:
        base = PRESETS[default]
    return base.replace(subnormals=not args.no_subnormals, guard_digit=not args.no_guard_digit)


def _mode(args):
    try:
        return RoundingMode.parse(args.mode)
    except ValueError as e:
        raise UsageError(f"--mode: {e}") from None


def _num_list(text: str):
    try:
        return [exact(t) for t in text.replace(",", " ").split()]
    except ValueError as e:
        raise UsageError(str(e)) from None


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _exact_row(label, q):
    return (label, q, float(q))


# -- commands ---------------------------------------------------------------------


def cmd_format_info(args):
    fmt = _fmt(args, "toy")
    mode = _mode(args)
    rows = [
        ("system", str(fmt), None),
        ("subnormals", fmt.subnormals, None),
        ("guard_digit", fmt.guard_digit, None),
        _exact_row("machine_epsilon", fpsys.machine_epsilon(fmt)),
        _exact_row("unit_roundoff", fmt.unit_roundoff(mode)),
        _exact_row("x_min", fmt.x_min),
        _exact_row("x_max", fmt.x_max),
        _exact_row("subnormal_min", fmt.subnormal_min),
        ("normal_count", fpsys.count_normals(fmt), None),
        ("subnormal_count", fpsys.count_subnormals(fmt), None),
    ]
    return _report("format info", ["quantity", "exact", "value"], rows, {"format": str(fmt)})


def cmd_format_enumerate(args):
    fmt = _fmt(args, "toy")
    values = fpsys.enumerate_values(
        fmt,
        include_subnormals=args.subnormals,
        positive_only=args.positive,
        include_zero=args.zero,
        cap=args.cap,
    )
    rows = [(i, v.to_fraction(), float(v), str(v)) for i, v in enumerate(values)]
    return _report("format enumerate", ["index", "exact", "value", "display"], rows, {"format": str(fmt)})


def cmd_round(args):
    fmt = _fmt(args)
    mode = _mode(args)
    v = fpsys.parse_value(args.value, fmt, mode)
    q = v.to_fraction() if v.is_finite() else None
    rows = [(args.value, str(v), q, float(v), v.kind.value)]
    return _report("round", ["input", "display", "exact", "value", "class"], rows, {"format": str(fmt), "mode": mode.value})


def cmd_ulp(args):
    fmt = _fmt(args)
    v = fpsys.parse_value(args.value, fmt, _mode(args))
    return _report("ulp", ["ulp"], [(fpsys.ulp(v, fmt),)], {"format": str(fmt), "value": str(v)})


def cmd_encode(args):
    bits = ieee754.encode(args.value, args.width, _mode(args))
    if args.hex:
        return _report("encode", ["hex"], [(bits.hex(),)])
    return _report("encode", ["bits"], [(str(bits),)], {"width": args.width})


def cmd_decode(args):
    try:
        bits = ieee754.BitPattern.parse(args.bits, args.width)
    except (ValueError, FplabError) as e:
        raise UsageError(f"bits: {e}") from None
    v = ieee754.decode(bits)
    q = v.to_fraction() if v.is_finite() else None
    rows = [(str(bits), v.kind.value, str(v), q, float(v))]
    return _report("decode", ["bits", "class", "display", "exact", "value"], rows)


def _u_arg(args):
    if args.u is not None:
        return exact(args.u)
    return fpsys.BINARY64.unit_roundoff()


def cmd_bound(args):
    u = _u_arg(args)
    kind = args.kind
    if kind == "gamma":
        value = errbounds.gamma(args.n, u)
        return _report("bound gamma", ["gamma"], [(float(value),)], {"n": args.n, "u": u})
    if kind == "prod":
        b = errbounds.prod_bound(args.n, u)
        return _report("bound prod", ["bound"], [(float(b.value),)], {"n": args.n, "u": u})
    if kind == "sum":
        xs = _num_list(args.values or "")
        b = errbounds.sum_bound(xs, u, args.variant)
        return _report("bound sum", ["bound"], [(float(b.value),)], {"n": len(xs), "variant": args.variant})
    if kind == "inner":
        x, y = _num_list(args.x or ""), _num_list(args.y or "")
        b = errbounds.inner_bound(x, y, u, args.blocks)
        return _report("bound inner", ["bound"], [(float(b.value),)], {"n": len(x), "blocks": args.blocks})
    if kind == "matvec":
        A = linalg.read_matrix(_read_text(_need(args, "matrix")))
        x = linalg.read_vector(_read_text(_need(args, "vector")))
        b = errbounds.matvec_bound(A, x, u, args.norm)
        if isinstance(b.value, list):
            return _report("bound matvec", ["i", "bound"], [(i, float(v)) for i, v in enumerate(b.value)])
        return _report("bound matvec", ["bound"], [(float(b.value),)])
    if kind == "posterior":
        A = linalg.read_matrix(_read_text(_need(args, "matrix")))
        rhs = linalg.read_vector(_read_text(_need(args, "rhs")))
        xhat = linalg.read_vector(_read_text(_need(args, "solution")))
        value = errbounds.posterior_bound(A, rhs, xhat, args.norm if args.norm != "componentwise" else "inf")
        return _report("bound posterior", ["bound"], [(float(value),)])
    raise UsageError(f"unknown bound {kind!r}")


def _need(args, name):
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"--{name} is required")
    return value


def _cond_value(v):
    return v if isinstance(v, Fraction) else float(v)


def cmd_cond(args):
    kind = args.kind
    if kind == "scalar":
        r = conditioning.cond_scalar(exact(_need(args, "f")), exact(_need(args, "df")), exact(_need(args, "x")))
        return _report("cond scalar", ["cond", "case"], [(float(r.value), r.case)])
    if kind == "matrix":
        A = linalg.read_matrix(_read_text(_need(args, "matrix")))
        r = conditioning.cond_matrix(A, args.norm)
        return _report("cond matrix", ["cond"], [(float(r.value),)], {"norm": args.norm})
    if kind == "hilbert":
        rows = []
        for n in _int_list(args.n):
            r = conditioning.cond_matrix(conditioning.hilbert(n), args.norm)
            rows.append((n, float(r.value)))
        return _report("cond hilbert", ["n", "cond"], rows, {"norm": args.norm})
    if kind == "vandermonde":
        rows = []
        nodes = conditioning.harmonic_nodes if args.nodes == "harmonic" else conditioning.equispaced_nodes
        for n in _int_list(args.n):
            V = conditioning.vandermonde(nodes(n), args.orientation)
            rows.append((n, float(conditioning.cond_matrix(V, args.norm).value)))
        return _report("cond vandermonde", ["n", "cond"], rows, {"norm": args.norm, "nodes": args.nodes, "orientation": args.orientation})
    if kind == "root":
        coeffs = _num_list(_need(args, "coeffs"))
        floats = [float(c) for c in coeffs]
        roots = [complex(exact(args.root))] if args.root is not None else conditioning.poly_roots(coeffs)
        rows = []
        for r in roots:
            try:
                c = conditioning.poly_root_cond(floats, r.real if r.imag == 0 else r)
            except FplabError as e:
                c = str(e)
            rows.append((r.real, r.imag, c))
        return _report("cond root", ["real", "imag", "cond"], rows)
    raise UsageError(f"unknown condition kind {kind!r}")


def _int_list(text):
    try:
        return [int(t) for t in str(text).replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"expected integers, got {text!r}") from None


def cmd_solve(args):
    A = linalg.read_matrix(_read_text(args.matrix))
    b = linalg.read_vector(_read_text(args.rhs))
    if args.backend == "simulated":
        backend = linalg.Simulated(_fmt(args), _mode(args))
    else:
        backend = args.backend
    tally = FlopTally()
    x = linalg.gauss_solve(A, b, args.pivoting, backend, tally)
    rows = [(i, v.to_fraction() if isinstance(v, FpValue) else v) for i, v in enumerate(x)]
    notes = [f"flops={tally.flops} space_units={tally.space_units}"]
    return _report("solve", ["i", "x"], rows, {"backend": args.backend, "pivoting": args.pivoting}, notes=notes)


def cmd_experiment(args):
    name = args.name
    params = {}
    if name == "pi":
        params = {"K": args.k, "formula": args.formula, "check": args.check}
    elif name == "hilbert":
        params = {"n": args.n if args.n is not None else 11, "backend": args.backend}
    elif name == "wilkinson":
        params = {"perturbation": args.perturbation, "index": args.index}
    elif name == "quadratic" and args.a:
        params = {"a_values": [float(v) for v in _num_list(args.a)]}
    return experiments.run(name, **params)


def cmd_complexity(args):
    kinds = [args.kind] if args.kind else list(linalg.COMPLEXITY_KINDS)
    rows = [(k, args.n, linalg.complexity_report(k, args.n)) for k in kinds]
    return _report("complexity", ["kind", "n", "value"], rows)


# -- parser -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fplab", description="Floating-point laboratory", allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(subparsers, name, func, help_text, fmt=False, mode=True):
        p = subparsers.add_parser(name, help=help_text, allow_abbrev=False)
        _add_output(p)
        if fmt:
            _add_fmt(p, with_mode=mode)
        p.set_defaults(func=func)
        return p

    fmt_cmd = sub.add_parser("format", help="inspect a floating-point system", allow_abbrev=False)
    fmt_sub = fmt_cmd.add_subparsers(dest="action", required=True, parser_class=_Parser)
    leaf(fmt_sub, "info", cmd_format_info, "parameters and extremes", fmt=True)
    p = leaf(fmt_sub, "enumerate", cmd_format_enumerate, "list the members", fmt=True, mode=False)
    p.add_argument("--subnormals", action="store_true", default=False, help="include nonzero subnormals")
    p.add_argument("--positive", action="store_true", help="positive members only")
    p.add_argument("--zero", action="store_true", help="include zero")
    p.add_argument("--cap", type=int, default=fpsys.DEFAULT_ENUMERATION_CAP)

    p = leaf(sub, "round", cmd_round, "round a number into a system", fmt=True)
    p.add_argument("value")
    p = leaf(sub, "ulp", cmd_ulp, "unit in the last place", fmt=True)
    p.add_argument("value")

    p = leaf(sub, "encode", cmd_encode, "IEEE 754 bit pattern of a number")
    p.add_argument("value")
    p.add_argument("--width", type=int, choices=(32, 64), default=64)
    p.add_argument("--mode", default="nearest_even")
    p.add_argument("--hex", action="store_true")
    p = leaf(sub, "decode", cmd_decode, "value of an IEEE 754 bit pattern")
    p.add_argument("bits")
    p.add_argument("--width", type=int, choices=(32, 64))

    p = leaf(sub, "bound", cmd_bound, "a-priori error bounds")
    p.add_argument("kind", choices=("gamma", "sum", "prod", "inner", "matvec", "posterior"))
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--u", help="unit roundoff (default binary64)")
    p.add_argument("--values", help="comma separated numbers")
    p.add_argument("--variant", choices=("uniform", "per_term"), default="uniform")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--blocks", type=int, default=1)
    p.add_argument("--matrix")
    p.add_argument("--vector")
    p.add_argument("--rhs")
    p.add_argument("--solution")
    p.add_argument("--norm", default="componentwise", choices=("componentwise", "1", "2", "inf"))

    p = leaf(sub, "cond", cmd_cond, "condition numbers")
    p.add_argument("kind", choices=("scalar", "matrix", "root", "hilbert", "vandermonde"))
    p.add_argument("--f")
    p.add_argument("--df")
    p.add_argument("--x")
    p.add_argument("--matrix")
    p.add_argument("--norm", default="inf", choices=("1", "2", "inf", "fro"))
    p.add_argument("--n", default="3,5,7,9,11,13")
    p.add_argument("--nodes", choices=("equispaced", "harmonic"), default="equispaced")
    p.add_argument("--orientation", choices=("nodes", "powers"), default="nodes")
    p.add_argument("--coeffs", help="coefficients, highest degree first")
    p.add_argument("--root")

    p = leaf(sub, "solve", cmd_solve, "Gaussian elimination", fmt=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--rhs", required=True)
    p.add_argument("--backend", choices=("rational", "binary64", "simulated"), default="binary64")
    p.add_argument("--pivoting", choices=("partial", "none"), default="partial")

    p = leaf(sub, "experiment", cmd_experiment, "run a named experiment")
    p.add_argument("name", choices=sorted(experiments.EXPERIMENTS))
    p.add_argument("--k", type=int, default=30)
    p.add_argument("--formula", choices=("unstable", "stable"), default="unstable")
    p.add_argument("--check", action="store_true", help="turn the pi shape checks into a verdict")
    p.add_argument("--n", type=int)
    p.add_argument("--backend", choices=("binary64", "rational"), default="binary64")
    p.add_argument("--perturbation", type=float, default=0.001)
    p.add_argument("--index", type=int, default=1)
    p.add_argument("--a", help="comma separated a values for the quadratic experiment")

    p = leaf(sub, "complexity", cmd_complexity, "closed-form operation counts")
    p.add_argument("--kind", choices=linalg.COMPLEXITY_KINDS)
    p.add_argument("--n", type=int, required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        report = args.func(args)
        text = render(report, args.out_format, args.precision)
    except UsageError as e:
        print(f"fplab: error: {e}", file=sys.stderr)
        return 2
    except (FplabError, ValueError, ZeroDivisionError, ArithmeticError) as e:
        print(f"fplab: error: {e}", file=sys.stderr)
        return 2
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 1 if report.verdict == "fail" else 0


if __name__ == "__main__":
    sys.exit(main())
