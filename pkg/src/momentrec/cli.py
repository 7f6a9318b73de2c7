"""Command-line front end.

Exit codes: 0 success, 2 usage or parse error, 3 domain error or failed
verification.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from importlib import metadata

from .errors import DomainError, UsageError
from .operators import ThetaOperator, operator_from_json, operator_to_json, theta_to_d
from .recurrence import (
    Recurrence,
    VTerm,
    box_recurrence,
    format_v_combination,
    mellin_recurrence,
    rec_c,
    rec_C,
    reduce_V,
)
from .render import render_d_operator, render_recurrence, render_theta_operator
from .sympower import K0_OPERATOR, symmetric_power

N_MAX = 200
PRECISION_ENV = "MOMENTREC_PRECISION_DEFAULT"
VERIFY_THRESHOLD = 1e-15


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _default_digits() -> int:
    raw = os.environ.get(PRECISION_ENV, "30")
    try:
        d = int(raw)
    except ValueError:
        raise UsageError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from None
    if d < 5:
        raise UsageError(f"{PRECISION_ENV} must be at least 5")
    return d


def _check_n(n: int) -> int:
    if not 1 <= n <= N_MAX:
        raise UsageError(f"n must satisfy 1 <= n <= {N_MAX}, got {n}")
    return n


def _render_rec(r: Recurrence, fmt: str) -> str:
    if fmt == "json":
        return r.to_json()
    sign = None
    if r.sequence == "c" and r.n is not None:
        # raw extraction sign: the offset-0 coefficient is (-1-k)^(n+1)
        c0 = r.coefficient(0).leading
        sign = (-1) ** (r.n + 1) * (1 if c0 > 0 else -1)
    return render_recurrence(r, "latex" if fmt == "latex" else "text", sign=sign)


def _render_op(op, fmt: str) -> str:
    if fmt == "json":
        return operator_to_json(op)
    latex = fmt == "latex"
    if isinstance(op, ThetaOperator):
        return render_theta_operator(op, latex)
    return render_d_operator(op, latex)


# -- commands ----------------------------------------------------------------

def cmd_rec(args) -> int:
    build = rec_c if args.seq == "c" else rec_C
    if args.all_n is not None:
        ns = range(1, _check_n(args.all_n) + 1)
    elif args.n is not None:
        ns = [_check_n(args.n)]
    else:
        raise UsageError("rec needs --n or --all-n")
    start = time.perf_counter()
    recs = []
    for n in ns:
        recs.append(build(n))
        if args.time_budget is not None and time.perf_counter() - start > args.time_budget:
            raise DomainError(f"time budget of {args.time_budget}s exceeded at n={n}")
    if args.format == "json" and len(recs) > 1:
        print(json.dumps([r.to_json_obj() for r in recs], indent=2))
    else:
        for r in recs:
            print(_render_rec(r, args.format))
    return 0


def cmd_annihilator(args) -> int:
    n = _check_n(args.n)
    L = symmetric_power(K0_OPERATOR, n).annihilator
    op = L if args.form == "theta" else theta_to_d(L)
    print(_render_op(op, args.format))
    return 0


def cmd_mellin(args) -> int:
    try:
        with open(args.operator_file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.operator_file}: {exc}") from exc
    op = operator_from_json(text)
    if op.is_zero():
        raise UsageError("operator is zero")
    r = mellin_recurrence(op, args.seq, "k")
    print(_render_rec(r, args.format))
    return 0


def cmd_box(args) -> int:
    r = box_recurrence(args.kind, _check_n(args.n))
    print(_render_rec(r, args.format))
    return 0


def cmd_verify(args) -> int:
    from .numeric import bessel_moment_table, check_recurrence, moment_table_C

    n = _check_n(args.n)
    if args.kmax < 0:
        raise UsageError("--kmax must be nonnegative")
    P = args.digits
    ks = tuple(range(args.kmax + 1))
    reports = []
    if args.seq in ("c", "both"):
        table = bessel_moment_table((n,), ks, P)
        reports.append(check_recurrence(rec_c(n), {k: table[(n, k)] for k in ks}, P))
    if args.seq in ("C", "both"):
        table = moment_table_C((n,), ks, P)
        reports.append(check_recurrence(rec_C(n), {k: table[(n, k)] for k in ks}, P))
    ok = all(float(r["max_relative_residual"]) < args.threshold for r in reports)
    out = reports[0] if len(reports) == 1 else reports
    if args.format == "json":
        print(json.dumps(out, indent=2))
    else:
        for r in reports:
            status = "ok" if float(r["max_relative_residual"]) < args.threshold else "FAIL"
            print(f"{r['target']}: max relative residual {r['max_relative_residual']} over k=0..{args.kmax} at P={P}: {status}")
    return 0 if ok else 3


def cmd_reduce_v(args) -> int:
    v = VTerm(args.n, args.a, args.b)
    terms = reduce_V(v)
    numeric = None
    if args.check:
        from mpmath import mp, mpf, nstr

        from .numeric import vacuum_table

        keys = (v.key(),) + tuple(t.key() for t in terms)
        table = vacuum_table(keys, args.digits)
        with mp.workdps(args.digits + 10):
            lhs = table[v.key()]
            rhs = sum((mpf(t.coeff.numerator) / t.coeff.denominator * table[t.key()] for t in terms), mpf(0))
            rel = abs(lhs - rhs) / abs(lhs) if lhs else abs(rhs)
            numeric = {"lhs": nstr(lhs, args.digits), "rhs": nstr(rhs, args.digits), "relative_diff": nstr(rel, 3)}
            ok = rel < mpf(10) ** (5 - args.digits)
    if args.format == "json":
        obj = {
            "target": {"n": v.n, "a": v.a, "b": v.b},
            "terms": [{"n": t.n, "a": t.a, "b": t.b, "coeff": str(Fraction(t.coeff))} for t in terms],
        }
        if numeric is not None:
            obj["numeric"] = numeric
        print(json.dumps(obj, indent=2))
    else:
        print(format_v_combination(v, terms))
        if numeric is not None:
            print(f"numeric: lhs {numeric['lhs']}, rhs {numeric['rhs']}, relative difference {numeric['relative_diff']}")
    if numeric is not None and not ok:
        return 3
    return 0


# -- parser ------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    # accepted both before and after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=("text", "latex", "json"), default=argparse.SUPPRESS)
    p.add_argument("--digits", type=int, default=argparse.SUPPRESS, help="working precision in decimal digits")
    return p


def build_parser(default_digits: int = 30) -> argparse.ArgumentParser:
    # the main parser owns its own copies so set_defaults does not leak into subcommands
    parser = argparse.ArgumentParser(
        prog="momentrec",
        description="Recurrences for Bessel moments and box integrals.",
        parents=[_common()],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    parser.set_defaults(format="text", digits=default_digits)
    common = _common()
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rec", parents=[common], help="recurrence for c(n,k) or C(n,k)")
    p.add_argument("--seq", choices=("c", "C"), default="C")
    p.add_argument("--n", type=int)
    p.add_argument("--all-n", type=int, metavar="N", help="derive for every n = 1..N")
    p.add_argument("--time-budget", type=float, metavar="SECONDS")
    p.set_defaults(func=cmd_rec)

    p = sub.add_parser("annihilator", parents=[common], help="operator annihilating K0^n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--form", choices=("theta", "d"), default="theta")
    p.set_defaults(func=cmd_annihilator)

    p = sub.add_parser("mellin", parents=[common], help="moment recurrence of an operator read from JSON")
    p.add_argument("operator_file")
    p.add_argument("--seq", default="I", help="name of the moment sequence")
    p.set_defaults(func=cmd_mellin)

    p = sub.add_parser("box", parents=[common], help="difference equation for a box integral")
    p.add_argument("--kind", choices=("B", "Delta"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_box)

    p = sub.add_parser("verify", parents=[common], help="check a moment recurrence against quadrature")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kmax", type=int, default=10)
    p.add_argument("--seq", choices=("c", "C", "both"), default="c")
    p.add_argument("--threshold", type=float, default=VERIFY_THRESHOLD)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reduce-v", parents=[common], help="reduce a vacuum-diagram integral V(n,a,b)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--check", action="store_true", help="confirm numerically at --digits")
    p.set_defaults(func=cmd_reduce_v)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        parser = build_parser(_default_digits())
    except UsageError as exc:
        print(f"momentrec: error: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    try:
        if args.digits < 5 or args.digits > 1000:
            raise UsageError("--digits must be between 5 and 1000")
        return args.func(args)
    except UsageError as exc:
        print(f"momentrec: error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"momentrec: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
