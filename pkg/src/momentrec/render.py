"""Text, LaTeX and factored renderings of polynomials, operators and recurrences."""

from __future__ import annotations

from fractions import Fraction
from typing import TYPE_CHECKING

from .exact import Polynomial

if TYPE_CHECKING:
    from .operators import DOperator, ThetaOperator
    from .recurrence import Recurrence


def _wrap(s: str) -> str:
    return f"({s})" if (" + " in s or " - " in s) else s


def _scaled(coeff: Polynomial, mono: str, latex: bool = False) -> tuple[str, str]:
    """Sign and body of ``coeff * mono`` (mono may be empty)."""
    if coeff.degree == 0:
        c = coeff.leading
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if not mono:
            return sign, _frac(a, latex)
        if a == 1:
            return sign, mono
        return sign, f"{_frac(a, latex)}{' ' if latex else '*'}{mono}"
    body = latex_poly(coeff) if latex else coeff.to_str()
    sign = "+"
    if coeff.leading < 0 and len([c for c in coeff.coeffs if c]) == 1:
        sign, body = "-", (latex_poly(-coeff) if latex else (-coeff).to_str())
    if not mono:
        if coeff.leading < 0 and sign == "+":
            return "-", _wrap(latex_poly(-coeff) if latex else (-coeff).to_str())
        return sign, body
    return sign, f"{_wrap(body)}{' ' if latex else '*'}{mono}"


def _frac(c: Fraction, latex: bool) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return rf"\frac{{{c.numerator}}}{{{c.denominator}}}" if latex else f"{c.numerator}/{c.denominator}"


def _join(parts: list[tuple[str, str]]) -> str:
    if not parts:
        return "0"
    sign, body = parts[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def latex_poly(p: Polynomial, var: str | None = None) -> str:
    v = var or p.var
    if v == "theta":
        v = r"\theta"
    s = p.to_str(v)
    s = s.replace("*", " ")
    return _brace_powers(s)


def _brace_powers(s: str) -> str:
    out, i = [], 0
    while i < len(s):
        if s[i] == "^":
            j = i + 1
            while j < len(s) and s[j].isdigit():
                j += 1
            out.append("^{" + s[i + 1 : j] + "}")
            i = j
        else:
            out.append(s[i])
            i += 1
    return "".join(out)


def _power(v: str, e: int) -> str:
    if e == 0:
        return ""
    return v if e == 1 else f"{v}^{e}"


def render_theta_operator(op: "ThetaOperator", latex: bool = False) -> str:
    """``sum_j t^j Q_j(theta)``, descending theta-order inside each t-block."""
    parts = []
    v = op.var
    for j, q in op.terms.items():
        mono = _power(v, j)
        if latex:
            mono = _brace_powers(mono)
        if q.degree == 0 or len([c for c in q.coeffs if c]) == 1:
            m = q.degree
            coeff = Polynomial([q.leading], "theta")
            th = _power(r"\theta" if latex else "theta", m)
            th = _brace_powers(th) if latex else th
            body = " ".join(x for x in (mono, th) if x) if latex else "*".join(x for x in (mono, th) if x)
            parts.append(_scaled(coeff, body, latex))
        else:
            if q.rational_content() != 1 or q.leading < 0:
                c = q.rational_content() * (1 if q.leading > 0 else -1)
                inner = (q * (1 / c))
                inner_s = latex_poly(inner) if latex else inner.to_str()
                prefix = _frac(abs(c), latex)
                sep = " " if latex else "*"
                body = sep.join(x for x in ((prefix if abs(c) != 1 else ""), mono, f"({inner_s})") if x)
                parts.append(("-" if c < 0 else "+", body))
            else:
                inner_s = latex_poly(q) if latex else q.to_str()
                sep = " " if latex else "*"
                parts.append(("+", sep.join(x for x in (mono, f"({inner_s})") if x)))
    return _join(parts)


def render_d_operator(op: "DOperator", latex: bool = False) -> str:
    """Grouped by descending derivative order."""
    parts = []
    coeffs = op.coefficients()
    dname = "D"
    for j in range(len(coeffs) - 1, -1, -1):
        p = coeffs[j]
        if p.is_zero():
            continue
        mono = _power(dname, j)
        if latex:
            mono = _brace_powers(mono)
        parts.append(_scaled(p, mono, latex))
    return _join(parts)


# -- recurrences ---------------------------------------------------------

def _int_root_quotient(coeffs: list[int], r: int) -> list[int] | None:
    """Synthetic division of an integer polynomial by ``(x - r)``; None if not exact."""
    out = [0] * (len(coeffs) - 1)
    acc = 0
    for i in range(len(coeffs) - 1, 0, -1):
        acc = acc * r + coeffs[i]
        out[i - 1] = acc
    return out if acc * r + coeffs[0] == 0 else None


def linear_factors(p: Polynomial, bound: int = 64) -> tuple[Fraction, list[tuple[int, int]], Polynomial]:
    """Pull out factors ``(var + c)`` for integers ``|c| <= bound``.

    Returns ``(scalar, [(c, multiplicity)], rest)`` with ``rest`` integral and
    primitive with positive leading coefficient.
    """
    if p.is_zero():
        return Fraction(0), [], p
    prim = p.primitive()
    scalar = p.leading / prim.leading
    if prim.leading < 0:
        prim, scalar = -prim, -scalar
    coeffs = prim.int_coeffs()
    factors = []
    zeros = 0
    while len(coeffs) > 1 and coeffs[0] == 0:
        coeffs = coeffs[1:]
        zeros += 1
    if zeros:
        factors.append((0, zeros))
    for c in range(-bound, bound + 1):
        if len(coeffs) < 2:
            break
        # an integer root -c divides the constant term
        if c == 0 or coeffs[0] % c:
            continue
        mult = 0
        while len(coeffs) > 1:
            q = _int_root_quotient(coeffs, -c)
            if q is None:
                break
            coeffs = q
            mult += 1
        if mult:
            factors.append((c, mult))
    factors.sort(key=lambda f: f[0])
    return scalar, factors, Polynomial(coeffs, p.var)


def _lin_str(v: str, c: int) -> str:
    if c == 0:
        return v
    return f"{v}+{c}" if c > 0 else f"{v}-{-c}"


def factored_str(p: Polynomial, latex: bool = False) -> tuple[str, str]:
    """Sign and body of ``p`` with linear factors extracted."""
    scalar, factors, rest = linear_factors(p)
    sign = "-" if scalar < 0 else "+"
    pieces = []
    a = abs(scalar)
    if a != 1 or (not factors and rest.degree <= 0):
        pieces.append(_frac(a, latex))
    for c, m in factors:
        lin = _lin_str(p.var, c)
        if m == 1 and c == 0:
            pieces.append(lin)
        else:
            e = "" if m == 1 else (f"^{{{m}}}" if latex else f"^{m}")
            pieces.append(f"({lin}){e}")
    if rest.degree >= 1:
        pieces.append(f"({latex_poly(rest) if latex else rest.to_str()})")
    return sign, (" " if latex else "*").join(pieces)


def render_recurrence(r: "Recurrence", style: str = "text", factored: bool = True, sign: int | None = None) -> str:
    """Render ``sum_j p_j(k) u(k+j) = 0``.

    The whole relation is flipped so the lowest-offset coefficient has a
    positive leading coefficient unless ``sign`` is given.
    """
    latex = style == "latex"
    if sign is None:
        sign = 1 if r.terms[0][1].leading > 0 else -1
    parts = []
    for j, p in r.terms:
        p = p * sign
        if factored:
            s, body = factored_str(p, latex)
        else:
            s, body = _scaled(p, "", latex) if p.degree == 0 else ("+", _wrap(latex_poly(p) if latex else p.to_str()))
        term = _term_name(r, j, latex)
        if body == "1":
            full = term
        else:
            full = f"{body}\\,{term}" if latex else f"{body}·{term}"
        parts.append((s, full))
    return _join(parts) + " = 0"


def _term_name(r: "Recurrence", j: int, latex: bool) -> str:
    idx = _lin_str(r.variable, j) if j else r.variable
    if latex:
        if r.n is not None:
            return f"{r.sequence}_{{{r.n},{idx}}}"
        return f"{r.sequence}_{{{idx}}}"
    if r.n is not None:
        return f"{r.sequence}({r.n},{idx})"
    return f"{r.sequence}({idx})"
