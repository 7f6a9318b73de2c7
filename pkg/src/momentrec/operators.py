"""Linear differential operators with polynomial coefficients.

Two derivations are supported: ``theta = t d/dt`` (:class:`ThetaOperator`)
and ``D = d/dt`` (:class:`DOperator`). Both are kept in normal form with the
derivation powers on the right of the powers of ``t``.
"""

from __future__ import annotations

import json
from fractions import Fraction
from math import comb
from typing import Any, Iterable, Mapping, Union

from .errors import UsageError
from .exact import Polynomial, Scalar, as_fraction, falling_factorial

THETA = "theta"


def _parse_coeff(s: Any) -> Fraction:
    if isinstance(s, bool):
        raise UsageError(f"bad coefficient {s!r}")
    if isinstance(s, (int, str)):
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"bad coefficient {s!r}") from exc
    raise UsageError(f"bad coefficient {s!r}")


def fraction_str(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


class ThetaOperator:
    """``sum_j t^j Q_j(theta)``, stored as ``{j: Q_j}`` with ``Q_j`` nonzero."""

    kind = "theta"
    __slots__ = ("terms", "var")

    def __init__(self, terms: Mapping[int, Polynomial] | None = None, var: str = "t"):
        clean: dict[int, Polynomial] = {}
        for j, q in (terms or {}).items():
            if j < 0:
                raise UsageError("negative power of t in operator")
            if not isinstance(q, Polynomial):
                q = Polynomial.constant(q, THETA)
            elif q.var != THETA:
                q = q.with_var(THETA)
            if not q.is_zero():
                clean[j] = q
        self.terms = dict(sorted(clean.items()))
        self.var = var

    # -- constructors --------------------------------------------------
    @classmethod
    def theta(cls, var: str = "t") -> "ThetaOperator":
        return cls({0: Polynomial([0, 1], THETA)}, var)

    @classmethod
    def identity(cls, var: str = "t") -> "ThetaOperator":
        return cls({0: Polynomial([1], THETA)}, var)

    @classmethod
    def from_t_poly(cls, p: Polynomial, var: str = "t") -> "ThetaOperator":
        """Multiplication by the polynomial ``p(t)``."""
        return cls({i: Polynomial([c], THETA) for i, c in enumerate(p.coeffs) if c}, var)

    @classmethod
    def from_dict(cls, d: Mapping[tuple[int, int], Scalar], var: str = "t") -> "ThetaOperator":
        """Build from ``{(t_power, theta_power): coeff}``."""
        acc: dict[int, list[Fraction]] = {}
        for (i, j), c in d.items():
            row = acc.setdefault(i, [])
            row.extend([Fraction(0)] * (j + 1 - len(row)))
            row[j] += as_fraction(c)
        return cls({i: Polynomial(row, THETA) for i, row in acc.items()}, var)

    # -- queries -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def order(self) -> int:
        return max((q.degree for q in self.terms.values()), default=-1)

    def t_degree(self) -> int:
        return max(self.terms, default=-1)

    def coefficient(self, j: int) -> Polynomial:
        """The theta-polynomial ``Q_j`` multiplying ``t^j``."""
        return self.terms.get(j, Polynomial([], THETA))

    def theta_coefficient(self, m: int) -> Polynomial:
        """The t-polynomial multiplying ``theta^m``."""
        return Polynomial([self.terms[j][m] if j in self.terms else 0 for j in range(self.t_degree() + 1)], self.var)

    def as_dict(self) -> dict[tuple[int, int], Fraction]:
        return {(j, m): c for j, q in self.terms.items() for m, c in enumerate(q.coeffs) if c}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ThetaOperator):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(tuple(self.terms.items()))

    def __repr__(self) -> str:
        return f"ThetaOperator({self.to_str()})"

    def to_str(self) -> str:
        from .render import render_theta_operator

        return render_theta_operator(self)

    # -- arithmetic ----------------------------------------------------
    def _check(self, other) -> "ThetaOperator":
        if isinstance(other, ThetaOperator):
            return other
        if isinstance(other, DOperator):
            raise UsageError("cannot combine a theta-operator with a D-operator")
        if isinstance(other, (int, Fraction)):
            return ThetaOperator({0: Polynomial([other], THETA)}, self.var)
        if isinstance(other, Polynomial):
            return ThetaOperator.from_t_poly(other, self.var)
        raise TypeError(type(other).__name__)

    def __add__(self, other) -> "ThetaOperator":
        o = self._check(other)
        terms = dict(self.terms)
        for j, q in o.terms.items():
            terms[j] = terms[j] + q if j in terms else q
        return ThetaOperator(terms, self.var)

    __radd__ = __add__

    def __neg__(self) -> "ThetaOperator":
        return ThetaOperator({j: -q for j, q in self.terms.items()}, self.var)

    def __sub__(self, other) -> "ThetaOperator":
        return self + (-self._check(other))

    def __rsub__(self, other) -> "ThetaOperator":
        return (-self) + other

    def __mul__(self, other) -> "ThetaOperator":
        """Composition ``self o other``."""
        if isinstance(other, (int, Fraction)):
            return ThetaOperator({j: q * other for j, q in self.terms.items()}, self.var)
        o = self._check(other)
        out: dict[int, Polynomial] = {}
        for a, p in self.terms.items():
            for c, q in o.terms.items():
                # theta^b o t^c = t^c (theta + c)^b
                term = p.shift(c) * q
                out[a + c] = out[a + c] + term if (a + c) in out else term
        return ThetaOperator(out, self.var)

    def __rmul__(self, other) -> "ThetaOperator":
        return self._check(other) * self

    def __pow__(self, e: int) -> "ThetaOperator":
        out = ThetaOperator.identity(self.var)
        for _ in range(e):
            out = out * self
        return out

    def t_shift(self, rho: int) -> "ThetaOperator":
        """Left multiplication by ``t^rho``."""
        return ThetaOperator({j + rho: q for j, q in self.terms.items()}, self.var)

    # -- action on polynomials -----------------------------------------
    def apply_monomial(self, m: int) -> Polynomial:
        """The polynomial ``self(t^m)``."""
        coeffs: dict[int, Fraction] = {}
        for j, q in self.terms.items():
            coeffs[j + m] = coeffs.get(j + m, Fraction(0)) + q(Fraction(m))
        deg = max(coeffs, default=-1)
        return Polynomial([coeffs.get(i, 0) for i in range(deg + 1)], self.var)

    def apply(self, p: Polynomial) -> Polynomial:
        out = Polynomial([], self.var)
        for m, c in enumerate(p.coeffs):
            if c:
                out = out + self.apply_monomial(m) * c
        return out

    # -- serialization -------------------------------------------------
    def to_json_obj(self) -> dict:
        return {
            "kind": self.kind,
            "variable": self.var,
            "terms": [{"t": i, "order": j, "coeff": fraction_str(c)} for (i, j), c in sorted(self.as_dict().items())],
        }


class DOperator:
    """``sum d_{i,j} t^i D^j`` stored as ``{(i, j): d_{i,j}}``."""

    kind = "d"
    __slots__ = ("terms", "var")

    def __init__(self, terms: Mapping[tuple[int, int], Scalar] | None = None, var: str = "t"):
        clean = {}
        for (i, j), c in (terms or {}).items():
            if i < 0 or j < 0:
                raise UsageError("negative exponent in operator")
            c = as_fraction(c)
            if c:
                clean[(i, j)] = c
        self.terms = dict(sorted(clean.items()))
        self.var = var

    @classmethod
    def D(cls, var: str = "t") -> "DOperator":
        return cls({(0, 1): 1}, var)

    @classmethod
    def identity(cls, var: str = "t") -> "DOperator":
        return cls({(0, 0): 1}, var)

    @classmethod
    def from_coefficients(cls, polys: Iterable[Polynomial], var: str = "t") -> "DOperator":
        """``sum_j polys[j](t) D^j``."""
        terms = {}
        for j, p in enumerate(polys):
            for i, c in enumerate(p.coeffs):
                if c:
                    terms[(i, j)] = c
        return cls(terms, var)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def order(self) -> int:
        return max((j for _, j in self.terms), default=-1)

    def coefficients(self) -> list[Polynomial]:
        """Polynomial coefficient of each ``D^j``, ``j = 0..order``."""
        r = self.order
        rows: list[list[Fraction]] = [[] for _ in range(r + 1)]
        for (i, j), c in self.terms.items():
            row = rows[j]
            row.extend([Fraction(0)] * (i + 1 - len(row)))
            row[i] = c
        return [Polynomial(row, self.var) for row in rows]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DOperator):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(tuple(self.terms.items()))

    def __repr__(self) -> str:
        return f"DOperator({self.to_str()})"

    def to_str(self) -> str:
        from .render import render_d_operator

        return render_d_operator(self)

    def _check(self, other) -> "DOperator":
        if isinstance(other, DOperator):
            return other
        if isinstance(other, ThetaOperator):
            raise UsageError("cannot combine a D-operator with a theta-operator")
        if isinstance(other, (int, Fraction)):
            return DOperator({(0, 0): other}, self.var)
        if isinstance(other, Polynomial):
            return DOperator({(i, 0): c for i, c in enumerate(other.coeffs)}, self.var)
        raise TypeError(type(other).__name__)

    def __add__(self, other) -> "DOperator":
        o = self._check(other)
        terms = dict(self.terms)
        for k, c in o.terms.items():
            terms[k] = terms.get(k, 0) + c
        return DOperator(terms, self.var)

    __radd__ = __add__

    def __neg__(self) -> "DOperator":
        return DOperator({k: -c for k, c in self.terms.items()}, self.var)

    def __sub__(self, other) -> "DOperator":
        return self + (-self._check(other))

    def __rsub__(self, other) -> "DOperator":
        return (-self) + other

    def __mul__(self, other) -> "DOperator":
        if isinstance(other, (int, Fraction)):
            return DOperator({k: c * other for k, c in self.terms.items()}, self.var)
        o = self._check(other)
        out: dict[tuple[int, int], Fraction] = {}
        for (a, b), x in self.terms.items():
            for (c, e), y in o.terms.items():
                # D^b t^c = sum_l C(b,l) c(c-1)..(c-l+1) t^(c-l) D^(b-l)
                ff = 1
                for l in range(min(b, c) + 1):
                    key = (a + c - l, b - l + e)
                    out[key] = out.get(key, 0) + x * y * comb(b, l) * ff
                    ff *= c - l
        return DOperator(out, self.var)

    def __rmul__(self, other) -> "DOperator":
        return self._check(other) * self

    def t_shift(self, rho: int) -> "DOperator":
        return DOperator({(i + rho, j): c for (i, j), c in self.terms.items()}, self.var)

    def apply_monomial(self, m: int) -> Polynomial:
        coeffs: dict[int, Fraction] = {}
        for (i, j), c in self.terms.items():
            if j > m:
                continue
            ff = 1
            for l in range(j):
                ff *= m - l
            coeffs[i + m - j] = coeffs.get(i + m - j, Fraction(0)) + c * ff
        deg = max(coeffs, default=-1)
        return Polynomial([coeffs.get(i, 0) for i in range(deg + 1)], self.var)

    def apply(self, p: Polynomial) -> Polynomial:
        out = Polynomial([], self.var)
        for m, c in enumerate(p.coeffs):
            if c:
                out = out + self.apply_monomial(m) * c
        return out

    def to_json_obj(self) -> dict:
        return {
            "kind": self.kind,
            "variable": self.var,
            "terms": [{"t": i, "order": j, "coeff": fraction_str(c)} for (i, j), c in self.terms.items()],
        }


Operator = Union[ThetaOperator, DOperator]


def op_mul(a, b):
    if type(a) is not type(b):
        raise UsageError("operator kinds differ")
    return a * b


def op_apply_monomial(a, m: int) -> Polynomial:
    return a.apply_monomial(m)


def d_to_theta(a: DOperator) -> tuple[int, ThetaOperator]:
    """Rewrite ``t^rho * a`` in theta, with the least ``rho`` keeping t-powers nonnegative."""
    rho = max((j - i for (i, j) in a.terms), default=0)
    rho = max(rho, 0)
    theta = Polynomial([0, 1], THETA)
    acc: dict[int, Polynomial] = {}
    for (i, j), c in a.terms.items():
        # t^j D^j = theta (theta - 1) ... (theta - j + 1)
        p = falling_factorial(theta, j) * c
        tp = i + rho - j
        acc[tp] = acc[tp] + p if tp in acc else p
    return rho, ThetaOperator(acc, a.var)


def stirling2_row(m: int) -> list[int]:
    row = [1]
    for n in range(1, m + 1):
        new = [0] * (n + 1)
        for k in range(1, n + 1):
            new[k] = k * (row[k] if k < len(row) else 0) + row[k - 1]
        row = new
    return row


def theta_to_d(b: ThetaOperator) -> DOperator:
    """Expand ``theta^m = sum_j S(m, j) t^j D^j``."""
    terms: dict[tuple[int, int], Fraction] = {}
    for a, q in b.terms.items():
        for m, c in enumerate(q.coeffs):
            if not c:
                continue
            for j, s in enumerate(stirling2_row(m)):
                if s:
                    terms[(a + j, j)] = terms.get((a + j, j), 0) + c * s
    return DOperator(terms, b.var)


def operator_from_json(obj: Any):
    """Parse operator JSON (dict or string)."""
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise UsageError(f"operator JSON does not parse: {exc}") from exc
    if not isinstance(obj, dict):
        raise UsageError("operator JSON must be an object")
    kind = obj.get("kind")
    var = obj.get("variable", "t")
    if not isinstance(var, str):
        raise UsageError("variable must be a string")
    terms = obj.get("terms")
    if kind not in ("theta", "d") or not isinstance(terms, list):
        raise UsageError("operator JSON needs kind in {theta, d} and a terms list")
    acc: dict[tuple[int, int], Fraction] = {}
    for term in terms:
        if not isinstance(term, dict):
            raise UsageError("each term must be an object")
        try:
            i, j = term["t"], term["order"]
        except KeyError as exc:
            raise UsageError(f"term missing field {exc}") from exc
        if not (isinstance(i, int) and isinstance(j, int)) or isinstance(i, bool) or i < 0 or j < 0:
            raise UsageError(f"bad exponents in term {term!r}")
        acc[(i, j)] = acc.get((i, j), 0) + _parse_coeff(term.get("coeff", "1"))
    if kind == "theta":
        return ThetaOperator.from_dict(acc, var)
    return DOperator(acc, var)


def operator_to_json(op) -> str:
    return json.dumps(op.to_json_obj(), indent=2)
