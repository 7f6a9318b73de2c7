"""Exact coefficient layer: univariate polynomials and rational functions over Q.

Scalars are :class:`fractions.Fraction`. Polynomials are dense, immutable and
indexed by ascending degree.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence, Union

from .errors import UsageError

Scalar = Union[int, Fraction]

#: degree reported for the zero polynomial
ZERO_DEGREE = -1


def as_fraction(x: Scalar | str) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


def _trim(coeffs: list[Fraction]) -> tuple[Fraction, ...]:
    n = len(coeffs)
    while n and coeffs[n - 1] == 0:
        n -= 1
    return tuple(coeffs[:n])


class Polynomial:
    """Dense univariate polynomial with rational coefficients."""

    __slots__ = ("coeffs", "var", "_hash")

    def __init__(self, coeffs: Iterable[Scalar] = (), var: str = "t"):
        self.coeffs: tuple[Fraction, ...] = _trim([as_fraction(c) for c in coeffs])
        self.var = var
        self._hash = None

    @classmethod
    def _raw(cls, coeffs: list[Fraction], var: str) -> "Polynomial":
        # coefficients already Fractions
        p = object.__new__(cls)
        p.coeffs = _trim(coeffs)
        p.var = var
        p._hash = None
        return p

    @classmethod
    def constant(cls, c: Scalar, var: str = "t") -> "Polynomial":
        return cls([c], var)

    @classmethod
    def monomial(cls, degree: int, c: Scalar = 1, var: str = "t") -> "Polynomial":
        return cls([0] * degree + [c], var)

    @classmethod
    def x(cls, var: str = "t") -> "Polynomial":
        return cls([0, 1], var)

    @classmethod
    def linear(cls, root_shift: Scalar, var: str = "t") -> "Polynomial":
        """The polynomial ``var + root_shift``."""
        return cls([root_shift, 1], var)

    # -- basic queries -------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if self.coeffs else ZERO_DEGREE

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __getitem__(self, i: int) -> Fraction:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return Fraction(0)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Polynomial):
            if not self.coeffs and not other.coeffs:
                return True
            return self.var == other.var and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == _trim([as_fraction(other)])
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.var, self.coeffs))
        return self._hash

    def __repr__(self) -> str:
        return f"Polynomial({self.to_str()!r})"

    def to_str(self, var: str | None = None) -> str:
        v = var or self.var
        if not self.coeffs:
            return "0"
        parts = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if i == 0:
                body = str(a)
            else:
                mono = v if i == 1 else f"{v}^{i}"
                body = mono if a == 1 else f"{a}*{mono}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    __str__ = to_str

    # -- arithmetic ----------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.var != self.var and other.degree > 0 and self.degree > 0:
                raise UsageError(f"variable mismatch: {self.var} vs {other.var}")
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial._raw([as_fraction(other)], self.var)
        raise TypeError(f"cannot combine Polynomial with {type(other).__name__}")

    def _var_with(self, other: "Polynomial") -> str:
        return self.var if self.degree > 0 or other.degree <= 0 else other.var

    def __add__(self, other) -> "Polynomial":
        try:
            q = self._coerce(other)
        except TypeError:
            return NotImplemented
        a, b = self.coeffs, q.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial._raw(out, self._var_with(q))

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw([-c for c in self.coeffs], self.var)

    def __sub__(self, other) -> "Polynomial":
        try:
            q = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-q)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return Polynomial._raw([], self.var)
            return Polynomial._raw([c * other for c in self.coeffs], self.var)
        try:
            q = self._coerce(other)
        except TypeError:
            return NotImplemented
        a, b = self.coeffs, q.coeffs
        if not a or not b:
            return Polynomial._raw([], self._var_with(q))
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                out[i + j] += x * y
        return Polynomial._raw(out, self._var_with(q))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Polynomial":
        if e < 0:
            raise ValueError("negative power of a polynomial")
        result = Polynomial._raw([Fraction(1)], self.var)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def scale(self, c: Scalar) -> "Polynomial":
        return self * as_fraction(c)

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        q = self._coerce(other)
        if q.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        db = q.degree
        lead = q.leading
        if len(rem) - 1 < db:
            return Polynomial._raw([], self.var), self
        quot = [Fraction(0)] * (len(rem) - db)
        for i in range(len(rem) - 1, db - 1, -1):
            c = rem[i]
            if c == 0:
                continue
            f = c / lead
            quot[i - db] = f
            for j, bc in enumerate(q.coeffs):
                rem[i - db + j] -= f * bc
        return Polynomial._raw(quot, self.var), Polynomial._raw(rem[:db], self.var)

    def __floordiv__(self, other) -> "Polynomial":
        return self.divmod(other)[0]

    def __mod__(self, other) -> "Polynomial":
        return self.divmod(other)[1]

    def exact_div(self, other) -> "Polynomial":
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def divides(self, other: "Polynomial") -> bool:
        return (other % self).is_zero()

    # -- calculus and substitution ------------------------------------
    def derivative(self) -> "Polynomial":
        return Polynomial._raw([i * c for i, c in enumerate(self.coeffs)][1:], self.var)

    def __call__(self, x):
        """Horner evaluation; ``x`` may be a number, mpmath value or Polynomial."""
        if not self.coeffs:
            return 0 * x if not isinstance(x, Polynomial) else Polynomial._raw([], x.var)
        acc = self.coeffs[-1]
        if isinstance(x, Polynomial):
            acc = Polynomial._raw([acc], x.var)
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def shift(self, c: Scalar) -> "Polynomial":
        """Return ``p(var + c)`` (Taylor shift)."""
        c = as_fraction(c)
        if c == 0 or len(self.coeffs) <= 1:
            return self
        a = list(self.coeffs)
        n = len(a)
        for i in range(n - 1):
            for j in range(n - 2, i - 1, -1):
                a[j] += c * a[j + 1]
        return Polynomial._raw(a, self.var)

    def compose_affine(self, alpha: Scalar, beta: Scalar) -> "Polynomial":
        """Return ``p(alpha*var + beta)``."""
        alpha = as_fraction(alpha)
        scaled = [c * alpha**i for i, c in enumerate(self.coeffs)]
        p = Polynomial._raw(scaled, self.var)
        return p.shift(as_fraction(beta) / alpha) if alpha != 0 else Polynomial.constant(self(beta), self.var)

    def with_var(self, var: str) -> "Polynomial":
        return Polynomial._raw(list(self.coeffs), var)

    def monic(self) -> "Polynomial":
        if self.is_zero():
            return self
        return self * (1 / self.leading)

    # -- integer structure --------------------------------------------
    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def int_coeffs(self) -> list[int]:
        if not self.is_integral():
            raise ValueError(f"polynomial {self} has non-integer coefficients")
        return [c.numerator for c in self.coeffs]

    def rational_content(self) -> Fraction:
        """Positive rational c with ``self / c`` integral and primitive."""
        return rational_gcd(self.coeffs)

    def primitive(self) -> "Polynomial":
        """Integral primitive associate with positive leading coefficient."""
        if self.is_zero():
            return self
        c = self.rational_content()
        if self.leading < 0:
            c = -c
        return self * (1 / c)


def rational_gcd(values: Iterable[Fraction]) -> Fraction:
    """gcd of numerators over lcm of denominators (positive; 0 if all zero)."""
    num = 0
    den = 1
    for v in values:
        if v == 0:
            continue
        num = math.gcd(num, v.numerator)
        den = den * v.denominator // math.gcd(den, v.denominator)
    if num == 0:
        return Fraction(0)
    return Fraction(num, den)


def poly_gcd(p: Polynomial, q: Polynomial) -> Polynomial:
    """Monic gcd over Q (zero only if both inputs are zero)."""
    a, b = p, q
    if a.degree < b.degree:
        a, b = b, a
    while not b.is_zero():
        if b.degree == 0:
            return Polynomial.constant(1, p.var)
        a, b = b, a % b
        b = b.monic()
    return a.monic()


def poly_gcd_many(ps: Sequence[Polynomial]) -> Polynomial:
    """Monic gcd of several polynomials, smallest degrees first."""
    nonzero = sorted((p for p in ps if not p.is_zero()), key=lambda p: p.degree)
    if not nonzero:
        raise UsageError("gcd of all-zero input")
    g = nonzero[0].monic()
    for p in nonzero[1:]:
        if g.degree == 0:
            break
        if g.divides(p):
            continue
        g = poly_gcd(g, p)
    return g


def content_primitive(ps: Sequence[Polynomial]) -> tuple[Polynomial, list[Polynomial]]:
    """Split off the joint content of ``ps``.

    The content is the polynomial gcd (made integral and primitive, positive
    leading coefficient) times the rational gcd of what remains. Every
    ``primitive * content`` reproduces the input exactly, primitives are
    integral with joint integer content 1.
    """
    if not ps or all(p.is_zero() for p in ps):
        raise UsageError("content of an all-zero sequence is undefined")
    g = poly_gcd_many(ps).primitive()
    quotients = [p.exact_div(g) if g.degree > 0 else p * (1 / g.leading) for p in ps]
    r = rational_gcd(c for qq in quotients for c in qq.coeffs)
    content = g * r
    return content, [qq * (1 / r) for qq in quotients]


def falling_factorial(x: Polynomial, j: int) -> Polynomial:
    """``x (x-1) ... (x-j+1)``."""
    out = Polynomial.constant(1, x.var)
    for i in range(j):
        out = out * (x - i)
    return out


class RationalFunction:
    """Reduced quotient of polynomials; the denominator is monic."""

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial | Scalar, den: Polynomial | Scalar = 1, var: str = "t", *, reduced: bool = False):
        if not isinstance(num, Polynomial):
            num = Polynomial.constant(num, var)
        if not isinstance(den, Polynomial):
            den = Polynomial.constant(den, num.var)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            self.num = Polynomial([], num.var)
            self.den = Polynomial.constant(1, num.var)
            return
        if not reduced and den.degree > 0:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num = num.exact_div(g)
                den = den.exact_div(g)
        lc = den.leading
        if lc != 1:
            num = num * (1 / lc)
            den = den * (1 / lc)
        self.num = num
        self.den = den

    @property
    def var(self) -> str:
        return self.num.var if self.num.degree > 0 else self.den.var

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def size(self) -> int:
        return max(self.num.degree, 0) + max(self.den.degree, 0)

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, (Polynomial, int, Fraction)):
            return RationalFunction(other, 1, self.var, reduced=True)
        raise TypeError(type(other).__name__)

    def __add__(self, other) -> "RationalFunction":
        g = self._coerce(other)
        if self.den == g.den:
            return RationalFunction(self.num + g.num, self.den)
        return RationalFunction(self.num * g.den + g.num * self.den, self.den * g.den)

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den, reduced=True)

    def __sub__(self, other) -> "RationalFunction":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RationalFunction":
        return (-self) + other

    def __mul__(self, other) -> "RationalFunction":
        g = self._coerce(other)
        if self.is_zero() or g.is_zero():
            return RationalFunction(0, 1, self.var)
        # cross-cancel before multiplying keeps the operands small
        g1 = poly_gcd(self.num, g.den)
        g2 = poly_gcd(g.num, self.den)
        n1, d2 = self.num.exact_div(g1), g.den.exact_div(g1)
        n2, d1 = g.num.exact_div(g2), self.den.exact_div(g2)
        return RationalFunction(n1 * n2, d1 * d2, reduced=True)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RationalFunction(self.den, self.num, reduced=True)

    def __truediv__(self, other) -> "RationalFunction":
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other) -> "RationalFunction":
        return self._coerce(other) * self.inverse()

    def derivative(self) -> "RationalFunction":
        n, d = self.num, self.den
        return RationalFunction(n.derivative() * d - n * d.derivative(), d * d)

    def __eq__(self, other: object) -> bool:
        try:
            g = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self.num == g.num and self.den == g.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def __repr__(self) -> str:
        if self.den.degree == 0:
            return f"RationalFunction({self.num})"
        return f"RationalFunction(({self.num})/({self.den}))"


def ratfun_arith(f: RationalFunction, g: RationalFunction, op: str) -> RationalFunction:
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    if op == "div":
        return f / g
    raise UsageError(f"unknown operation {op!r}")


def poly_arith(p: Polynomial, q: Polynomial, op: str) -> Polynomial:
    if p.var != q.var and p.degree > 0 and q.degree > 0:
        raise UsageError(f"variable mismatch: {p.var} vs {q.var}")
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise UsageError(f"unknown operation {op!r}")


def clear_denominators(fs: Sequence[RationalFunction]) -> list[Polynomial]:
    """Multiply through by the lcm of denominators."""
    lcm = Polynomial.constant(1, fs[0].var if fs else "t")
    for f in fs:
        g = poly_gcd(lcm, f.den)
        lcm = lcm * f.den.exact_div(g)
    return [f.num * lcm.exact_div(f.den) for f in fs]


def lcm_int(values: Iterable[int]) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)
