"""Moment recurrences from annihilating operators.

A :class:`Recurrence` states ``sum_j p_j(k) u(k+j) = 0`` for a named
sequence ``u``. Operators annihilating ``h`` turn into recurrences for the
moments ``I(k) = int t^k h(t) dt`` by integration by parts; weights convert
between normalizations and :func:`reindex` mirrors the index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from .closure import power_annihilator
from .errors import DomainError, UsageError
from .exact import Polynomial, RationalFunction, clear_denominators, content_primitive
from .operators import DOperator, ThetaOperator
from .sympower import K0_OPERATOR, SecondOrderTheta, symmetric_power_commutative


@dataclass(frozen=True)
class Recurrence:
    """``sum (coeff(k) * seq(k + offset)) = 0`` in canonical form.

    Canonical: lowest offset 0, integral coefficients with joint integer
    content 1 and no common polynomial factor, and the coefficient at the
    largest offset has a positive leading coefficient.
    """

    sequence: str
    variable: str
    terms: tuple[tuple[int, Polynomial], ...]
    n: int | None = None

    @classmethod
    def build(
        cls,
        sequence: str,
        terms: dict[int, Polynomial] | Sequence[tuple[int, Polynomial]],
        variable: str = "k",
        n: int | None = None,
    ) -> "Recurrence":
        """Canonicalize arbitrary (possibly negative-offset, rational) terms."""
        items = terms.items() if isinstance(terms, dict) else terms
        acc: dict[int, Polynomial] = {}
        for j, p in items:
            p = p.with_var(variable)
            acc[j] = acc[j] + p if j in acc else p
        acc = {j: p for j, p in acc.items() if not p.is_zero()}
        if not acc:
            raise UsageError("recurrence has no nonzero terms")
        m = min(acc)
        # k -> k - m moves the lowest offset to 0 without changing the sequence
        shifted = {j - m: (p.shift(-m) if m else p) for j, p in sorted(acc.items())}
        offsets = list(shifted)
        _, prims = content_primitive([shifted[j] for j in offsets])
        if prims[-1].leading < 0:
            prims = [-p for p in prims]
        return cls(sequence, variable, tuple(zip(offsets, prims)), n)

    @property
    def offsets(self) -> list[int]:
        return [j for j, _ in self.terms]

    @property
    def max_offset(self) -> int:
        return self.terms[-1][0]

    def coefficient(self, j: int) -> Polynomial:
        for o, p in self.terms:
            if o == j:
                return p
        return Polynomial([], self.variable)

    def renamed(self, sequence: str | None = None, variable: str | None = None, n: int | None = None) -> "Recurrence":
        var = variable or self.variable
        return Recurrence(
            sequence or self.sequence,
            var,
            tuple((j, p.with_var(var)) for j, p in self.terms),
            self.n if n is None else n,
        )

    def same_relation(self, other: "Recurrence") -> bool:
        """Equal as relations, ignoring sequence and variable names."""
        return [(j, p.coeffs) for j, p in self.terms] == [(j, p.coeffs) for j, p in other.terms]

    def evaluate(self, k, values) -> list:
        """Terms ``coeff_j(k) * values[k + j]`` (``values`` indexable by index)."""
        return [p(k) * values[k + j] for j, p in self.terms]

    # -- serialization -------------------------------------------------
    def to_json_obj(self) -> dict:
        return {
            "sequence": self.sequence,
            "n": self.n,
            "variable": self.variable,
            "terms": [{"offset": j, "coeff": p.int_coeffs()} for j, p in self.terms],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2)

    @classmethod
    def from_json_obj(cls, obj: Any) -> "Recurrence":
        if isinstance(obj, (str, bytes)):
            try:
                obj = json.loads(obj)
            except json.JSONDecodeError as exc:
                raise UsageError(f"recurrence JSON does not parse: {exc}") from exc
        try:
            seq, var, n = obj["sequence"], obj["variable"], obj.get("n")
            terms = [(int(t["offset"]), Polynomial([int(c) for c in t["coeff"]], var)) for t in obj["terms"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed recurrence JSON: {exc}") from exc
        return cls(seq, var, tuple(terms), n)


@dataclass(frozen=True)
class WeightRatio:
    """``u(k) = w(k) v(k)`` with ``w(k + step) = ratio(k) w(k)``."""

    step: int
    ratio: RationalFunction

    def __post_init__(self):
        if self.step < 1:
            raise UsageError("weight step must be positive")
        if self.ratio.is_zero():
            raise UsageError("weight ratio must be nonzero")

    def inverse(self) -> "WeightRatio":
        return WeightRatio(self.step, self.ratio.inverse())


# -- extraction ------------------------------------------------------------

def mellin_recurrence_theta(L: ThetaOperator, seq: str = "u", variable: str = "k", n: int | None = None) -> Recurrence:
    """``int t^(k+j) theta^m h dt = (-1-k-j)^m I(k+j)`` applied termwise."""
    if L.is_zero():
        raise UsageError("zero operator")
    terms = {j: q.with_var(variable).compose_affine(-1, -1 - j) for j, q in L.terms.items()}
    return Recurrence.build(seq, terms, variable, n)


def mellin_recurrence_d(A: DOperator, seq: str = "u", variable: str = "k", n: int | None = None) -> Recurrence:
    """``int t^(k+i) h^(j) dt = (-k-i)(-k-i+1)...(-k-i+j-1) I(k+i-j)`` applied termwise."""
    if A.is_zero():
        raise UsageError("zero operator")
    terms: dict[int, Polynomial] = {}
    for (i, j), c in A.terms.items():
        p = Polynomial.constant(c, variable)
        for l in range(j):
            p = p * Polynomial([l - i, -1], variable)
        off = i - j
        terms[off] = terms[off] + p if off in terms else p
    return Recurrence.build(seq, terms, variable, n)


def mellin_recurrence(op, seq: str = "u", variable: str = "k", n: int | None = None) -> Recurrence:
    if isinstance(op, ThetaOperator):
        return mellin_recurrence_theta(op, seq, variable, n)
    if isinstance(op, DOperator):
        return mellin_recurrence_d(op, seq, variable, n)
    raise UsageError(f"not an operator: {type(op).__name__}")


# -- transformations -------------------------------------------------------

def apply_weight(r: Recurrence, w: WeightRatio, sequence: str | None = None) -> Recurrence:
    """Recurrence for ``v`` where ``u(k) = w(k) v(k)``.

    The coefficient at offset ``j`` gains ``prod_{i < j/step} ratio(k + i*step)``;
    the ratio's denominators are cleared by multiplying every term by the
    product up to the largest offset.
    """
    var = r.variable
    num, den = w.ratio.num.with_var(var), w.ratio.den.with_var(var)
    for j in r.offsets:
        if j % w.step:
            raise UsageError(f"offset {j} is not a multiple of the weight step {w.step}")
    top = r.max_offset // w.step
    # num_prefix[i] = prod_{l<i} num(k + l*step); den_suffix[i] = prod_{i<=l<top} den(k + l*step)
    num_prefix = [Polynomial([1], var)]
    for i in range(top):
        num_prefix.append(num_prefix[-1] * num.shift(i * w.step))
    den_suffix = [Polynomial([1], var)] * (top + 1)
    if den.degree > 0:
        for i in range(top - 1, -1, -1):
            den_suffix[i] = den_suffix[i + 1] * den.shift(i * w.step)
    else:
        c = den.leading
        den_suffix = [Polynomial([c ** (top - i)], var) for i in range(top + 1)]
    terms = [(j, p * num_prefix[j // w.step] * den_suffix[j // w.step]) for j, p in r.terms]
    return Recurrence.build(sequence or r.sequence, terms, var, r.n)


def reindex(r: Recurrence, shift: int = 1, sequence: str | None = None) -> Recurrence:
    """Recurrence for the mirrored sequence ``w(k) = u(-k - shift)``.

    ``shift = 1`` is the Taylor-coefficient mirror ``k -> -k - 1``; applying
    the same reindex twice returns the original relation.
    """
    J = r.max_offset
    terms = {J - j: p.compose_affine(-1, -J - shift) for j, p in r.terms}
    return Recurrence.build(sequence or r.sequence, terms, r.variable, r.n)


def rebase(r: Recurrence, delta: int, sequence: str | None = None, variable: str | None = None) -> Recurrence:
    """Recurrence for ``v(s) = u(s + delta)``."""
    var = variable or r.variable
    terms = {j: p.shift(delta).with_var(var) for j, p in r.terms}
    return Recurrence.build(sequence or r.sequence, terms, var, r.n)


# -- pipelines -------------------------------------------------------------

def rec_c(n: int) -> Recurrence:
    """Recurrence for ``c(n,k) = int_0^oo t^k K0(t)^n dt``."""
    if n < 1:
        raise UsageError("n must be a positive integer")
    L = symmetric_power_commutative(K0_OPERATOR, n)
    return mellin_recurrence_theta(L, "c", "k", n)


GAMMA_WEIGHT = WeightRatio(1, RationalFunction(Polynomial([1, 1], "k")))


def rec_C(n: int) -> Recurrence:
    """Recurrence for ``C(n,k) = 2^n c(n,k) / (n! k!)``."""
    return apply_weight(rec_c(n), GAMMA_WEIGHT, "C")


@dataclass
class ShapeReport:
    family: str
    n: int
    violations: list[str]

    @property
    def passed(self) -> bool:
        return not self.violations


def shape_check(r: Recurrence, n: int, family: str) -> ShapeReport:
    """Check the expected shape of the c/C Bessel-moment recurrences.

    Offsets are even and at most ``n+1``; the offset-0 coefficient is
    ``+-(k+1)^(n+1)`` (family ``c``) or ``+-(k+1)^n`` (family ``C``); for
    family ``c`` the coefficient at offset ``j`` has degree ``<= n+1-j``.
    """
    if family not in ("c", "C"):
        raise UsageError("family must be 'c' or 'C'")
    v = []
    if any(j % 2 for j in r.offsets):
        v.append(f"odd offset in {r.offsets}")
    if r.max_offset > n + 1:
        v.append(f"max offset {r.max_offset} > {n + 1}")
    e = n + 1 if family == "c" else n
    expect = Polynomial([1, 1], r.variable) ** e
    c0 = r.coefficient(0)
    if c0 != expect and c0 != -expect:
        v.append(f"offset-0 coefficient {c0} is not +-(k+1)^{e}")
    if family == "c":
        for j, p in r.terms:
            if p.degree > n + 1 - j:
                v.append(f"deg coeff at offset {j} = {p.degree} > {n + 1 - j}")
    return ShapeReport(family, n, v)


# box integrals

B_ODE = DOperator({(1, 2): 1, (0, 1): 2, (2, 1): 2, (1, 0): 2}, "u")
DELTA_ODE = DOperator({(2, 3): 2, (1, 2): 12, (3, 2): 4, (0, 1): 12, (2, 1): 16, (1, 0): 8}, "u")
HALF_S = WeightRatio(2, RationalFunction(Polynomial([0, Fraction(1, 2)], "s")))


def box_recurrence(kind: str, n: int) -> Recurrence:
    """Difference equation in ``s`` for the box integrals ``B_n(s)`` or ``Delta_n(s)``."""
    if n < 1:
        raise UsageError("n must be a positive integer")
    if kind == "B":
        # I(k) = int u^k b^n du; M(s) = I(s-1) = Gamma(s/2)/2 * B(-s)
        L = symmetric_power_commutative(SecondOrderTheta.from_operator(B_ODE), n)
        r = mellin_recurrence_theta(L, "I", "k", n)
        r = rebase(r, -1, "M", "s")
    elif kind in ("Delta", "D"):
        # same kernel u^(s-1) as for B; d has order 3 so the general closure is used
        A = power_annihilator(DELTA_ODE, n)
        r = mellin_recurrence_d(A, "I", "k", n)
        r = rebase(r, -1, "M", "s")
        kind = "Delta"
    else:
        raise UsageError(f"unknown box kind {kind!r}")
    if any(j % 2 for j in r.offsets):
        raise DomainError("Mellin recurrence has odd offsets; the Gamma(s/2) weight needs step 2")
    r = apply_weight(r, HALF_S)
    return reindex(r, 0, kind)


# Broadhurst vacuum-diagram reduction

@dataclass(frozen=True)
class VTerm:
    """``coeff * V(n, a, b)`` with ``V(n,a,b) = int x^(2n+1) K0^a (x K0')^b dx``."""

    n: int
    a: int
    b: int
    coeff: Fraction = Fraction(1)

    def key(self) -> tuple[int, int, int]:
        return (self.n, self.a, self.b)


def reduce_V(v: VTerm) -> list[VTerm]:
    """Express ``V(n,a,b)`` through values with ``a*b == 0``.

    Uses ``V(m,a,b) = -[2m V(m-1,a-1,b+1) + (a-1) V(m-1,a-2,b+2)] / (b+1)``,
    which lowers ``a`` at every step while keeping ``a + b`` fixed.
    """
    if v.n < 0 or v.a < 0 or v.b < 0:
        raise DomainError(f"negative index in V{v.key()}")
    pending: dict[tuple[int, int, int], Fraction] = {v.key(): Fraction(v.coeff)}
    done: dict[tuple[int, int, int], Fraction] = {}
    chain = []
    while pending:
        # largest a first so every term is expanded once
        key = max(pending, key=lambda t: (t[1], -t[0]))
        c = pending.pop(key)
        m, a, b = key
        if c == 0:
            continue
        if a == 0 or b == 0:
            done[key] = done.get(key, Fraction(0)) + c
            continue
        chain.append(key)
        if m == 0:
            raise DomainError(f"reduction of V{v.key()} needs V with n < 0 (chain {chain})")
        f = c / (b + 1)
        for k2, w in (((m - 1, a - 1, b + 1), -2 * m * f), ((m - 1, a - 2, b + 2), -(a - 1) * f)):
            if w:
                pending[k2] = pending.get(k2, Fraction(0)) + w
    return [VTerm(*k, coeff=c) for k, c in sorted(done.items()) if c]


def format_v_combination(v: VTerm, terms: Sequence[VTerm]) -> str:
    parts = []
    for t in terms:
        sign = "-" if t.coeff < 0 else "+"
        a = abs(t.coeff)
        parts.append((sign, f"{a}·V({t.n},{t.a},{t.b})"))
    if not parts:
        rhs = "0"
    else:
        s0, b0 = parts[0]
        rhs = ("−" if s0 == "-" else "") + b0 + "".join(f" {'−' if s == '-' else '+'} {b}" for s, b in parts[1:])
    return f"V({v.n},{v.a},{v.b}) = {rhs}"
