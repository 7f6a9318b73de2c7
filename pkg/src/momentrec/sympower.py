"""Symmetric powers of second-order theta-operators.

For ``A = theta^2 + a(t) theta + b(t)`` the chain

    L_0 = 1,  L_1 = theta,
    L_{k+1} = (theta + k a) L_k + b k (n - k + 1) L_{k-1}

ends with ``L_{n+1}``, which annihilates ``y^n`` for every solution ``y`` of
``A``. :func:`symmetric_power` builds the chain with noncommutative operator
products; :func:`symmetric_power_commutative` gets the same ``L_{n+1}`` from
plain bivariate polynomial arithmetic and is the one the pipelines use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import UsageError
from .exact import Polynomial
from .operators import THETA, DOperator, ThetaOperator, d_to_theta


@dataclass(frozen=True)
class SecondOrderTheta:
    """``theta^2 + a(t) theta + b(t)``."""

    a: Polynomial
    b: Polynomial

    @property
    def var(self) -> str:
        return self.a.var if self.a.degree > 0 else self.b.var

    def operator(self) -> ThetaOperator:
        theta = ThetaOperator.theta(self.var)
        return theta * theta + ThetaOperator.from_t_poly(self.a, self.var) * theta + ThetaOperator.from_t_poly(self.b, self.var)

    @classmethod
    def from_operator(cls, op: ThetaOperator | DOperator) -> "SecondOrderTheta":
        """Normalize a second-order operator to monic theta form.

        D-operators are converted first. The theta^2 coefficient must be a
        monomial ``c t^r`` dividing the other coefficients.
        """
        if isinstance(op, DOperator):
            _, op = d_to_theta(op)
        if op.order != 2:
            raise UsageError("a second-order operator is required")
        lead = op.theta_coefficient(2)
        r = next(i for i, c in enumerate(lead.coeffs) if c)
        if lead.degree != r:
            raise UsageError("leading theta coefficient must be a monomial in t")
        c = lead.coeffs[r]
        a_full, b_full = op.theta_coefficient(1), op.theta_coefficient(0)
        if any(a_full[i] for i in range(r)) or any(b_full[i] for i in range(r)):
            raise UsageError("leading coefficient does not divide the others")
        a = Polynomial([x / c for x in a_full.coeffs[r:]], op.var)
        b = Polynomial([x / c for x in b_full.coeffs[r:]], op.var)
        return cls(a, b)


K0_OPERATOR = SecondOrderTheta(Polynomial([], "t"), Polynomial([0, 0, -1], "t"))


@dataclass(frozen=True)
class SymPowerChain:
    n: int
    base: SecondOrderTheta
    operators: tuple[ThetaOperator, ...] = field(repr=False)

    @property
    def annihilator(self) -> ThetaOperator:
        return self.operators[-1]


def symmetric_power(A: SecondOrderTheta, n: int) -> SymPowerChain:
    """Full chain ``L_0..L_{n+1}`` via operator composition."""
    if n < 1:
        raise UsageError("n must be a positive integer")
    var = A.var
    theta = ThetaOperator.theta(var)
    a_op = ThetaOperator.from_t_poly(A.a, var)
    b_op = ThetaOperator.from_t_poly(A.b, var)
    chain = [ThetaOperator.identity(var), theta]
    for k in range(1, n + 1):
        nxt = (theta + a_op * k) * chain[k] + b_op * (k * (n - k + 1)) * chain[k - 1]
        chain.append(nxt)
    return SymPowerChain(n, A, tuple(chain))


def _poly_terms(p: Polynomial) -> list[tuple[int, int | Fraction]]:
    return [(i, c.numerator if c.denominator == 1 else c) for i, c in enumerate(p.coeffs) if c]


def symmetric_power_commutative(A: SecondOrderTheta, n: int) -> ThetaOperator:
    """``L_{n+1}`` from the commutative recurrence in ``(t, theta)``.

    ``Lt_{k+1} = t dLt_k/dt + theta Lt_k + k a Lt_k + k (n-k+1) b Lt_{k-1}``,
    read back with theta on the right.
    """
    if n < 1:
        raise UsageError("n must be a positive integer")
    a_terms = _poly_terms(A.a)
    b_terms = _poly_terms(A.b)
    # {t_power: [theta coefficients ascending]}
    prev: dict[int, list] = {0: [1]}
    cur: dict[int, list] = {0: [0, 1]}
    for k in range(1, n + 1):
        nxt: dict[int, list] = {}

        def acc(j: int, coeffs: list, scale, offset: int = 0) -> None:
            row = nxt.get(j)
            need = len(coeffs) + offset
            if row is None:
                row = nxt[j] = [0] * need
            elif len(row) < need:
                row.extend([0] * (need - len(row)))
            for m, c in enumerate(coeffs):
                if c:
                    row[m + offset] += scale * c

        for j, q in cur.items():
            if j:
                acc(j, q, j)
            acc(j, q, 1, offset=1)
            for i, ai in a_terms:
                acc(j + i, q, k * ai)
        w = k * (n - k + 1)
        for j, q in prev.items():
            for i, bi in b_terms:
                acc(j + i, q, w * bi)
        prev, cur = cur, {j: q for j, q in nxt.items() if any(q)}
    return ThetaOperator({j: Polynomial(q, THETA) for j, q in cur.items()}, A.var)


@dataclass
class StructureReport:
    n: int
    checked: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def check_structure(chain: SymPowerChain) -> StructureReport:
    """Check the closed-form shape of the chain for ``theta^2 - t^2``.

    Every ``L_k`` must be ``theta^k + sum_{j<=k-2} a_j(t) theta^j`` with each
    ``a_j`` even in ``t``, divisible by ``t^2`` and of degree at most ``k - j``.
    """
    if chain.base != K0_OPERATOR:
        raise UsageError("structure check applies to theta^2 - t^2 only")
    report = StructureReport(chain.n)
    for k, L in enumerate(chain.operators):
        report.checked += 1
        if L.order != k:
            report.violations.append(f"L_{k}: theta-order {L.order} != {k}")
            continue
        if L.theta_coefficient(k) != Polynomial([1], L.var):
            report.violations.append(f"L_{k}: leading coefficient is not 1")
        if k >= 1 and not L.theta_coefficient(k - 1).is_zero():
            report.violations.append(f"L_{k}: nonzero theta^{k - 1} coefficient")
        for j in range(k - 1):
            aj = L.theta_coefficient(j)
            if aj.is_zero():
                continue
            if any(c for i, c in enumerate(aj.coeffs) if i % 2):
                report.violations.append(f"L_{k}: a_{j} not even in t")
            if aj[0] != 0 or aj[1] != 0:
                report.violations.append(f"L_{k}: a_{j} not divisible by t^2")
            if aj.degree > k - j:
                report.violations.append(f"L_{k}: deg a_{j} = {aj.degree} > {k - j}")
    return report
