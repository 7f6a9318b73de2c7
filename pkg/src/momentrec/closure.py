"""Annihilators of products and powers of D-finite functions.

Derivatives of ``h = f^n`` (or ``f g``) are rewritten in the finite basis of
monomials in ``f, f', ..., f^(r-1)`` using the defining ODE to eliminate
``f^(r)``. The first linear dependency among ``h, h', h'', ...`` found by
elimination over rational functions is the annihilating operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

from .errors import UsageError
from .exact import Polynomial, RationalFunction, clear_denominators, content_primitive
from .operators import DOperator

Monomial = tuple[int, ...]
Expr = dict[Monomial, RationalFunction]


@dataclass(frozen=True)
class DerivativeRewriter:
    """``f^(r) = sum_i rules[i] f^(i)`` for solutions of an order-r ODE."""

    order: int
    rules: tuple[RationalFunction, ...]
    var: str = "t"

    @classmethod
    def from_ode(cls, ode: DOperator) -> "DerivativeRewriter":
        if ode.is_zero() or ode.order < 1:
            raise UsageError("ODE must be nonzero of order >= 1")
        coeffs = ode.coefficients()
        r = ode.order
        lead = coeffs[r]
        rules = tuple(RationalFunction(-coeffs[i], lead) for i in range(r))
        return cls(r, rules, ode.var)

    def as_operator(self) -> DOperator:
        """The monic ODE with denominators cleared (rules re-multiplied)."""
        fs = [-rule for rule in self.rules] + [RationalFunction(1, 1, self.var)]
        return DOperator.from_coefficients(clear_denominators(fs), self.var)


class _Space:
    """Monomials in the derivatives of several D-finite functions."""

    def __init__(self, rewriters: Sequence[DerivativeRewriter]):
        self.rewriters = list(rewriters)
        # flattened variable index -> (function, derivative order)
        self.slots = [(f, i) for f, rw in enumerate(self.rewriters) for i in range(rw.order)]
        self.offset = []
        pos = 0
        for rw in self.rewriters:
            self.offset.append(pos)
            pos += rw.order
        self.var = self.rewriters[0].var

    def derivative(self, expr: Expr) -> Expr:
        out: Expr = {}

        def add(mono: Monomial, c: RationalFunction) -> None:
            if c.is_zero():
                return
            cur = out.get(mono)
            s = c if cur is None else cur + c
            if s.is_zero():
                out.pop(mono, None)
            else:
                out[mono] = s

        for mono, c in expr.items():
            dc = c.derivative()
            if not dc.is_zero():
                add(mono, dc)
            for v, e in enumerate(mono):
                if not e:
                    continue
                f, i = self.slots[v]
                base = list(mono)
                base[v] -= 1
                rw = self.rewriters[f]
                ce = c * e
                if i + 1 < rw.order:
                    m = list(base)
                    m[v + 1] += 1
                    add(tuple(m), ce)
                else:
                    start = self.offset[f]
                    for l, rule in enumerate(rw.rules):
                        if rule.is_zero():
                            continue
                        m = list(base)
                        m[start + l] += 1
                        add(tuple(m), ce * rule)
        return out


class _Eliminator:
    """Incremental row reduction that tracks row combinations."""

    def __init__(self):
        self.basis: list[tuple[Monomial, Expr, dict[int, RationalFunction]]] = []
        self.count = 0

    def push(self, row: Expr) -> dict[int, RationalFunction] | None:
        """Add a row; return a dependency ``{row_index: coeff}`` if it reduces to zero."""
        idx = self.count
        self.count += 1
        vec = dict(row)
        combo = {idx: RationalFunction(1)}
        for piv, bvec, bcombo in self.basis:
            x = vec.get(piv)
            if x is None:
                continue
            f = x / bvec[piv]
            for col, val in bvec.items():
                nv = vec.get(col)
                nv = -(f * val) if nv is None else nv - f * val
                if nv.is_zero():
                    vec.pop(col, None)
                else:
                    vec[col] = nv
            for r, val in bcombo.items():
                nv = combo.get(r)
                nv = -(f * val) if nv is None else nv - f * val
                if nv.is_zero():
                    combo.pop(r, None)
                else:
                    combo[r] = nv
        if not vec:
            return combo
        piv = min(vec, key=lambda col: (vec[col].size(), col))
        self.basis.append((piv, vec, combo))
        return None


def _normalize_poly_vector(vals: Sequence[RationalFunction]) -> list[Polynomial]:
    """Clear denominators, remove joint content, make the last nonzero entry's leading coefficient positive."""
    polys = clear_denominators(list(vals))
    nz = [p for p in polys if not p.is_zero()]
    _, prims = content_primitive(nz)
    it = iter(prims)
    out = [next(it) if not p.is_zero() else p for p in polys]
    last = next(p for p in reversed(out) if not p.is_zero())
    if last.leading < 0:
        out = [-p for p in out]
    return out


def kernel_vector(rows: Sequence[Sequence[RationalFunction | Polynomial | int | Fraction]]) -> list[RationalFunction]:
    """A nonzero ``v`` with ``sum_i v[i] * rows[i] = 0``.

    The dependency with the lowest possible last index is returned, as
    polynomials (denominators cleared, content removed).
    """
    if not rows:
        raise UsageError("empty matrix")
    ncols = len(rows[0])
    if any(len(r) != ncols for r in rows):
        raise UsageError("ragged matrix")
    if len(rows) < ncols + 1:
        raise UsageError("kernel vector needs rows = cols + 1")
    var = next((e.var for r in rows for e in r if isinstance(e, (Polynomial, RationalFunction)) and getattr(e, "var", None)), "t")
    elim = _Eliminator()
    for row in rows:
        expr = {}
        for c, e in enumerate(row):
            rf = e if isinstance(e, RationalFunction) else RationalFunction(e, 1, var)
            if not rf.is_zero():
                expr[(c,)] = rf
        dep = elim.push(expr)
        if dep is not None:
            vals = [dep.get(i, RationalFunction(0, 1, var)) for i in range(len(rows))]
            return [RationalFunction(p, 1, var) for p in _normalize_poly_vector(vals)]
    raise ArithmeticError("no kernel vector found")  # impossible when rows > cols


def _annihilate(space: _Space, start: Expr, max_order: int) -> DOperator:
    elim = _Eliminator()
    expr = start
    for j in range(max_order + 1):
        dep = elim.push(expr)
        if dep is not None:
            vals = [dep.get(i, RationalFunction(0, 1, space.var)) for i in range(j + 1)]
            return DOperator.from_coefficients(_normalize_poly_vector(vals), space.var)
        expr = space.derivative(expr)
    raise ArithmeticError("dimension bound exceeded")  # unreachable by dimension count


def power_annihilator(ode: DOperator, n: int) -> DOperator:
    """Operator annihilating ``y^n`` for every solution ``y`` of ``ode``."""
    if n < 1:
        raise UsageError("n must be a positive integer")
    rw = DerivativeRewriter.from_ode(ode)
    space = _Space([rw])
    start = {(n,) + (0,) * (rw.order - 1): RationalFunction(1, 1, ode.var)}
    dim = comb(n + rw.order - 1, rw.order - 1)
    return _annihilate(space, start, dim)


def product_annihilator(ode_f: DOperator, ode_g: DOperator) -> DOperator:
    """Operator annihilating ``f g`` for all solutions ``f`` of ``ode_f``, ``g`` of ``ode_g``."""
    rf = DerivativeRewriter.from_ode(ode_f)
    rg = DerivativeRewriter.from_ode(ode_g)
    space = _Space([rf, rg])
    mono = [0] * (rf.order + rg.order)
    mono[0] = 1
    mono[rf.order] = 1
    start = {tuple(mono): RationalFunction(1, 1, ode_f.var)}
    return _annihilate(space, start, rf.order * rg.order)


def derivative_rows(ode: DOperator, n: int, count: int) -> tuple[list[Monomial], list[list[RationalFunction]]]:
    """``h, h', ..., h^(count-1)`` for ``h = y^n`` as rows over the monomial basis."""
    rw = DerivativeRewriter.from_ode(ode)
    space = _Space([rw])
    expr: Expr = {(n,) + (0,) * (rw.order - 1): RationalFunction(1, 1, ode.var)}
    exprs = []
    for _ in range(count):
        exprs.append(expr)
        expr = space.derivative(expr)
    basis = sorted({m for e in exprs for m in e}, reverse=True)
    zero = RationalFunction(0, 1, ode.var)
    return basis, [[e.get(m, zero) for m in basis] for e in exprs]
