"""High-precision numerical oracle.

Evaluates K0, K1, erf-based kernels, Bessel moments, box integrals, vacuum
diagram integrals and a handful of constants, each to a requested number of
decimal digits ``P``. Results carry their target precision in
:class:`HighPrecReal`. Precision is always an explicit argument; the global
mpmath context is only touched inside ``mp.workdps`` blocks.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from mpmath import mp

from .errors import DomainError, UsageError
from .quadrature import exp_sinh, tanh_sinh
from .recurrence import Recurrence, rec_C

GUARD = 15


@dataclass(frozen=True)
class HighPrecReal:
    value: mpmath.mpf
    precision: int

    def __float__(self) -> float:
        return float(self.value)

    def __str__(self) -> str:
        return mpmath.nstr(self.value, self.precision)

    def __sub__(self, other):
        o = other.value if isinstance(other, HighPrecReal) else other
        return self.value - o


def _q(x):
    """An exact rational as an mpf at the working precision."""
    x = Fraction(x)
    return mpmath.mpf(x.numerator) / x.denominator


def _agree(x, y, P: int) -> bool:
    scale = max(abs(x), abs(y))
    return scale == 0 or abs(x - y) <= scale * mpmath.mpf(10) ** (-P)


# -- K0 and friends ----------------------------------------------------------

def k0_integral(t, P: int):
    """``K0(t) = int_0^oo exp(-t cosh x) dx`` by tanh-sinh on a truncated range."""
    with mp.workdps(P + GUARD):
        t = mpmath.mpf(t)
        # exp(-t cosh X) below 10^-(P+GUARD+5) relative to exp(-t)
        X = mpmath.acosh(1 + (P + GUARD + 5) * mpmath.log(10) / t)
        vals, _, _ = tanh_sinh(lambda x: mpmath.exp(-t * (mpmath.cosh(x) - 1)), 0, X)
        return vals[0] * mpmath.exp(-t)


def k1_integral(t, P: int):
    """``K1(t) = int_0^oo cosh(x) exp(-t cosh x) dx``."""
    with mp.workdps(P + GUARD):
        t = mpmath.mpf(t)
        X = mpmath.acosh(1 + (P + GUARD + 10) * mpmath.log(10) / t + 10)
        vals, _, _ = tanh_sinh(lambda x: mpmath.cosh(x) * mpmath.exp(-t * (mpmath.cosh(x) - 1)), 0, X)
        return vals[0] * mpmath.exp(-t)


def k0_series(t, P: int):
    """Ascending series ``-(ln(t/2)+gamma) I0(t) + sum (t^2/4)^m H_m / (m!)^2``.

    The two parts grow like ``e^t`` while the result decays like ``e^-t``, so
    working precision is raised by ``ceil(2t / ln 10) + 10`` digits.
    """
    extra = math.ceil(2 * float(t) / math.log(10)) + 10
    with mp.workdps(P + extra):
        t = mpmath.mpf(t)
        q = t * t / 4
        term = mpmath.mpf(1)  # (t^2/4)^m / (m!)^2
        harmonic = mpmath.mpf(0)
        i0 = mpmath.mpf(0)
        tail = mpmath.mpf(0)
        eps = mpmath.mpf(10) ** (-(P + extra))
        m = 0
        while True:
            i0 += term
            tail += term * harmonic
            m += 1
            term = term * q / (m * m)
            harmonic += mpmath.mpf(1) / m
            if term < eps * i0 and m > 2:
                break
        return -(mpmath.log(t / 2) + mpmath.euler) * i0 + tail


def eval_K0(t, P: int = 30, *, cross_check: bool = True) -> HighPrecReal:
    """``K0(t)`` from the cosh integral; optionally confirmed by the ascending series."""
    if t <= 0:
        raise DomainError("K0 needs t > 0")
    v = k0_integral(t, P)
    if cross_check:
        s = k0_series(t, P)
        with mp.workdps(P + GUARD):
            if not _agree(v, s, P):
                raise DomainError(f"K0({t}) methods disagree: {mpmath.nstr(v, P)} vs {mpmath.nstr(s, P)}")
    return HighPrecReal(v, P)


def _b_series(u):
    # b(u) = sum (-1)^m u^(2m) / (m! (2m+1))
    u2 = u * u
    term, total, m = mpmath.mpf(1), mpmath.mpf(0), 0
    eps = mpmath.eps
    while True:
        total += term / (2 * m + 1)
        m += 1
        term = -term * u2 / m
        if abs(term) < eps * abs(total):
            return total


def _d_series(u):
    # d(u) = sum (-1)^m u^(2m) / ((m+1)! (2m+1))
    u2 = u * u
    term, total, m = mpmath.mpf(1), mpmath.mpf(0), 0  # term = (-1)^m u^(2m)/(m+1)!
    eps = mpmath.eps
    while True:
        total += term / (2 * m + 1)
        m += 1
        term = -term * u2 / (m + 1)
        if abs(term) < eps * abs(total):
            return total


def b_kernel(u):
    """``sqrt(pi) erf(u) / (2u)`` at the working precision."""
    if u < 1:
        return _b_series(u)
    return mpmath.sqrt(mpmath.pi) * mpmath.erf(u) / (2 * u)


def d_kernel(u):
    """``(exp(-u^2) - 1 + sqrt(pi) u erf(u)) / u^2`` at the working precision."""
    if u < 1:
        return _d_series(u)
    return (mpmath.exp(-u * u) - 1 + mpmath.sqrt(mpmath.pi) * u * mpmath.erf(u)) / (u * u)


def eval_special(name: str, u, P: int = 30) -> HighPrecReal:
    if name not in ("K1", "erf", "b", "d"):
        raise UsageError(f"unknown function {name!r}")
    if name == "K1":
        if u <= 0:
            raise DomainError("K1 needs u > 0")
        return HighPrecReal(k1_integral(u, P), P)
    if u < 0:
        raise DomainError(f"{name} is evaluated for u >= 0 only")
    with mp.workdps(P + GUARD):
        u = mpmath.mpf(u)
        if name == "erf":
            v = mpmath.erf(u)
        elif name == "b":
            v = b_kernel(u)
        else:
            v = d_kernel(u)
        return HighPrecReal(+v, P)


# -- moments -----------------------------------------------------------------

def _truncation(n_min: int, k_max: int, P: int) -> int:
    """Least integer T >= 2 with exp(-n T) T^(k+1) < 10^(-P-10)."""
    target = (P + 10) * math.log(10)
    T = 2.0
    while n_min * T - (k_max + 1) * math.log(T) < target:
        T += 1
    return int(T)


def _bessel_integrand(ns, ks, with_k1: bool, vab=()):
    """Vector integrand of t^k K0^n (and x^(2m+1) K0^a (x K0')^b)."""
    n_max = max(ns, default=0)
    k_max = max(ks, default=0)

    def f(t):
        k0 = mpmath.besselk(0, t)
        out = []
        if ns:
            powers_t = [mpmath.mpf(1)]
            for _ in range(k_max):
                powers_t.append(powers_t[-1] * t)
            powers_k = [mpmath.mpf(1)]
            for _ in range(n_max):
                powers_k.append(powers_k[-1] * k0)
            out.extend(powers_t[k] * powers_k[n] for n in ns for k in ks)
        if vab:
            xk1 = -t * mpmath.besselk(1, t)
            out.extend(t ** (2 * m + 1) * k0**a * xk1**b for m, a, b in vab)
        return out

    return f


@lru_cache(maxsize=16)
def bessel_moment_table(ns: tuple[int, ...], ks: tuple[int, ...], P: int) -> dict[tuple[int, int], mpmath.mpf]:
    """All ``c(n,k) = int_0^oo t^k K0(t)^n dt`` for ``n in ns, k in ks`` from one node set."""
    if not ns or min(ns) < 1 or min(ks) < 0:
        raise UsageError("need n >= 1 and k >= 0")
    with mp.workdps(P + GUARD):
        f = _bessel_integrand(ns, ks, False)
        T = _truncation(min(ns), max(ks), P + GUARD)
        tol = mpmath.mpf(10) ** (-(P + 5))
        lo, _, _ = tanh_sinh(f, 0, 1, tol=tol)
        hi, _, _ = exp_sinh(f, 1, T, tol=tol)
        keys = [(n, k) for n in ns for k in ks]
        return {key: x + y for key, x, y in zip(keys, lo, hi)}


def moment_c(n: int, k: int, P: int = 30) -> HighPrecReal:
    """``c(n,k) = int_0^oo t^k K0(t)^n dt``."""
    table = bessel_moment_table((n,), (k,), P)
    return HighPrecReal(table[(n, k)], P)


def c_to_C(c, n: int, k: int):
    """``C(n,k) = 2^n c(n,k) / (n! k!)``."""
    return c * mpmath.mpf(2) ** n / (mpmath.factorial(n) * mpmath.factorial(k))


def moment_C(n: int, k: int, P: int = 30) -> HighPrecReal:
    with mp.workdps(P + GUARD):
        return HighPrecReal(c_to_C(moment_c(n, k, P).value, n, k), P)


@lru_cache(maxsize=16)
def vacuum_table(terms: tuple[tuple[int, int, int], ...], P: int) -> dict[tuple[int, int, int], mpmath.mpf]:
    for m, a, b in terms:
        if m < 0 or a < 0 or b < 0:
            raise DomainError("V needs nonnegative indices")
        if a + b < 1:
            raise DomainError("V(n,a,b) diverges for a + b = 0")
    with mp.workdps(P + GUARD):
        f = _bessel_integrand((), (), True, terms)
        n_min = min(a + b for _, a, b in terms)
        T = _truncation(n_min, max(2 * m + 1 + b for m, _, b in terms), P + GUARD)
        tol = mpmath.mpf(10) ** (-(P + 5))
        lo, _, _ = tanh_sinh(f, 0, 1, tol=tol)
        hi, _, _ = exp_sinh(f, 1, T, tol=tol)
        return {key: x + y for key, x, y in zip(terms, lo, hi)}


def moment_V(n: int, a: int, b: int, P: int = 30) -> HighPrecReal:
    """``V(n,a,b) = int_0^oo x^(2n+1) K0(x)^a (x K0'(x))^b dx``."""
    return HighPrecReal(vacuum_table(((n, a, b),), P)[(n, a, b)], P)


def _mellin_kernel(kernel, n: int, s, P: int):
    # int_0^oo u^(s-1) g(u)^n du; the [1, oo) half is mapped by u = 1/x
    with mp.workdps(P + GUARD):
        s = mpmath.mpf(s)
        tol = mpmath.mpf(10) ** (-(P + 5))
        lo, _, _ = tanh_sinh(lambda u: u ** (s - 1) * kernel(u) ** n, 0, 1, tol=tol)
        hi, _, _ = tanh_sinh(lambda x: x ** (-s - 1) * kernel(1 / x) ** n, 0, 1, tol=tol)
        return lo[0] + hi[0]


@lru_cache(maxsize=8)
def _cube_rule(n: int, points: int, panels: int):
    x, w = np.polynomial.legendre.leggauss(points)
    # panels graded toward the origin, where |r|^s is least smooth
    edges = np.linspace(0.0, 1.0, panels + 1) ** 2
    xs = np.concatenate([(a + b) / 2 + (b - a) / 2 * x for a, b in zip(edges[:-1], edges[1:])])
    ws = np.concatenate([(b - a) / 2 * w for a, b in zip(edges[:-1], edges[1:])])
    sq = xs**2
    # (n-1)-dimensional grid of partial sums of squares; the first axis is looped
    acc = np.zeros(1)
    wacc = np.ones(1)
    for _ in range(n - 1):
        acc = (acc[:, None] + sq[None, :]).ravel()
        wacc = (wacc[:, None] * ws[None, :]).ravel()
    return sq, ws, acc, wacc


def box_direct(n: int, s: float, points: int = 24, panels: int = 4) -> float:
    """``B_n(s) = int_[0,1]^n |r|^s dr`` by a tensor composite Gauss-Legendre rule.

    Double precision, roughly 10 digits for ``s > 0``; intended for ``n <= 4``.
    """
    if n < 1 or n > 4:
        raise DomainError("direct cube quadrature supports 1 <= n <= 4")
    sq, ws, acc, wacc = _cube_rule(n, points, panels)
    total = 0.0
    for x2, w in zip(sq, ws):
        total += w * float(np.dot(wacc, (acc + x2) ** (s / 2)))
    return total


def moment_box(kind: str, n: int, s, P: int = 30) -> HighPrecReal:
    """Box-integral oracles.

    ``B_direct``: the cube integral itself (double precision, ``n <= 4``).
    ``M_b``: ``int_0^oo u^(s-1) b(u)^n du`` for ``0 < s < n``.
    ``M_d``: ``int_0^oo u^(s-1) d(u)^n du`` for ``0 < s < n``.
    """
    if kind == "B_direct":
        if s <= -n:
            raise DomainError("B_n(s) diverges for s <= -n")
        return HighPrecReal(mpmath.mpf(box_direct(n, float(s))), 10)
    if kind not in ("M_b", "M_d"):
        raise UsageError(f"unknown box kind {kind!r}")
    if not 0 < s < n:
        raise DomainError(f"Mellin integral converges only for 0 < s < {n}")
    kernel = b_kernel if kind == "M_b" else d_kernel
    return HighPrecReal(_mellin_kernel(kernel, n, s, P), P)


def box_from_mellin(kind: str, n: int, s, P: int = 30) -> HighPrecReal:
    """``B_n(-s)`` or ``Delta_n(-s)`` as ``2/Gamma(s/2)`` times the Mellin integral."""
    m = moment_box("M_b" if kind == "B" else "M_d", n, s, P)
    with mp.workdps(P + GUARD):
        return HighPrecReal(2 * m.value / mpmath.gamma(mpmath.mpf(s) / 2), P)


# -- constants ---------------------------------------------------------------

def _zeta3_series(P: int):
    # zeta(3) = 5/2 sum_{k>=1} (-1)^(k+1) / (k^3 binom(2k,k))
    with mp.workdps(P + GUARD):
        total = mpmath.mpf(0)
        k = 1
        c = mpmath.mpf(2)  # binom(2k, k)
        eps = mpmath.mpf(10) ** (-(P + GUARD))
        while True:
            term = 1 / (mpmath.mpf(k) ** 3 * c)
            total += term if k % 2 else -term
            if term < eps:
                break
            c = c * (2 * k + 1) * (2 * k + 2) / ((k + 1) ** 2)
            k += 1
        return total * 5 / 2


def trigamma(x, P: int):
    """psi_1(x) for x > 0: shift by 40, then the Bernoulli asymptotic series."""
    with mp.workdps(P + GUARD):
        x = mpmath.mpf(x)
        acc = mpmath.mpf(0)
        for _ in range(40):
            acc += 1 / (x * x)
            x += 1
        # psi_1(x) ~ 1/x + 1/(2x^2) + sum_{k>=1} B_{2k} / x^(2k+1)
        s = 1 / x + 1 / (2 * x * x)
        eps = mpmath.mpf(10) ** (-(P + GUARD))
        k = 1
        while True:
            term = mpmath.bernoulli(2 * k) / x ** (2 * k + 1)
            s += term
            if abs(term) < eps or k > 60:
                break
            k += 1
        return acc + s


def digamma(x, P: int):
    """psi(x) for x > 0, same shift-and-expand scheme as :func:`trigamma`."""
    with mp.workdps(P + GUARD):
        x = mpmath.mpf(x)
        acc = mpmath.mpf(0)
        for _ in range(40):
            acc -= 1 / x
            x += 1
        s = mpmath.log(x) - 1 / (2 * x)
        eps = mpmath.mpf(10) ** (-(P + GUARD))
        k = 1
        while True:
            term = mpmath.bernoulli(2 * k) / (2 * k * x ** (2 * k))
            s -= term
            if abs(term) < eps or k > 60:
                break
            k += 1
        return acc + s


def _l_minus3_trigamma(P: int):
    with mp.workdps(P + GUARD):
        return (trigamma(mpmath.mpf(1) / 3, P) - trigamma(mpmath.mpf(2) / 3, P)) / 9


def _l_minus3_sum(P: int):
    with mp.workdps(P + GUARD):
        return mpmath.nsum(lambda m: 1 / (3 * m + 1) ** 2 - 1 / (3 * m + 2) ** 2, [0, mpmath.inf])


def _ln2_series(P: int):
    # ln 2 = sum_{k>=1} 1 / (k 2^k)
    with mp.workdps(P + GUARD):
        total, k, p = mpmath.mpf(0), 1, mpmath.mpf(1) / 2
        eps = mpmath.mpf(10) ** (-(P + GUARD))
        while p > eps:
            total += p / k
            k += 1
            p /= 2
        return total


CONSTANTS = {
    "zeta3": (lambda P: mpmath.zeta(3), _zeta3_series),
    "L_minus3_2": (_l_minus3_trigamma, _l_minus3_sum),
    "euler_gamma": (lambda P: +mpmath.euler, lambda P: -digamma(1, P)),
    "ln2": (lambda P: +mpmath.ln2, _ln2_series),
}


def constant_methods(name: str, P: int = 30) -> tuple:
    if name not in CONSTANTS:
        raise UsageError(f"unknown constant {name!r}")
    first, second = CONSTANTS[name]
    with mp.workdps(P + GUARD):
        return first(P), second(P)


def constant(name: str, P: int = 30) -> HighPrecReal:
    """A named constant; two independent evaluations must agree to ``P`` digits."""
    x, y = constant_methods(name, P)
    with mp.workdps(P + GUARD):
        if not _agree(x, y, P):
            raise DomainError(f"{name}: methods disagree")
    return HighPrecReal(x, P)


# -- recurrence checks -------------------------------------------------------

def check_recurrence(r: Recurrence, values: dict, P: int = 30) -> dict:
    """Relative residuals of ``r`` on every ``k`` whose needed values are all present.

    The residual at ``k`` is ``|sum_j p_j(k) v(k+j)| / max_j |p_j(k) v(k+j)|``.
    """
    ks = sorted(k for k in values if all(k + j in values for j in r.offsets))
    if not ks:
        raise UsageError("no index has values at every offset of the recurrence")
    per_k = []
    worst = mpmath.mpf(0)
    degenerate = False
    with mp.workdps(P + GUARD):
        vals = {k: (v.value if isinstance(v, HighPrecReal) else mpmath.mpmathify(v)) for k, v in values.items()}
        for k in ks:
            terms = [_q(p(k)) * vals[k + j] for j, p in r.terms]
            scale = max(abs(x) for x in terms)
            if scale == 0:
                degenerate = True
                res = mpmath.mpf(0)
            else:
                res = abs(mpmath.fsum(terms)) / scale
            worst = max(worst, res)
            per_k.append({"k": k, "relative_residual": mpmath.nstr(res, 3)})
    report = {
        "target": f"{r.sequence}(n={r.n})" if r.n is not None else r.sequence,
        "P": P,
        "max_relative_residual": mpmath.nstr(worst, 3),
        "per_k": per_k,
    }
    if degenerate:
        report["degenerate"] = True
    return report


def transport(r: Recurrence, seeds: dict, k_target: int) -> mpmath.mpf:
    """Run ``r`` forward from ``seeds`` (at the ambient precision) up to ``k_target``."""
    J = r.max_offset
    vals = dict(seeds)
    lead = r.coefficient(J)
    k = min(vals)
    while k_target not in vals:
        top = k + J
        if top not in vals:
            missing = [k + j for j, _ in r.terms[:-1] if k + j not in vals]
            if missing:
                raise UsageError(f"seeds do not determine index {top}: need {missing}")
            d = lead(k)
            if d == 0:
                raise DomainError(f"leading coefficient vanishes at k={k}")
            s = mpmath.fsum(_q(p(k)) * vals[k + j] for j, p in r.terms[:-1])
            vals[top] = -s / _q(d)
        k += 1
        if k > k_target:
            raise UsageError(f"index {k_target} is not reachable from the seeds")
    return vals[k_target]


def moment_table_C(ns, ks, P: int) -> dict[tuple[int, int], mpmath.mpf]:
    raw = bessel_moment_table(tuple(ns), tuple(ks), P)
    with mp.workdps(P + GUARD):
        return {(n, k): c_to_C(v, n, k) for (n, k), v in raw.items()}


def check_identities(P: int = 30) -> dict:
    """Closed forms of the small odd moments of ``K0^3`` and ``K0^4``.

    Also runs the ``n = 4`` recurrence forward from ``C(4,1), C(4,3)`` and
    compares the prediction for ``C(4,5)`` with quadrature.
    """
    if P > 50:
        raise DomainError("check_identities is limited to P <= 50")
    C = moment_table_C((3, 4), (1, 3, 5), P)
    with mp.workdps(P + GUARD):
        L = constant("L_minus3_2", P).value
        z3 = constant("zeta3", P).value
        expected = {
            "C(3,1) = L_-3(2)": (C[(3, 1)], L),
            "C(3,3) = 2L_-3(2)/9 - 4/27": (C[(3, 3)], 2 * L / 9 - mpmath.mpf(4) / 27),
            "C(4,1) = 7zeta(3)/12": (C[(4, 1)], 7 * z3 / 12),
            "C(4,3) = 7zeta(3)/288 - 1/48": (C[(4, 3)], 7 * z3 / 288 - mpmath.mpf(1) / 48),
        }
        tol = mpmath.mpf(10) ** (-(P - 5))
        items = []
        for name, (got, want) in expected.items():
            diff = abs(got - want)
            items.append({"identity": name, "abs_diff": mpmath.nstr(diff, 3), "passed": bool(diff < tol)})
        pred = transport(rec_C(4), {1: C[(4, 1)], 3: C[(4, 3)]}, 5)
        rel = abs(pred - C[(4, 5)]) / abs(C[(4, 5)])
        items.append({
            "identity": "C(4,5) by recurrence from C(4,1), C(4,3)",
            "relative_diff": mpmath.nstr(rel, 3),
            "passed": bool(rel < mpmath.mpf(10) ** -20),
        })
    return {"P": P, "identities": items, "passed": all(i["passed"] for i in items)}
