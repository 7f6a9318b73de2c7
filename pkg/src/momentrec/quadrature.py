"""Tanh-sinh (double-exponential) quadrature in mpmath arithmetic.

Nodes at level ``L`` are ``t = j / 2**L``; each level reuses the previous
level's function values, so the difference between consecutive levels is a
free error estimate. Integrands may be vector valued (a list of mpf), which
lets many moments share one set of expensive function evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath
from mpmath import mp

from .errors import DomainError


@dataclass(frozen=True)
class QuadratureSpec:
    scheme: str = "tanh-sinh"
    level: int = 0
    split_points: tuple = ()
    truncation: object = None


def _t_max(dps: int) -> mpmath.mpf:
    # nodes closer to an endpoint than (b-a)*10^(-3 dps) are dropped
    return mpmath.asinh(3 * dps * mpmath.log(10) / mpmath.pi)


def _node(t):
    """(delta, weight) for abscissa parameter t >= 0 on [0, 1]."""
    u = mpmath.pi / 2 * mpmath.sinh(t)
    e = mpmath.exp(2 * u)
    delta = 1 / (e + 1)
    w = mpmath.pi * mpmath.cosh(t) * e / (e + 1) ** 2
    return delta, w


def _as_list(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


def tanh_sinh(
    f: Callable,
    a,
    b,
    *,
    tol=None,
    min_level: int = 3,
    max_level: int = 12,
) -> tuple[list, mpmath.mpf, int]:
    """Integrate ``f`` over ``[a, b]`` at the current working precision.

    Returns ``(values, error_estimate, level)`` where ``values`` is a list
    (one entry per component of ``f``). Raises :class:`DomainError` if the
    relative level-to-level change stays above ``tol``.
    """
    a, b = mpmath.mpf(a), mpmath.mpf(b)
    L = b - a
    if tol is None:
        tol = mpmath.mpf(10) ** (-(mp.dps - 5))
    tmax = _t_max(mp.dps)

    def contrib(t) -> list:
        delta, w = _node(t)
        if t == 0:
            return [w * L * y for y in _as_list(f(a + L / 2))]
        lo = _as_list(f(a + L * delta))
        hi = _as_list(f(b - L * delta))
        return [w * L * (x + y) for x, y in zip(lo, hi)]

    # full sum at min_level
    h = mpmath.mpf(2) ** (-min_level)
    total = None
    j = 0
    while True:
        t = j * h
        if t > tmax:
            break
        c = contrib(t)
        total = c if total is None else [x + y for x, y in zip(total, c)]
        j += 1
    prev = [x * h for x in total]
    level = min_level
    err = mpmath.inf
    while level < max_level:
        level += 1
        h /= 2
        j = 1
        while True:
            t = j * h
            if t > tmax:
                break
            c = contrib(t)
            total = [x + y for x, y in zip(total, c)]
            j += 2
        cur = [x * h for x in total]
        err = max(abs(x - y) for x, y in zip(cur, prev))
        scale = max(abs(x) for x in cur)
        rel = max((abs(x - y) / abs(x) if x else abs(y)) for x, y in zip(cur, prev))
        prev = cur
        if rel <= tol or scale == 0:
            return cur, err, level
    raise DomainError(f"tanh-sinh did not converge to {mpmath.nstr(tol, 3)} (last change {mpmath.nstr(err, 3)})")


def integrate_pieces(f: Callable, points: Sequence, **kw) -> tuple[list, mpmath.mpf]:
    """Sum of :func:`tanh_sinh` over consecutive intervals of ``points``."""
    total = None
    err = mpmath.mpf(0)
    for a, b in zip(points[:-1], points[1:]):
        vals, e, _ = tanh_sinh(f, a, b, **kw)
        total = vals if total is None else [x + y for x, y in zip(total, vals)]
        err += e
    return total, err


def geometric_split(lo, hi, ratio=2) -> list:
    """``lo, lo*ratio, lo*ratio^2, ..., hi``."""
    pts = [mpmath.mpf(lo)]
    while pts[-1] * ratio < hi:
        pts.append(pts[-1] * ratio)
    pts.append(mpmath.mpf(hi))
    return pts


def exp_sinh(
    f: Callable,
    a,
    upper,
    *,
    tol=None,
    min_level: int = 3,
    max_level: int = 12,
) -> tuple[list, mpmath.mpf, int]:
    """Integrate over ``[a, upper]`` with ``x = a + exp(pi/2 sinh t)``.

    Meant for integrands decaying exponentially, with ``upper`` the truncation
    point beyond which the integrand is negligible. Nodes above ``upper`` are
    skipped; the left end may carry an integrable singularity.
    """
    a = mpmath.mpf(a)
    if tol is None:
        tol = mpmath.mpf(10) ** (-(mp.dps - 5))
    t_lo = -_t_max(mp.dps)
    t_hi = mpmath.asinh(2 * mpmath.log(mpmath.mpf(upper) - a) / mpmath.pi)

    def contrib(t) -> list:
        e = mpmath.exp(mpmath.pi / 2 * mpmath.sinh(t))
        w = mpmath.pi / 2 * mpmath.cosh(t) * e
        return [w * y for y in _as_list(f(a + e))]

    def sweep(h, start, step):
        acc = None
        for sign in (1, -1):
            j = start if sign == 1 else (start if start else step)
            while True:
                t = sign * j * h
                if t > t_hi or t < t_lo:
                    break
                c = contrib(t)
                acc = c if acc is None else [x + y for x, y in zip(acc, c)]
                j += step
        return acc

    h = mpmath.mpf(2) ** (-min_level)
    total = sweep(h, 0, 1)
    prev = [x * h for x in total]
    level = min_level
    err = mpmath.inf
    while level < max_level:
        level += 1
        h /= 2
        new = sweep(h, 1, 2)
        total = [x + y for x, y in zip(total, new)]
        cur = [x * h for x in total]
        err = max(abs(x - y) for x, y in zip(cur, prev))
        rel = max((abs(x - y) / abs(x) if x else abs(y)) for x, y in zip(cur, prev))
        prev = cur
        if rel <= tol:
            return cur, err, level
    raise DomainError(f"exp-sinh did not converge to {mpmath.nstr(tol, 3)} (last change {mpmath.nstr(err, 3)})")
