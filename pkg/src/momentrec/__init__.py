"""Exact moment recurrences for powers of D-finite functions.

The symbolic layer (exact rationals, polynomials, differential operators,
symmetric powers and closure) derives recurrences for Bessel moments
``int t^k K0(t)^n dt`` and for box integrals; :mod:`momentrec.numeric`
confirms them with high-precision quadrature.
"""

from .errors import DomainError, UsageError
from .exact import Polynomial, RationalFunction, content_primitive
from .operators import DOperator, ThetaOperator, d_to_theta, theta_to_d
from .recurrence import (
    Recurrence,
    WeightRatio,
    apply_weight,
    box_recurrence,
    mellin_recurrence,
    rec_c,
    rec_C,
    reduce_V,
    reindex,
)
from .sympower import K0_OPERATOR, SecondOrderTheta, symmetric_power, symmetric_power_commutative
from .closure import power_annihilator, product_annihilator

__all__ = [
    "DOperator",
    "DomainError",
    "K0_OPERATOR",
    "Polynomial",
    "RationalFunction",
    "Recurrence",
    "SecondOrderTheta",
    "ThetaOperator",
    "UsageError",
    "WeightRatio",
    "apply_weight",
    "box_recurrence",
    "content_primitive",
    "d_to_theta",
    "mellin_recurrence",
    "power_annihilator",
    "product_annihilator",
    "rec_C",
    "rec_c",
    "reduce_V",
    "reindex",
    "symmetric_power",
    "symmetric_power_commutative",
    "theta_to_d",
]
