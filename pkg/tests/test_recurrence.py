from fractions import Fraction
from itertools import product as iproduct
from math import comb, factorial

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momentrec.errors import DomainError, UsageError
from momentrec.exact import Polynomial, RationalFunction
from momentrec.operators import DOperator, ThetaOperator, theta_to_d
from momentrec.recurrence import (
    GAMMA_WEIGHT,
    Recurrence,
    VTerm,
    WeightRatio,
    apply_weight,
    box_recurrence,
    format_v_combination,
    mellin_recurrence,
    mellin_recurrence_d,
    mellin_recurrence_theta,
    rebase,
    rec_c,
    rec_C,
    reduce_V,
    reindex,
    shape_check,
)

from conftest import k_poly, lin, prod

K0_POW2_ODE = DOperator({(2, 3): 1, (1, 2): 3, (0, 1): 1, (2, 1): -4, (1, 0): -4})


def rec(seq, n, terms, var="k"):
    return Recurrence.build(seq, terms, var, n)


# golden C recurrences, transcribed term by term
def golden_C(n):
    k1, k2, k3, k4, k5, k6 = (lin(c) for c in range(1, 7))
    table = {
        1: {0: k1, 2: -k2},
        2: {0: k1**2, 2: -4 * k2**2},
        3: {0: k1**3, 2: -2 * k2 * (5 * k2**2 + 1), 4: 9 * prod(k2, k3, k4)},
        4: {0: k1**4, 2: -4 * k2**2 * (5 * k2**2 + 3), 4: 64 * prod(k2, k3**2, k4)},
        5: {
            0: k1**5,
            2: -k2 * k_poly(731, 1288, 882, 280, 35),
            4: prod(k2, k3, k4, k_poly(2435, 1554, 259)),
            6: -225 * prod(k2, k3, k4, k5, k6),
        },
        6: {
            0: k1**6,
            2: -8 * k2**2 * k_poly(171, 280, 182, 56, 7),
            4: 16 * prod(k2, k3**2, k4, k_poly(500, 294, 49)),
            6: -2304 * prod(k2, k3, k4**2, k5, k6),
        },
    }
    return rec("C", n, table[n])


@pytest.mark.parametrize("n", range(1, 7))
def test_rec_C_golden(n):
    assert rec_C(n) == golden_C(n)


def test_rec_c4_golden():
    expected = rec("c", 4, {0: -lin(1) ** 5, 2: 4 * lin(2) * k_poly(23, 20, 5), 4: k_poly(-192, -64)})
    assert rec_c(4) == expected


def test_rec_c2_from_k0_squared_operator():
    # 4(k+1) c(k+1) = k^3 c(k-1)
    expected = rec("c", None, {-1: k_poly(0, 0, 0, 1), 1: -4 * lin(1)})
    assert mellin_recurrence_d(K0_POW2_ODE, "c").same_relation(expected)
    assert rec_c(2).same_relation(expected)


def test_gamma_functional_equation():
    r = mellin_recurrence(DOperator({(0, 1): 1, (0, 0): 1}), "I")
    # Gamma(s+1) = s Gamma(s) with I(k) = Gamma(k+1)
    assert r.same_relation(rec("I", None, {0: lin(1), 1: k_poly(-1)}))
    for k in range(6):
        assert sum(p(k) * factorial(k + j) for j, p in r.terms) == 0


def test_taylor_mirror_of_exp():
    r = mellin_recurrence(DOperator({(0, 1): 1, (0, 0): 1}), "I")
    m = reindex(r, 1, "u")
    u = lambda s: Fraction((-1) ** s, factorial(s))
    for s in range(8):
        assert sum(p(s) * u(s + j) for j, p in m.terms) == 0


def test_mirror_of_rec_c2():
    m = reindex(rec_c(2))
    # 4k u(k-1) = (k+1)^3 u(k+1), shifted so the lowest offset is 0
    assert m.same_relation(rec("u", None, {0: 4 * lin(1), 2: -lin(2) ** 3}))
    u = {0: Fraction(1), 2: Fraction(1, 2), 4: Fraction(3, 32), 6: Fraction(5, 576)}
    for k in (0, 2, 4):
        assert sum(p(k) * u[k + j] for j, p in m.terms) == 0


def test_weight_c_to_C_n4_intermediate():
    # the unnormalized weighted form: -(3/2)(k+1)^4 C + ... is a scalar multiple
    r = rec_C(4)
    scaled = rec("C", 4, {0: -Fraction(3, 2) * lin(1) ** 4,
                          2: 6 * lin(2) ** 2 * k_poly(23, 20, 5),
                          4: -96 * prod(lin(4), lin(3) ** 2, lin(2))})
    assert r == scaled


def test_rec1_closed_form_numeric():
    # c(1,k) = 2^(k-1) Gamma((k+1)/2)^2, C(1,k) = 2 c(1,k) / k!
    r = rec_C(1)
    with mpmath.workdps(40):
        C = {k: 2 * 2 ** (k - 1) * mpmath.gamma(mpmath.mpf(k + 1) / 2) ** 2 / mpmath.factorial(k) for k in range(14)}
        for k in range(12):
            terms = [mpmath.mpf(int(p(k))) * C[k + j] for j, p in r.terms]
            assert abs(mpmath.fsum(terms)) / max(abs(x) for x in terms) < 1e-25


@pytest.mark.parametrize("n", range(1, 13))
def test_shape(n):
    assert shape_check(rec_c(n), n, "c").passed
    assert shape_check(rec_C(n), n, "C").passed


def test_shape_detects_violations():
    bad = rec("c", 2, {0: k_poly(1), 1: k_poly(1)})
    report = shape_check(bad, 2, "c")
    assert not report.passed
    assert any("odd" in v for v in report.violations)
    with pytest.raises(UsageError):
        shape_check(bad, 2, "x")


# -- properties --------------------------------------------------------------

coef_poly = st.lists(st.integers(-6, 6), min_size=1, max_size=4).map(lambda cs: Polynomial(cs, "k"))
recurrences = st.dictionaries(st.integers(0, 4), coef_poly, min_size=1, max_size=4).filter(
    lambda d: any(not p.is_zero() for p in d.values())
).map(lambda d: Recurrence.build("u", d))


@settings(max_examples=60, deadline=None)
@given(recurrences, st.integers(-3, 3))
def test_reindex_involution(r, shift):
    assert reindex(reindex(r, shift), shift) == r


@settings(max_examples=60, deadline=None)
@given(recurrences)
def test_weight_inverse(r):
    w = WeightRatio(1, RationalFunction(Polynomial([3, 2], "k"), Polynomial([1, 1], "k")))
    assert apply_weight(apply_weight(r, w), w.inverse()) == r


@settings(max_examples=40, deadline=None)
@given(recurrences)
def test_canonical_form_idempotent(r):
    assert Recurrence.build(r.sequence, r.terms, r.variable, r.n) == r
    assert r.terms[0][0] == 0
    assert r.terms[-1][1].leading > 0


@settings(max_examples=40, deadline=None)
@given(recurrences)
def test_json_roundtrip(r):
    assert Recurrence.from_json_obj(r.to_json()) == r


def test_json_errors():
    for bad in ("{", '{"sequence": "u"}', '{"sequence": "u", "variable": "k", "terms": [{"offset": 0, "coeff": ["x"]}]}'):
        with pytest.raises(UsageError):
            Recurrence.from_json_obj(bad)


theta_ops = st.dictionaries(
    st.tuples(st.integers(0, 3), st.integers(0, 3)), st.integers(-5, 5).map(Fraction), min_size=1, max_size=5
).map(ThetaOperator.from_dict).filter(lambda op: not op.is_zero())


@settings(max_examples=40, deadline=None)
@given(theta_ops)
def test_theta_and_d_extraction_agree(L):
    assert mellin_recurrence_theta(L).same_relation(mellin_recurrence_d(theta_to_d(L)))


def test_rebase():
    r = rec("u", None, {0: lin(1), 1: k_poly(-1)})
    s = rebase(r, -1, "v", "s")
    assert s.variable == "s"
    # (k+1) u(k) - u(k+1) with k = s - 1, canonical sign on the top offset
    assert s.terms == ((0, Polynomial([0, -1], "s")), (1, Polynomial([1], "s")))


def test_zero_operator_rejected():
    with pytest.raises(UsageError):
        mellin_recurrence(DOperator({}))
    with pytest.raises(UsageError):
        mellin_recurrence("D+1")
    with pytest.raises(UsageError):
        Recurrence.build("u", {0: k_poly()})


def test_weight_step_mismatch():
    with pytest.raises(UsageError):
        apply_weight(rec("u", None, {0: k_poly(1), 1: k_poly(1)}), WeightRatio(2, RationalFunction(k_poly(0, 1))))


# -- box integrals -----------------------------------------------------------

B4_GOLDEN = {
    8: prod(*(lin(c, "s") for c in (9, 10, 11, 12))),
    6: -10 * prod(lin(8, "s") ** 2, lin(9, "s"), lin(10, "s")),
    4: prod(lin(6, "s"), lin(8, "s"), Polynomial([1792, 500, 35], "s")),
    2: -2 * prod(Polynomial([148, 25], "s"), lin(4, "s"), lin(6, "s") ** 2),
    0: 24 * prod(lin(2, "s"), lin(4, "s") ** 2, lin(6, "s")),
}


def test_b4_golden():
    assert box_recurrence("B", 4) == Recurrence.build("B", B4_GOLDEN, "s", 4)


def annihilated_by(r, f):
    """``sum p_j(s) f(s + j)`` as a rational function of s."""
    s = Polynomial([0, 1], "s")
    total = RationalFunction(0, 1, "s")
    for j, p in r.terms:
        total = total + RationalFunction(p) * f(s + j)
    return total


def test_b1_closed_form_identically():
    r = box_recurrence("B", 1)
    assert annihilated_by(r, lambda x: RationalFunction(1, x + 1)).is_zero()


def test_delta1_closed_form_identically():
    r = box_recurrence("Delta", 1)
    assert annihilated_by(r, lambda x: RationalFunction(2, (x + 1) * (x + 2))).is_zero()


def b_even(n, m):
    """B_n(2m) = E[(r_1^2 + ... + r_n^2)^m] by the multinomial theorem, exactly."""
    total = Fraction(0)
    for parts in iproduct(range(m + 1), repeat=n):
        if sum(parts) != m:
            continue
        coeff = factorial(m)
        term = Fraction(1)
        for a in parts:
            coeff //= factorial(a)
            term /= 2 * a + 1
        total += coeff * term
    return total


def delta_even(n, m):
    d1 = lambda j: Fraction(2, (2 * j + 1) * (2 * j + 2))
    if n == 1:
        return d1(m)
    return sum(comb(m, j) * d1(j) * delta_even(n - 1, m - j) for j in range(m + 1))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_b_recurrence_on_even_values(n):
    r = box_recurrence("B", n)
    for m in range(0, 5):
        s = 2 * m
        assert sum(p(s) * b_even(n, m + j // 2) for j, p in r.terms) == 0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_delta_recurrence_on_even_values(n):
    r = box_recurrence("Delta", n)
    for m in range(0, 4):
        s = 2 * m
        assert sum(p(s) * delta_even(n, m + j // 2) for j, p in r.terms) == 0


def test_box_kind_errors():
    with pytest.raises(UsageError):
        box_recurrence("X", 2)
    with pytest.raises(UsageError):
        box_recurrence("B", 0)


# -- vacuum diagrams -----------------------------------------------------------

def test_reduce_v_single_step():
    terms = reduce_V(VTerm(1, 1, 1))
    assert [(t.key(), t.coeff) for t in terms] == [((0, 0, 2), -1)]
    assert format_v_combination(VTerm(1, 1, 1), terms) == "V(1,1,1) = −1·V(0,0,2)"


def test_reduce_v_two_steps():
    terms = reduce_V(VTerm(2, 2, 1))
    assert {t.key(): t.coeff for t in terms} == {(0, 0, 3): Fraction(4, 3), (1, 0, 3): Fraction(-1, 2)}


def test_reduce_v_already_reduced():
    assert [(t.key(), t.coeff) for t in reduce_V(VTerm(3, 0, 2))] == [((3, 0, 2), 1)]


def test_reduce_v_underflow():
    with pytest.raises(DomainError):
        reduce_V(VTerm(0, 2, 1))
    with pytest.raises(DomainError):
        reduce_V(VTerm(-1, 1, 1))


def test_reduce_v_is_broadhurst_relation():
    # 2(n+1)V(n,a,b) + a V(n,a-1,b+1) + b V(n+1,a+1,b-1) = 0 holds for the reductions
    def val(key):
        return {t.key(): t.coeff for t in reduce_V(VTerm(*key))}

    # with b >= 2 every term is reducible, so the relation must hold formally
    for n, a, b in [(1, 1, 2), (2, 1, 2), (3, 2, 2), (2, 0, 3), (3, 2, 3), (4, 3, 2)]:
        acc = {}
        for c, key in ((2 * (n + 1), (n, a, b)), (a, (n, a - 1, b + 1)), (b, (n + 1, a + 1, b - 1))):
            if c == 0:
                continue
            for k, v in val(key).items():
                acc[k] = acc.get(k, 0) + c * v
        assert all(v == 0 for v in acc.values())
