import mpmath
import pytest
from mpmath import mp

from momentrec.errors import DomainError, UsageError
from momentrec.exact import Polynomial
from momentrec.numeric import (
    bessel_moment_table,
    box_direct,
    box_from_mellin,
    c_to_C,
    check_identities,
    check_recurrence,
    constant,
    constant_methods,
    digamma,
    eval_K0,
    eval_special,
    k0_integral,
    k0_series,
    moment_box,
    moment_c,
    moment_C,
    moment_V,
    transport,
    trigamma,
)
from momentrec.quadrature import exp_sinh, geometric_split, integrate_pieces, tanh_sinh
from momentrec.recurrence import Recurrence, rec_C, rec_c


def close(x, y, digits):
    with mp.workdps(digits + 10):
        x = x.value if hasattr(x, "value") else mpmath.mpmathify(x)
        y = y.value if hasattr(y, "value") else mpmath.mpmathify(y)
        return abs(x - y) <= max(abs(y), 1) * mpmath.mpf(10) ** (-digits)


# -- quadrature ----------------------------------------------------------------

def test_tanh_sinh_endpoint_singularities():
    with mp.workdps(40):
        v, err, _ = tanh_sinh(lambda x: mpmath.sqrt(x), 0, 1)
        assert abs(v[0] - mpmath.mpf(2) / 3) < mpmath.mpf(10) ** -35
        v, _, _ = tanh_sinh(lambda x: mpmath.log(x), 0, 1)
        assert abs(v[0] + 1) < mpmath.mpf(10) ** -35
        assert err < mpmath.mpf(10) ** -30


def test_tanh_sinh_vector_valued():
    with mp.workdps(30):
        v, _, _ = tanh_sinh(lambda x: [x, x * x, mpmath.exp(x)], 0, 2)
        assert close(v[0], 2, 25) and close(v[1], mpmath.mpf(8) / 3, 25) and close(v[2], mpmath.e**2 - 1, 25)


def test_tanh_sinh_reports_failure():
    with mp.workdps(30):
        with pytest.raises(DomainError):
            tanh_sinh(lambda x: mpmath.sin(200 * x), 0, 1, max_level=4)


def test_exp_sinh_tail():
    with mp.workdps(40):
        v, _, _ = exp_sinh(lambda x: mpmath.exp(-x), 1, 120)
        assert abs(v[0] - mpmath.exp(-1)) < mpmath.mpf(10) ** -35


def test_integrate_pieces():
    with mp.workdps(30):
        pts = geometric_split(1, 10)
        assert pts[0] == 1 and pts[-1] == 10 and len(pts) == 5
        v, _ = integrate_pieces(lambda x: 1 / x, pts)
        assert close(v[0], mpmath.log(10), 25)


# -- K0 and special functions ------------------------------------------------------

def test_k0_at_one():
    v = eval_K0(1, 30)
    assert str(v).startswith("0.42102443824070833333562737921")


def test_k0_large_argument_asymptotics():
    v = eval_K0(30, 20).value
    ratio = v * mpmath.sqrt(2 * 30 / mpmath.pi) * mpmath.exp(30)
    assert abs(ratio - 1) < 0.02


def test_k0_small_argument_limit():
    t = mpmath.mpf("1e-6")
    v = eval_K0(t, 20).value
    assert abs(v + mpmath.log(t) - (mpmath.ln2 - mpmath.euler)) < 1e-10


@pytest.mark.parametrize("t", ["1e-4", "0.01", "0.5", "2", "7.5", "20", "50"])
def test_k0_methods_agree(t):
    P = 30
    with mp.workdps(P + 10):
        a, b = k0_integral(mpmath.mpf(t), P), k0_series(mpmath.mpf(t), P)
        assert abs(a - b) <= abs(a) * mpmath.mpf(10) ** (-P)
        assert abs(a - mpmath.besselk(0, mpmath.mpf(t))) <= abs(a) * mpmath.mpf(10) ** (-P)


def test_k0_domain():
    for t in (0, -1):
        with pytest.raises(DomainError):
            eval_K0(t, 20)


def test_special_limits():
    assert abs(eval_special("b", mpmath.mpf("1e-8"), 20).value - 1) < 1e-15
    assert abs(eval_special("d", mpmath.mpf("1e-8"), 20).value - 1) < 1e-15
    assert abs(eval_special("b", 50, 20).value * 50 - mpmath.sqrt(mpmath.pi) / 2) < 1e-15


def test_special_series_meets_closed_form():
    with mp.workdps(40):
        for u in ("0.3", "0.99"):
            u = mpmath.mpf(u)
            b = mpmath.sqrt(mpmath.pi) * mpmath.erf(u) / (2 * u)
            d = (mpmath.exp(-u * u) - 1 + mpmath.sqrt(mpmath.pi) * u * mpmath.erf(u)) / u**2
            assert close(eval_special("b", u, 30), b, 28)
            assert close(eval_special("d", u, 30), d, 28)


def test_k1_by_own_quadrature():
    for u in ("0.1", "1", "12"):
        with mp.workdps(50):
            assert close(eval_special("K1", mpmath.mpf(u), 30), mpmath.besselk(1, mpmath.mpf(u)), 28)


def test_special_errors():
    with pytest.raises(UsageError):
        eval_special("J0", 1)
    with pytest.raises(DomainError):
        eval_special("K1", 0)
    with pytest.raises(DomainError):
        eval_special("b", -1)


# -- moments -----------------------------------------------------------------------

def test_first_moment():
    with mp.workdps(50):
        assert close(moment_c(1, 0, 30), mpmath.pi / 2, 29)


def test_c1_closed_form():
    table = bessel_moment_table((1,), tuple(range(8)), 30)
    with mp.workdps(40):
        for k in range(8):
            want = 2 ** (k - 1) * mpmath.gamma(mpmath.mpf(k + 1) / 2) ** 2
            assert close(table[(1, k)], want, 29)


def test_c_to_C_known_values():
    with mp.workdps(50):
        assert close(moment_C(4, 1, 30), 7 * mpmath.zeta(3) / 12, 28)
        assert close(moment_C(3, 1, 30), constant("L_minus3_2", 30), 28)


def test_moment_table_errors():
    with pytest.raises(UsageError):
        bessel_moment_table((0,), (1,), 20)


def test_box_direct_trivial_cases():
    assert abs(box_direct(4, 2.0) - 4 / 3) < 1e-8
    for s in (1, 3):
        assert abs(box_direct(1, float(s)) - 1 / (s + 1)) < 1e-10
    with pytest.raises(DomainError):
        box_direct(5, 1.0)


def test_box_mellin_closed_forms():
    # B_1(-s) = 1/(1-s) and Delta_1(-s) = 2/((1-s)(2-s)) for 0 < s < 1
    s = mpmath.mpf("0.5")
    with mp.workdps(40):
        assert close(box_from_mellin("B", 1, s, 25), 1 / (1 - s), 23)
        assert close(box_from_mellin("Delta", 1, s, 25), 2 / ((1 - s) * (2 - s)), 23)


def test_box_mellin_matches_cube_quadrature():
    assert abs(float(box_from_mellin("B", 4, 1, 20).value) - box_direct(4, -1.0)) < 1e-9


def test_box_strip():
    with pytest.raises(DomainError):
        moment_box("M_b", 2, 2, 20)
    with pytest.raises(DomainError):
        moment_box("M_d", 2, 0, 20)
    with pytest.raises(UsageError):
        moment_box("M_x", 2, 1, 20)


def test_vacuum_integrals():
    with mp.workdps(30):
        assert close(moment_V(1, 1, 1, 25), -moment_V(0, 0, 2, 25).value, 20)
        rhs = mpmath.mpf(4) / 3 * moment_V(0, 0, 3, 25).value - moment_V(1, 0, 3, 25).value / 2
        assert close(moment_V(2, 2, 1, 25), rhs, 20)
    assert moment_V(0, 0, 1, 20).value < 0


def test_broadhurst_relation_numerically():
    # 2(n+1) V(n,a,b) + a V(n,a-1,b+1) + b V(n+1,a+1,b-1) = 0
    with mp.workdps(30):
        for n, a, b in [(0, 1, 1), (1, 2, 1), (2, 1, 2)]:
            total = 2 * (n + 1) * moment_V(n, a, b, 25).value + a * moment_V(n, a - 1, b + 1, 25).value
            total += b * moment_V(n + 1, a + 1, b - 1, 25).value
            assert abs(total) < mpmath.mpf(10) ** -20 * abs(moment_V(n, a, b, 25).value)


def test_vacuum_domain():
    with pytest.raises(DomainError):
        moment_V(1, 0, 0)


# -- constants --------------------------------------------------------------------

def test_constants_values():
    assert str(constant("zeta3", 30)).startswith("1.20205690315959428539973816151")
    # 0.7813024128964864 is the value rounded to 16 digits
    assert abs(constant("L_minus3_2", 20).value - mpmath.mpf("0.7813024128964864")) < 1e-16


@pytest.mark.parametrize("name", ["zeta3", "L_minus3_2", "euler_gamma", "ln2"])
def test_constant_methods_agree(name):
    a, b = constant_methods(name, 40)
    with mp.workdps(50):
        assert abs(a - b) <= abs(a) * mpmath.mpf(10) ** -40


def test_polygamma_helpers():
    with mp.workdps(40):
        assert close(trigamma(mpmath.mpf(1) / 3, 35), mpmath.psi(1, mpmath.mpf(1) / 3), 33)
        assert close(digamma(mpmath.mpf("2.5"), 35), mpmath.digamma(mpmath.mpf("2.5")), 33)


def test_constant_unknown():
    with pytest.raises(UsageError):
        constant("pi")


# -- recurrence checks ----------------------------------------------------------------

def test_check_recurrence_c4():
    table = bessel_moment_table((4,), tuple(range(11)), 30)
    with mp.workdps(45):
        values = {k: c_to_C(table[(4, k)], 4, k) for k in range(11)}
    report = check_recurrence(rec_C(4), values, 30)
    assert float(report["max_relative_residual"]) < 1e-15
    assert [e["k"] for e in report["per_k"]] == list(range(7))
    assert set(report) >= {"target", "P", "max_relative_residual", "per_k"}


def test_check_recurrence_degenerate_and_missing():
    r = rec_c(2)
    report = check_recurrence(r, {k: 0 for k in range(6)}, 20)
    assert report["degenerate"] and float(report["max_relative_residual"]) == 0
    with pytest.raises(UsageError):
        check_recurrence(r, {0: 1}, 20)


def test_check_recurrence_rec1_closed_form():
    with mp.workdps(45):
        values = {k: 2 * 2 ** (k - 1) * mpmath.gamma(mpmath.mpf(k + 1) / 2) ** 2 / mpmath.factorial(k) for k in range(12)}
    assert float(check_recurrence(rec_C(1), values, 30)["max_relative_residual"]) < 1e-25


def test_transport_errors():
    r = rec_c(2)
    with pytest.raises(UsageError):
        transport(r, {0: 1}, 5)
    singular = Recurrence.build("u", {0: Polynomial([1], "k"), 1: Polynomial([-2, 1], "k")})
    with pytest.raises(DomainError):
        transport(singular, {0: 1, 1: 1}, 4)


def test_identities():
    report = check_identities(30)
    assert report["passed"], report
    with pytest.raises(DomainError):
        check_identities(60)
