from fractions import Fraction as Fr

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from hamforge import expcalc
from hamforge.expcalc import DivergentIntegralError, ensure_precision, mpf
from hamforge.polycore import Poly


def test_precision_floor():
    assert ensure_precision(10) >= expcalc.MIN_BITS
    assert mpmath.mp.prec >= expcalc.MIN_BITS


def test_mpf_from_fraction():
    assert mpf(Fr(1, 3)) * 3 == 1


def test_exp_antiderivative_derivative():
    Q = Poly([1, -2, 3, 1])
    E = expcalc.exp_antiderivative(Q, mpf("-0.7"))
    x = mpf("1.3")
    assert abs(mpmath.diff(E, x) - Q(x) * mpmath.exp(mpf("-0.7") * x)) < mpf(10) ** -20


def test_zero_rate_is_exact():
    P = Poly([0, 0, 3])
    assert expcalc.poly_exp_integral(P, 0, 2, 0) == 8


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=5),
       st.fractions(min_value=-3, max_value=3, max_denominator=8))
def test_integral_against_quadrature(coeffs, a):
    P = Poly(coeffs)
    lo, hi = mpf("0.5"), mpf("2.5")
    got = expcalc.poly_exp_integral(P, lo, hi, a)
    ref = mpmath.quad(lambda x: P.to_mpf()(x) * mpmath.exp(mpf(a) * x), [lo, hi])
    assert abs(got - ref) <= mpf(10) ** -20 * max(1, abs(ref))


def test_large_rate_verified():
    # cancellation-prone regime, cross-checked internally by quadrature
    P = Poly([1, 0, 0, 0, 1])
    got = expcalc.poly_exp_integral(P, 1, 30, mpf(-4), verify=True)
    ref = mpmath.quad(lambda x: (1 + x ** 4) * mpmath.exp(-4 * x), [1, 5, 30])
    assert abs(got / ref - 1) < mpf(10) ** -20


def test_tail_moment():
    # ∫_1^∞ x^3 (4 + x^2) e^{-x} dx against quadrature
    Q = Poly([4, 0, 1])
    got = expcalc.tail_moment(1, 3, Q, -1)
    ref = mpmath.quad(lambda x: x ** 3 * (4 + x * x) * mpmath.exp(-x), [1, mpmath.inf])
    assert abs(got / ref - 1) < mpf(10) ** -20


def test_tail_moment_divergent():
    with pytest.raises(DivergentIntegralError):
        expcalc.tail_moment(1, 3, Poly([1]), 1)


def test_small_rate_continuity():
    P = Poly([1, 2, 3])
    exact = expcalc.poly_exp_integral(P, 1, 2, 0)
    near = expcalc.poly_exp_integral(P, 1, 2, mpf("1e-6"))
    assert abs(near / exact - 1) < 1e-4
