"""Closed-form calculus for exponential-polynomial integrands.

Everything reduces to the identity

    ∫ Q(x) e^{ax} dx = e^{ax} Σ_k (−1)^k a^{−k−1} Q^{(k)}(x),

whose terms cancel catastrophically as a → 0. Two guards are used: the
closed form is evaluated with extra working bits proportional to the
expected cancellation, and below |a| < 1e-4 adaptive Gauss-Legendre
quadrature replaces it altogether.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .polycore import Poly, as_exact

SMALL_A = 1e-4
MIN_BITS = 80


class NumericIntegrityError(ArithmeticError):
    pass


class DivergentIntegralError(ValueError):
    pass


def mpf(x) -> mpmath.mpf:
    """Convert ints, Fractions, strings or mpf to mpf at current precision."""
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def ensure_precision(bits: int | None = None) -> int:
    """Raise the global mpmath precision to at least ``bits`` (≥ 80)."""
    bits = max(MIN_BITS, bits or 0)
    if mpmath.mp.prec < bits:
        mpmath.mp.prec = bits
    return mpmath.mp.prec


@dataclass(frozen=True)
class ExpPoly:
    """The function x ↦ e^{rate·x} · poly(x)."""

    poly: Poly
    rate: object

    def __call__(self, x):
        x = mpf(x)
        return mpmath.exp(mpf(self.rate) * x) * self.poly(x)

    def shifted(self, x, x0):
        """e^{rate·(x − x0)} · poly(x); avoids forming huge exponentials."""
        x = mpf(x)
        return mpmath.exp(mpf(self.rate) * (x - mpf(x0))) * self.poly(x)

    def deriv(self) -> "ExpPoly":
        return ExpPoly(self.poly * self.rate + self.poly.deriv(), self.rate)


def exp_antiderivative(Q: Poly, a) -> ExpPoly:
    """Return e^{ax} P̃(x) with (e^{ax} P̃)' = Q e^{ax}.

    ``a`` may be a Fraction, in which case P̃ is exact.

    Raises
    ------
    ZeroDivisionError
        For a = 0; use :meth:`Poly.antideriv` instead.
    """
    a = as_exact(a)
    if a == 0:
        raise ZeroDivisionError("a = 0: use exact polynomial antidifferentiation")
    out = Poly()
    D = Q
    inv = 1 / a if isinstance(a, Fraction) else 1 / mpf(a)
    fac = inv
    k = 0
    while not D.is_zero:
        out = out + D * ((-1) ** k * fac)
        D = D.deriv()
        fac = fac * inv
        k += 1
    return ExpPoly(out, a)


def _extra_bits(P: Poly, a, scale) -> int:
    # cancellation of the a^{-k-1} terms, roughly (deg+1) * log2(1/(|a| scale))
    la = abs(float(a)) * max(float(scale), 1.0)
    if la >= 1:
        return 16
    return 16 + int((P.degree + 2) * math.ceil(-math.log2(la)))


def _quad(f, lo, hi, pieces: int = 8):
    lo, hi = mpf(lo), mpf(hi)
    nodes = [lo + (hi - lo) * k / pieces for k in range(pieces + 1)]
    return mpmath.quad(f, nodes, method="gauss-legendre")


def poly_exp_integral(P: Poly, lo, hi, a, verify: bool = False):
    """∫_lo^hi P(x) e^{ax} dx.

    Exact when a = 0 and all data are rational. Uses quadrature for
    0 < |a| < 1e-4, the boosted closed form otherwise.
    """
    a = as_exact(a)
    if a == 0:
        if P.is_exact and isinstance(as_exact(lo), Fraction) and isinstance(as_exact(hi), Fraction):
            return P.integrate(as_exact(lo), as_exact(hi))
        return P.to_mpf().integrate(mpf(lo), mpf(hi))
    if abs(float(a)) < SMALL_A:
        Pm = P.to_mpf()
        am = mpf(a)
        return _quad(lambda x: Pm(x) * mpmath.exp(am * x), lo, hi)
    scale = max(abs(float(lo)), abs(float(hi)))
    with mpmath.workprec(mpmath.mp.prec + _extra_bits(P, a, scale)):
        E = exp_antiderivative(P.to_mpf(), mpf(a))
        val = E(hi) - E(lo)
    val = +val
    if verify:
        Pm = P.to_mpf()
        am = mpf(a)
        f = lambda x: Pm(x) * mpmath.exp(am * x)
        ref = _quad(f, lo, hi)
        absref = _quad(lambda x: abs(f(x)), lo, hi, pieces=32)
        if abs(val - ref) > 1e-10 * max(abs(ref), absref):
            raise NumericIntegrityError(f"closed form {val} vs quadrature {ref}")
    return val


def weighted_integrand(d_B: int, p_c: Poly, q: Poly) -> Poly:
    """x^{d_B} p_c(x) q(x)."""
    return (p_c * q).shift_power(d_B)


def weighted_moment(lo, hi, d_B: int, p_c: Poly, q: Poly, a, verify: bool = False):
    """∫_lo^hi x^{d_B} e^{ax} p_c(x) q(x) dx; exact rational when a = 0."""
    if not lo < hi:
        raise ValueError("weighted_moment needs lo < hi")
    return poly_exp_integral(weighted_integrand(d_B, p_c, q), lo, hi, a, verify=verify)


def tail_moment(lo, d_B: int, Q: Poly, a, verify: bool = False):
    """∫_lo^∞ x^{d_B} Q(x) e^{ax} dx = −e^{a·lo} P̃(lo), for a < 0."""
    if not a < 0:
        raise DivergentIntegralError("tail moment diverges unless a < 0")
    P = Q.shift_power(d_B)
    scale = abs(float(lo))
    with mpmath.workprec(mpmath.mp.prec + _extra_bits(P, a, scale)):
        E = exp_antiderivative(P.to_mpf(), mpf(a))
        val = -E(lo)
    val = +val
    if verify:
        Pm = P.to_mpf()
        am = mpf(a)
        L = mpf(lo)
        ref = mpmath.quad(lambda x: Pm(x) * mpmath.exp(am * x),
                          [L, L + 50 / abs(am), mpmath.inf])
        if abs(val - ref) > 1e-10 * max(abs(ref), 1e-30):
            raise NumericIntegrityError(f"tail closed form {val} vs quadrature {ref}")
    return val
