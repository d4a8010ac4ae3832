"""Unit tests for the extended-precision kernel layer."""

from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from qmspoly.numerics import (
    ConvergenceError,
    DomainError,
    ExponentialDecay,
    GaussianDecay,
    ParameterError,
    PoleError,
    bessel_j,
    bessel_k,
    bessel_moment_quad,
    gamma,
    gauss_legendre,
    genhyp,
    ladder_agrees,
    quad_semiinf,
    rational,
    to_mpf,
)


def test_to_mpf_handles_fractions_and_strings():
    with mp.workprec(128):
        assert to_mpf(Fraction(1, 3)) == mp.mpf(1) / 3
        assert to_mpf("0.5") == mp.mpf("0.5")
        assert to_mpf(7) == 7


def test_gamma_half_integer():
    v = gamma(Fraction(1, 2), 128)
    with mp.workprec(128):
        assert abs(v - mp.sqrt(mp.pi)) < mp.mpf(2) ** -120


def test_gamma_pole():
    with pytest.raises(PoleError):
        gamma(-3, 64)
    with pytest.raises(PoleError):
        gamma(0, 64)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 400), st.integers(1, 40))
def test_gamma_functional_equation(num, den):
    # Gamma(x + 1) = x Gamma(x) across random positive rationals
    x = Fraction(num, den)
    p = 128
    with mp.workprec(p):
        lhs = gamma(x + 1, p)
        rhs = to_mpf(x) * gamma(x, p)
        assert abs(lhs - rhs) <= abs(rhs) * mp.mpf(2) ** (-p + 12)


def test_bessel_domain_checks():
    with pytest.raises(DomainError):
        bessel_j(0, -1, 64)
    with pytest.raises(DomainError):
        bessel_k(Fraction(1, 6), 0, 64)


def test_genhyp_matches_exp_and_mpmath():
    p = 128
    with mp.workprec(p):
        # 0F0(x) = e^x
        assert abs(genhyp([], [], mp.mpf("0.7"), p) - mp.e ** mp.mpf("0.7")) \
            < mp.mpf(2) ** -120
        val = genhyp([Fraction(1, 3)], [Fraction(2, 3), Fraction(7, 6)],
                     mp.mpf(2), p)
        ref = mp.hyper([mp.mpf(1) / 3], [mp.mpf(2) / 3, mp.mpf(7) / 6], 2)
        assert abs(val - ref) < abs(ref) * mp.mpf(2) ** -110


def test_genhyp_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        genhyp([1], [-2], 0.5, 64)
    with pytest.raises(ConvergenceError):
        genhyp([1, 1], [], 0.5, 64)          # divergent 2F0
    with pytest.raises(ConvergenceError):
        genhyp([1, 1], [2], 1.5, 64)         # 2F1 outside |x| < 1


def test_gauss_legendre_integrates_polynomials_exactly():
    p = 128
    nodes, weights = gauss_legendre(8, p)
    with mp.workprec(p):
        # degree-15 monomial integrated exactly by 8 nodes
        val = sum(w * x ** 14 for x, w in zip(nodes, weights))
        assert abs(val - mp.mpf(2) / 15) < mp.mpf(2) ** -120
        assert abs(sum(weights) - 2) < mp.mpf(2) ** -120


def test_quad_semiinf_gaussian_moment():
    p = 160
    with mp.workprec(p):
        a = mp.mpf("1.25")
        res = quad_semiinf(lambda r: r ** 3 * mp.e ** (-a * r * r),
                           GaussianDecay(float(a), 1.0, 3.0), p)
        exact = 1 / (2 * a * a)
        assert abs(res.value - exact) < abs(exact) * mp.mpf(2) ** (-p + 20)
        assert res.error_estimate < abs(exact) * mp.mpf(2) ** (-p + 24)


def test_quad_semiinf_exponential_decay():
    p = 128
    with mp.workprec(p):
        res = quad_semiinf(lambda t: t * mp.e ** (-2 * t),
                           ExponentialDecay(2.0, 1.0, 1.0), p)
        assert abs(res.value - mp.mpf(1) / 4) < mp.mpf(2) ** (-p + 20)


def test_bessel_moment_against_closed_form():
    # int_0^inf r e^(-a r^2) J_0(c r) dr = e^(-c^2/(4a)) / (2a)
    p = 128
    with mp.workprec(p):
        a, c = mp.mpf(1), mp.mpf(3)
        res = bessel_moment_quad(1, a, c, 1, 0, p)
        exact = mp.e ** (-c * c / (4 * a)) / (2 * a)
        assert abs(res.value - exact) < abs(exact) * mp.mpf(2) ** (-p + 24)


def test_bessel_moment_oscillatory_route_matches_brute_force():
    # large c r^d forces the rotated-contour path; compare against a slow
    # real-axis evaluation at matching precision
    p = 96
    with mp.workprec(p + 64):
        a = mp.mpf("0.5")
        res = bessel_moment_quad(9, a, mp.mpf(2), 3, 2, p)
        brute = mp.quad(
            lambda r: r ** 9 * mp.e ** (-a * r * r) * mp.besselj(2, 2 * r ** 3),
            [0, 1, 2, 3, 4, 5, 6, 8, 10, 12])
        assert abs(res.value - brute) < abs(brute) * mp.mpf(2) ** (-p + 30)


def test_bessel_moment_negative_order_sign():
    p = 96
    with mp.workprec(p):
        plus = bessel_moment_quad(4, 1, 1, 3, 1, p)
        minus = bessel_moment_quad(4, 1, 1, 3, -1, p)
        assert abs(plus.value + minus.value) < mp.mpf(2) ** (-p + 16)


def test_ladder_agrees():
    with mp.workprec(64):
        assert ladder_agrees(mp.mpf(1), mp.mpf(1) + mp.mpf(2) ** -40,
                             mp.mpf(2) ** -30)
        assert not ladder_agrees(mp.mpf(1), mp.mpf(2), mp.mpf(2) ** -30)
        assert ladder_agrees(mp.mpf(2) ** -80, mp.mpf(0), mp.mpf(2) ** -30)


def test_rational():
    assert rational(2, 4) == Fraction(1, 2)
    assert rational(5) == 5
