"""Tests of the twisted pairing: sign bookkeeping, moments, Gram matrices."""

from fractions import Fraction

import mpmath as mp
import pytest

from qmspoly.density import (
    GramMatrix,
    PotentialSpec,
    gram,
    l_apply_monomial,
    moment,
    moment_direct2d,
    moment_with_error,
    rescale,
    sign_data,
)
from qmspoly.numerics import DomainError


def test_spec_defaults_and_validation():
    spec = PotentialSpec(3, 1)
    assert spec.t == Fraction(1, 3)
    assert spec.canonical
    assert not PotentialSpec(3, 1, "0.25").canonical
    with pytest.raises(DomainError):
        PotentialSpec(0, 1)
    with pytest.raises(DomainError):
        PotentialSpec(3, -1)


def test_tau_pattern():
    # tau is -1 exactly at indices = -1 mod d, and only for even d
    sd3, sd4 = sign_data(3), sign_data(4)
    assert [sd3.tau(ell) for ell in range(6)] == [1, 1, 1, 1, 1, 1]
    assert [sd4.tau(ell) for ell in range(8)] == [1, 1, 1, -1, 1, 1, 1, -1]


def test_rho_pattern():
    sd3 = sign_data(3)
    assert [sd3.rho(n) for n in range(9)] == [1, -1, 1, -1, 1, -1, 1, -1, 1]
    sd4 = sign_data(4)
    assert [sd4.rho(n) for n in range(8)] == [1, -1, 1, -1, -1, 1, -1, 1]


def test_sign_factor_epsilon_independent():
    # every primitive solution of eps^d = -1 gives the same pairing
    sd = sign_data(4)
    for m in range(16):
        base = sd.sign_factor(m)
        for u in (3, 5, 7, 9):
            assert sd.sign_factor_for_epsilon(m, u) == base
    with pytest.raises(DomainError):
        sd.sign_factor_for_epsilon(0, 2)


def test_sign_factor_gives_diagonal_rho():
    # diagonal moments carry sign rho(n): (z^n, z^n) = rho(n) * positive
    for d in (3, 4, 5):
        sd = sign_data(d)
        for n in range(3 * d):
            assert sd.sign_factor(n) == sd.rho(n)


def test_moment_zero_between_weights():
    spec = PotentialSpec(3, 1)
    assert moment(spec, 0, 1, 64) == 0
    assert moment(spec, 2, 5, 64) != 0


def test_moment_t_zero_exact():
    spec = PotentialSpec(3, 2, 0)
    p = 128
    with mp.workprec(p):
        for n in range(5):
            val = moment(spec, n, n, p)
            exact = sign_data(3).rho(n) * mp.pi * mp.factorial(n) \
                / mp.mpf(2) ** (n + 1)
            assert abs(val - exact) < abs(exact) * mp.mpf(2) ** (-p + 8)


def test_moment_d3_closed_form():
    # (1,1) for d=3, a=2 equals e^(4/3) sqrt(2 pi/3) K_{1/6}(4/3) (times 2pi/ ...)
    p = 128
    spec = PotentialSpec(3, 2)
    with mp.workprec(p):
        x = mp.mpf(8) / 6
        exact = mp.e ** x * mp.sqrt(mp.pi * 2 / 3) * mp.besselk(mp.mpf(1) / 6, x)
        val = moment(spec, 0, 0, p)
        assert abs(val.imag) < mp.mpf(2) ** (-p + 16)
        assert abs(val.real - exact) < abs(exact) * mp.mpf(2) ** (-p + 24)


@pytest.mark.parametrize("d,a,n,m",
                         [(3, 1, 0, 0), (3, 1, 1, 1), (3, 1, 4, 1),
                          (4, 2, 5, 1)])
def test_moment_against_direct_2d_quadrature(d, a, n, m):
    # reduction-free polar quadrature agrees with the angular reduction;
    # the even-d case exercises the extra integration-by-parts sign, and
    # needs the stronger Gaussian so the fixed radial grid resolves all
    # oscillations that still carry amplitude
    spec = PotentialSpec(d, a)
    with mp.workprec(80):
        fast = moment(spec, n, m, 64)
        slow = moment_direct2d(spec, n, m, 48)
        scale = max(abs(fast), abs(slow))
        assert abs(fast - slow) < scale * mp.mpf(2) ** -40


def test_moment_error_estimate_honest():
    spec = PotentialSpec(3, 1)
    with mp.workprec(160):
        v64, e64 = moment_with_error(spec, 4, 1, 64)
        v128, _ = moment_with_error(spec, 4, 1, 128)
        assert abs(v64 - v128) <= 4 * e64 + abs(v128) * mp.mpf(2) ** -60


def test_gram_hermitian_and_patterned():
    spec = PotentialSpec(3, 1)
    G = gram(spec, 5, 64)
    with mp.workprec(96):
        for n in range(6):
            for m in range(6):
                assert G[n, m] == mp.conj(G[m, n])
                if (n - m) % 3:
                    assert G[n, m] == 0


def test_gram_det_real():
    G = gram(PotentialSpec(3, 1), 4, 64)
    with mp.workprec(96):
        detv = G.det()
        assert abs(detv.imag) < abs(detv) * mp.mpf(2) ** -40


def test_rescale_to_canonical_strength():
    p = 96
    with mp.workprec(p):
        a_new, lam = rescale(1, 1, 3)
        assert abs(lam - mp.mpf(3) ** (-mp.mpf(1) / 3)) < mp.mpf(2) ** -80
        assert abs(a_new - lam * lam) < mp.mpf(2) ** -80
        # moments of the rescaled spec match the original up to lambda powers
        spec = PotentialSpec(3, 1, 1)
        canon = PotentialSpec(3, mp.nstr(a_new, 45))
        m_orig = moment(spec, 3, 0, p)
        m_canon = moment(canon, 3, 0, p)
        assert abs(m_orig - m_canon * lam ** 5) \
            < abs(m_orig) * mp.mpf(2) ** (-p + 30)
    with pytest.raises(DomainError):
        rescale(1, 0, 3)


def test_l_apply_monomial():
    spec = PotentialSpec(3, 1)
    out = l_apply_monomial(spec, 2)
    with mp.workprec(64):
        assert abs(out[1] - 2) < mp.mpf(2) ** -50
        assert abs(out[4] - 1j) < mp.mpf(2) ** -50
        out0 = l_apply_monomial(spec, 0)
        assert set(out0) == {2}
