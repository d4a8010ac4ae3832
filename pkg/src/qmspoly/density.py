"""Indefinite hermitian inner product for the complex monomial density.

The density exp(-a|z|^2 + i t (z^d + conj(z)^d)) defines a sesquilinear
pairing on polynomials via a sign twist on the second argument.  This module
computes its moments by analytic angular reduction to a 1-D Bessel radial
integral, assembles Gram matrices, and exposes the sign bookkeeping (chi,
tau, rho).  It is the quadrature-based oracle against which all
recurrence-derived results are checked.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath as mp

from .numerics import (
    DEFAULT_PRECISION,
    GUARD_BITS,
    DomainError,
    XComplex,
    XReal,
    bessel_moment_quad,
    gauss_legendre,
    to_mpf,
)


@dataclass(frozen=True)
class PotentialSpec:
    """Monomial degree d and Gaussian strength a; t defaults to 1/d.

    a and t are kept in their exact input form (int, Fraction, decimal
    string) and converted to mpf at the working precision of each use.
    """

    d: int
    a: object
    t: object = None

    def __post_init__(self):
        if self.d < 1:
            raise DomainError("d must be a positive integer")
        if float(to_mpf(self.a)) <= 0:
            raise DomainError("a must be positive")
        if self.t is None:
            object.__setattr__(self, "t", Fraction(1, self.d))

    def a_mpf(self) -> XReal:
        return to_mpf(self.a)

    def t_mpf(self) -> XReal:
        return to_mpf(self.t)

    @property
    def canonical(self) -> bool:
        try:
            return Fraction(str(self.t)) == Fraction(1, self.d)
        except ValueError:
            return False


@dataclass(frozen=True)
class SignData:
    """Sign bookkeeping of the twisted pairing for given d.

    epsilon is the canonical primitive solution of epsilon^d = -1; the other
    solutions are epsilon * zeta with zeta a d-th root of unity and give the
    same pairing (checked exactly through sign_factor_for_epsilon).
    """

    d: int

    @property
    def epsilon(self) -> XComplex:
        return mp.e ** (1j * mp.pi / self.d)

    def chi(self, ell: int) -> int:
        """Right inverse of the projection Z/2d -> Z/d on 0..d-1."""
        return ell % self.d

    def tau(self, ell: int) -> int:
        """Integration-by-parts sign: -1 only at ell = -1 mod d for even d."""
        if ell % self.d == self.d - 1 and self.d % 2 == 0:
            return -1
        return 1

    def rho(self, n: int) -> int:
        """Sign of (P_n, P_n): alternates within a period, flips across d."""
        if n < 0:
            raise DomainError("rho defined for n >= 0")
        ell, k = n % self.d, n // self.d
        return -1 if (ell + k) % 2 else 1

    def sign_factor(self, m: int) -> int:
        """conj((-epsilon)^(-chi(m mod d)) epsilon^m), reduced exactly.

        With epsilon = e^(i pi u / d), u odd, the exponent collapses to an
        integer multiple of pi, so the factor is exactly +-1 and independent
        of u.
        """
        return self.sign_factor_for_epsilon(m, 1)

    def sign_factor_for_epsilon(self, m: int, u: int) -> int:
        """Same factor computed for epsilon = e^(i pi u/d); u must be odd."""
        if u % 2 == 0:
            raise DomainError("epsilon^d = -1 requires odd u")
        ell, k = m % self.d, m // self.d
        return -1 if (ell + k * u) % 2 else 1


def sign_data(d: int) -> SignData:
    if d < 1:
        raise DomainError("d must be a positive integer")
    return SignData(d)


# cache of radial integrals keyed by the canonical parameters
_radial_cache: dict = {}


def _radial(spec: PotentialSpec, beta: int, q: int, p: int):
    """Cached value of int_0^inf r^beta exp(-a r^2) J_q(2 t r^d) dr."""
    key = (spec.d, str(spec.a), str(spec.t), beta, abs(q), p)
    res = _radial_cache.get(key)
    if res is None:
        with mp.workprec(p + GUARD_BITS):
            res = bessel_moment_quad(beta, spec.a_mpf(),
                                     2 * abs(spec.t_mpf()), spec.d, abs(q), p)
        _radial_cache[key] = res
    if q < 0 and q % 2:
        return -res.value, res.error_estimate
    return res.value, res.error_estimate


def moment(spec: PotentialSpec, n: int, m: int,
           p: int = DEFAULT_PRECISION) -> XComplex:
    """Pairing (z^n, z^m); exact zero between different mu_d-weights.

    Jacobi-Anger reduces the angular integral to a single Bessel term:
    (z^n, z^m) = sign_factor(m) 2 pi i^q int r^(n+m+1) e^(-a r^2)
    J_q(2 t r^d) dr with q = (n - m)/d.
    """
    value, _ = moment_with_error(spec, n, m, p)
    return value


def moment_with_error(spec: PotentialSpec, n: int, m: int,
                      p: int = DEFAULT_PRECISION):
    if n < 0 or m < 0:
        raise DomainError("moment indices must be non-negative")
    d = spec.d
    if (n - m) % d != 0:
        return mp.mpc(0), mp.mpf(0)
    sd = sign_data(d)
    q = (n - m) // d
    with mp.workprec(p + GUARD_BITS):
        a = spec.a_mpf()
        t = spec.t_mpf()
        sf = sd.sign_factor(m)
        if t == 0:
            if n != m:
                return mp.mpc(0), mp.mpf(0)
            val = sf * mp.pi * mp.factorial(n) / a ** (n + 1)
            return mp.mpc(val), abs(val) * mp.mpf(2) ** (-p)
        radial, err = _radial(spec, n + m + 1, q, p)
        if t < 0:
            # J_q at a negative argument flips sign for odd q
            if q % 2:
                radial = -radial
        value = sf * 2 * mp.pi * mp.mpc(1j) ** q * radial
        return value, 2 * mp.pi * err


def moment_direct2d(spec: PotentialSpec, n: int, m: int,
                    p: int = 48) -> XComplex:
    """Reduction-free oracle: polar 2-D quadrature of the defining integral.

    Trapezoidal rule in the angle (spectrally accurate for the periodic
    analytic integrand) and panel Gauss-Legendre radially.  Slow; intended
    only for unit tests of the angular reduction at small n, m.
    """
    sd = sign_data(spec.d)
    with mp.workprec(p + GUARD_BITS):
        a = spec.a_mpf()
        t = spec.t_mpf()
        R = mp.sqrt((p + 24) * mp.log(2) / a) + 2
        K = int(6 * (abs(n - m) + 2 * abs(t) * R ** spec.d + 12))
        phases = [mp.expj(2 * mp.pi * (n - m) * k / K) for k in range(K)]
        cosines = [mp.cos(2 * mp.pi * spec.d * k / K) for k in range(K)]

        def angular(r):
            x = 2 * t * r ** spec.d
            s = mp.mpc(0)
            for ph, cth in zip(phases, cosines):
                s += ph * mp.expj(x * cth)
            return s * 2 * mp.pi / K

        nodes, weights = gauss_legendre(32, mp.mp.prec)
        panels = 12
        total = mp.mpc(0)
        for j in range(panels):
            x0, x1 = R * j / panels, R * (j + 1) / panels
            h, mid = (x1 - x0) / 2, (x0 + x1) / 2
            for x, w in zip(nodes, weights):
                r = mid + h * x
                total += w * h * r ** (n + m + 1) * mp.e ** (-a * r * r) \
                    * angular(r)
        return sd.sign_factor(m) * total


@dataclass
class GramMatrix:
    """Moment matrix (z^n, z^m), n, m = 0..N, with its weight-block pattern."""

    N: int
    entries: mp.matrix
    precision: int

    def __getitem__(self, nm):
        n, m = nm
        return self.entries[n, m]

    def det(self) -> XComplex:
        with mp.workprec(self.precision + GUARD_BITS):
            return mp.det(self.entries)


def gram(spec: PotentialSpec, N: int, p: int = DEFAULT_PRECISION) -> GramMatrix:
    """Assemble the Gram matrix on the nonzero weight-congruence pattern.

    Hermiticity is asserted within 2^(12-p) relative tolerance, then the
    matrix is symmetrized.
    """
    if N < 0:
        raise DomainError("N must be >= 0")
    with mp.workprec(p + GUARD_BITS):
        G = mp.matrix(N + 1, N + 1)
        scale = mp.mpf(0)
        for n in range(N + 1):
            for m in range(n, N + 1):
                if (n - m) % spec.d:
                    continue
                G[n, m] = moment(spec, n, m, p)
                G[m, n] = moment(spec, m, n, p)
                scale = max(scale, abs(G[n, m]))
        tol = scale * mp.mpf(2) ** (12 - p)
        for n in range(N + 1):
            for m in range(n, N + 1):
                if abs(G[n, m] - mp.conj(G[m, n])) > tol:
                    raise AssertionError(
                        f"hermiticity violated at ({n},{m}) beyond tolerance")
                sym = (G[n, m] + mp.conj(G[m, n])) / 2
                G[n, m] = sym
                G[m, n] = mp.conj(sym)
        return GramMatrix(N, G, p)


def rescale(a, t, d: int):
    """Map (a, t) to the canonical strength t = 1/d by z -> lambda z.

    Returns (a_canonical, lambda) with lambda = (d t)^(-1/d); moments pick
    up lambda^(n+m+2).  Negative t is its conjugate mirror (t -> -t flips
    the density to its complex conjugate) and is not handled here.
    """
    with mp.workprec(mp.mp.prec + GUARD_BITS):
        a = to_mpf(a)
        t = to_mpf(t)
        if t <= 0:
            raise DomainError("rescale requires t > 0")
        if a <= 0:
            raise DomainError("rescale requires a > 0")
        lam = (d * t) ** (-mp.mpf(1) / d)
        return a * lam ** 2, lam


def l_apply_monomial(spec: PotentialSpec, n: int):
    """L z^n = n z^(n-1) + i t d z^(n+d-1) as a sparse degree->coeff map."""
    t = spec.t_mpf()
    out = {}
    if n >= 1:
        out[n - 1] = mp.mpc(n)
    out[n + spec.d - 1] = out.get(n + spec.d - 1, mp.mpc(0)) + 1j * t * spec.d
    return out
