"""The square norm h(a) = (1,1) of the constant polynomial and its derivatives.

h solves the order-(d-1) linear ODE (-1)^(d-1) h^(d-1) = a h + a^2 h' with
a h -> pi at infinity.  For d >= 3 it is assembled from the entire
hypergeometric basis phi_m; for d <= 4 closed forms in classical functions
are available, and a Laplace-transform quadrature provides a
model-independent cross-check.  The recurrence initial conditions
V_j = -h^(j+1)/h^(j) are read off the derivative sequence.

A note on printed conventions: the hypergeometric basis carries q = d - 2
denominator parameters (the explicit list below), which is the reading
certified by the ODE residual test.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List

import mpmath as mp

from .numerics import (
    DEFAULT_PRECISION,
    GUARD_BITS,
    ConvergenceError,
    DomainError,
    NumericsError,
    XReal,
    bessel_moment_quad,
    to_mpf,
)

_MAX_SERIES_TERMS = 10**6


class SignError(NumericsError):
    """A derivative of h has the wrong sign, falsifying positivity upstream."""


@dataclass
class HEval:
    """h(a) and its first d-2 derivatives, with an error scale.

    Derivative signs must alternate: (-1)^j h^(j)(a) > 0, since each
    derivative is up to sign a diagonal density moment.
    """

    d: int
    a: XReal
    values: List[XReal]
    error: XReal


def _phi_denominators(d: int, m: int) -> List[Fraction]:
    front = [Fraction(j, d) for j in range(m + 2, d)]
    back = [Fraction(j, d) for j in range(d + 1, m + d + 1)]
    return front + back


def phi(d: int, m: int, a, k: int = 0, p: int = DEFAULT_PRECISION) -> XReal:
    """k-th derivative of the basis solution phi_m at a, by termwise series.

    phi_m(a) = a^m 1F_{d-2}((m+1)/d; denominators; (-1)^(d+1) d^(2-d) a^d),
    entire for d >= 3.
    """
    if d < 3:
        raise DomainError("phi basis requires d >= 3")
    if not 0 <= m <= d - 2:
        raise DomainError("m must be in 0..d-2")
    if k > d - 1:
        raise DomainError("derivative order beyond ODE closure")
    num = Fraction(m + 1, d)
    dens = _phi_denominators(d, m)
    work = p + GUARD_BITS
    while True:
        with mp.workprec(work):
            av = to_mpf(a)
            xcoef = (-1) ** (d + 1) * mp.mpf(d) ** (2 - d)
            tol = mp.mpf(2) ** (-(p + 16))
            coeff = mp.mpf(1)
            total = mp.mpf(0)
            tmax = mp.mpf(0)
            done = False
            for j in range(_MAX_SERIES_TERMS):
                e = m + d * j
                fall = mp.mpf(1)
                for i in range(k):
                    fall *= e - i
                if fall != 0 and e >= k:
                    if av != 0:
                        term = fall * coeff * av ** (e - k)
                        total += term
                        tmax = max(tmax, abs(term))
                    elif e == k:
                        total += fall * coeff
                if av == 0 and e > k:
                    done = True
                    break
                ratio = xcoef * (to_mpf(num) + j)
                for b in dens:
                    ratio /= to_mpf(b) + j
                ratio /= j + 1
                coeff = coeff * ratio
                if av != 0:
                    growth = abs(ratio) * abs(av) ** d
                    nxt = abs(coeff) * abs(av) ** (e + d - k) * (e + d) ** k
                    if growth < mp.mpf("0.5") and \
                            nxt < tol * max(abs(total), tmax * tol):
                        done = True
                        break
            if not done:
                raise ConvergenceError(
                    "phi series did not converge within term cap")
            # alternating-series cancellation eats mantissa bits; redo wider
            if total != 0 and tmax > 0:
                lost = int(mp.log(tmax / abs(total), 2)) + 1
                if lost > 0 and work < p + GUARD_BITS + lost:
                    work = p + GUARD_BITS + lost + 16
                    continue
            return total


def _h_derivative(d: int, a, k: int, p: int) -> XReal:
    """k-th derivative of h for d >= 3 from the basis linear combination.

    The combination cancels the growing parts of the phi_m (h decays like
    pi/a), so the working precision is widened until the lost bits fit.
    """
    work = p + GUARD_BITS
    while True:
        with mp.workprec(work):
            av = to_mpf(a)
            pref = mp.pi * mp.mpf(d) ** (mp.mpf(2) / d - 1)
            total = mp.mpf(0)
            tmax = mp.mpf(0)
            for m in range(d - 1):
                frac = Fraction(m + 1, d)
                g = mp.gamma(to_mpf(frac)) / mp.gamma(1 - to_mpf(frac))
                c = (-mp.mpf(d) ** (mp.mpf(2) / d)) ** m / mp.factorial(m)
                term = c * g * phi(d, m, av, k, work)
                total += term
                tmax = max(tmax, abs(term))
            if total != 0 and tmax > 0:
                lost = int(mp.log(tmax / abs(total), 2)) + 1
                if lost > 0 and work < p + GUARD_BITS + lost:
                    work = p + GUARD_BITS + lost + 16
                    continue
            return pref * total


def h_closed(d: int, a, p: int = DEFAULT_PRECISION) -> XReal:
    """Closed form of h in classical functions, d = 1..4."""
    with mp.workprec(p + GUARD_BITS):
        a = to_mpf(a)
        if d == 1:
            if a <= 0:
                raise DomainError("d=1 requires a > 0")
            return mp.pi / a * mp.e ** (-1 / a)
        if d == 2:
            return mp.pi / mp.sqrt(a * a + 1)
        if d == 3:
            x = a ** 3 / 6
            return mp.e ** x * mp.sqrt(mp.pi * a / 3) \
                * mp.besselk(mp.mpf(1) / 6, x)
        if d == 4:
            x = a * a / 4
            jm = mp.besselj(mp.mpf(-1) / 4, x)
            jp = mp.besselj(mp.mpf(1) / 4, x)
            return mp.pi ** 2 * a / 4 * (jm * jm - mp.sqrt(2) * jm * jp
                                         + jp * jp)
        raise DomainError("closed form only for d in 1..4")


def h_laplace(d: int, a, p: int = DEFAULT_PRECISION) -> XReal:
    """Laplace-transform quadrature oracle pi int_0^inf e^(-at) J_0 dt.

    Evaluated in the radial variable t = r^2, where the Gaussian decay
    matches the oscillatory quadrature machinery.
    """
    if d < 1:
        raise DomainError("d must be >= 1")
    with mp.workprec(p + GUARD_BITS):
        a = to_mpf(a)
        if a <= 0:
            raise DomainError("h_laplace requires a > 0")
        res = bessel_moment_quad(1, a, mp.mpf(2) / d, d, 0, p)
        return 2 * mp.pi * res.value


def h_eval(d: int, a, p: int = DEFAULT_PRECISION) -> HEval:
    """h(a), h'(a), ..., h^(d-2)(a) with alternating-sign validation."""
    if d < 1:
        raise DomainError("d must be >= 1")
    with mp.workprec(p + GUARD_BITS):
        a = to_mpf(a)
        if a <= 0 and not (d == 2 and a == 0):
            raise DomainError("h_eval requires a > 0")
        if d <= 2:
            values = [h_closed(d, a, p)]
        else:
            values = [_h_derivative(d, a, k, p) for k in range(d - 1)]
        err = abs(values[0]) * mp.mpf(2) ** (8 - p)
        for j, v in enumerate(values):
            if (-1) ** j * v <= 0:
                raise SignError(
                    f"h^({j})({mp.nstr(a)}) has unexpected sign for d={d}")
        return HEval(d, a, values, err)


def initial_conditions(d: int, a, p: int = DEFAULT_PRECISION) -> List[XReal]:
    """V_0..V_(d-3) = -h^(j+1)/h^(j); empty for d <= 2."""
    if d <= 2:
        return []
    he = h_eval(d, a, p)
    with mp.workprec(p + GUARD_BITS):
        out = []
        for j in range(d - 2):
            v = -he.values[j + 1] / he.values[j]
            if v <= 0:
                raise SignError(f"initial condition V_{j} <= 0")
            out.append(v)
        return out


def ode_residual(d: int, a, p: int = DEFAULT_PRECISION) -> XReal:
    """Relative residual of (-1)^(d-1) h^(d-1) = a h + a^2 h'.

    For d >= 3 all derivatives come from the termwise-differentiated series,
    certifying the hypergeometric parameter reading; d = 1, 2 substitute the
    closed forms.
    """
    with mp.workprec(p + GUARD_BITS):
        a = to_mpf(a)
        if d >= 3:
            h0 = _h_derivative(d, a, 0, p)
            h1 = _h_derivative(d, a, 1, p)
            htop = _h_derivative(d, a, d - 1, p)
        elif d == 2:
            h0 = mp.pi / mp.sqrt(a * a + 1)
            h1 = -mp.pi * a * (a * a + 1) ** mp.mpf("-1.5")
            htop = h1
        else:
            h0 = mp.pi / a * mp.e ** (-1 / a)
            h1 = h0 * (1 / (a * a) - 1 / a)
            htop = h0
        scale = abs(a * h0) if a != 0 else abs(h0)
        return abs((-1) ** (d - 1) * htop - a * h0 - a * a * h1) / scale
