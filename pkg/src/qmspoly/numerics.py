"""Extended-precision arithmetic, special functions and quadrature primitives.

All operations are pure functions of their inputs.  Precision is explicit:
every entry point takes a target precision ``p`` in bits and computes
internally with guard bits, so results are reliable at the advertised
precision.  Numbers are mpmath ``mpf``/``mpc`` values; the working precision
under which they were produced is the caller's ``p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

import mpmath as mp

XReal = mp.mpf
XComplex = mp.mpc
Number = Union[mp.mpf, mp.mpc]

DEFAULT_PRECISION = 256
GUARD_BITS = 32


def to_mpf(x) -> XReal:
    """Convert to mpf at the current working precision; accepts Fraction."""
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpf(x)


class NumericsError(Exception):
    """Base class for numerical failures in this package."""


class PoleError(NumericsError):
    """Function evaluated at a pole."""


class DomainError(NumericsError):
    """Argument outside the supported domain."""


class ParameterError(NumericsError):
    """Invalid parameter set (e.g. pole in a denominator parameter)."""


class ConvergenceError(NumericsError):
    """A series did not converge within the allowed number of terms."""


class PrecisionError(NumericsError):
    """Working precision exhausted before the target accuracy was met."""


class NonConvergence(NumericsError):
    """Adaptive quadrature refinement stalled."""


def gamma(x, p: int = DEFAULT_PRECISION) -> XReal:
    """Gamma function at extended precision.

    Raises PoleError at non-positive integers.
    """
    with mp.workprec(p + GUARD_BITS):
        x = to_mpf(x)
        if x <= 0 and x == mp.floor(x):
            raise PoleError(f"gamma pole at {x}")
        return mp.gamma(x)


def bessel_j(nu, x, p: int = DEFAULT_PRECISION) -> XReal:
    """Bessel function of the first kind J_nu(x) for real order and x >= 0."""
    with mp.workprec(p + GUARD_BITS):
        x = to_mpf(x)
        if x < 0:
            raise DomainError("bessel_j requires x >= 0")
        return mp.besselj(to_mpf(nu), x)


def bessel_k(nu, x, p: int = DEFAULT_PRECISION) -> XReal:
    """Modified Bessel function of the second kind K_nu(x), x > 0."""
    with mp.workprec(p + GUARD_BITS):
        x = to_mpf(x)
        if x <= 0:
            raise DomainError("bessel_k requires x > 0")
        return mp.besselk(to_mpf(nu), x)


_MAX_SERIES_TERMS = 10**6


def genhyp(numerators: Sequence, denominators: Sequence, x,
           p: int = DEFAULT_PRECISION) -> Number:
    """Generalized hypergeometric series sum_k prod(a_i)_k / prod(b_j)_k x^k / k!.

    Truncation point chosen by the term-ratio bound: once the term ratio is
    below 1/2 the tail is dominated by a geometric series.  Entire when
    len(denominators) >= len(numerators); otherwise the argument must be
    inside the radius of convergence.
    """
    with mp.workprec(p + GUARD_BITS):
        nums = [to_mpf(a) for a in numerators]
        dens = [to_mpf(b) for b in denominators]
        x = x if isinstance(x, mp.mpc) else to_mpf(x)
        for b in dens:
            if b <= 0 and b == mp.floor(b):
                raise ParameterError(f"denominator parameter {b} is a pole")
        if len(dens) < len(nums) - 1:
            raise ConvergenceError("series diverges for nonzero argument")
        if len(dens) == len(nums) - 1 and abs(x) >= 1:
            raise ConvergenceError("argument outside radius of convergence")
        tol = mp.mpf(2) ** (-(p + 16))
        term = mp.mpf(1)
        total = mp.mpf(1)
        for k in range(_MAX_SERIES_TERMS):
            ratio = x / (k + 1)
            for a in nums:
                ratio *= a + k
            for b in dens:
                ratio /= b + k
            term = term * ratio
            total += term
            if abs(ratio) < mp.mpf("0.5") and abs(term) < tol * abs(total):
                return total
        raise ConvergenceError("genhyp did not converge within term cap")


# ---------------------------------------------------------------------------
# Gauss-Legendre nodes and adaptive panel quadrature
# ---------------------------------------------------------------------------

_gl_cache: dict = {}


def gauss_legendre(n: int, prec: int):
    """Nodes and weights of n-point Gauss-Legendre quadrature on [-1, 1].

    Newton iteration on the Legendre recurrence, seeded with the classical
    cosine estimate; cached per (n, prec).
    """
    key = (n, prec)
    if key in _gl_cache:
        return _gl_cache[key]
    with mp.workprec(prec + 16):
        nodes = []
        weights = []
        # number of Newton iterations: double precision seed, quadratic convergence
        iters = max(6, int(math.log2(prec)) + 2)
        for i in range(n // 2 + n % 2):
            x = mp.mpf(math.cos(math.pi * (i + 0.75) / (n + 0.5)))
            for _ in range(iters):
                p0, p1 = mp.mpf(1), x
                for k in range(2, n + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = n * (x * p1 - p0) / (x * x - 1)
                x = x - p1 / dp
            p0, p1 = mp.mpf(1), x
            for k in range(2, n + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = n * (x * p1 - p0) / (x * x - 1)
            w = 2 / ((1 - x * x) * dp * dp)
            nodes.append(x)
            weights.append(w)
        xs = [-t for t in nodes]
        ws = list(weights)
        if n % 2:
            xs = xs[:-1]
            ws = ws[:-1]
        xs += [nodes[i] for i in reversed(range(len(nodes)))]
        ws += [weights[i] for i in reversed(range(len(weights)))]
        result = (xs, ws)
    _gl_cache[key] = result
    return result


@dataclass
class QuadratureResult:
    """Quadrature value with a bound on |value - true| and node count."""

    value: Number
    error_estimate: XReal
    nodes_used: int


@dataclass(frozen=True)
class GaussianDecay:
    """Integrand bound C * r^s * exp(-a r^2) used for tail truncation."""

    a: float
    coeff: float = 1.0
    power: float = 0.0


@dataclass(frozen=True)
class ExponentialDecay:
    """Integrand bound C * t^s * exp(-a t) used for tail truncation."""

    a: float
    coeff: float = 1.0
    power: float = 0.0


def _panel(f, x0, x1, nodes, weights):
    h = (x1 - x0) / 2
    mid = (x0 + x1) / 2
    total = 0
    for x, w in zip(nodes, weights):
        total += w * f(mid + h * x)
    return h * total


def _adaptive(f, x0, x1, abs_tol, order, max_depth=40):
    """Panel-bisection Gauss-Legendre with per-panel error from halving."""
    prec = mp.mp.prec
    nodes, weights = gauss_legendre(order, prec)
    count = [0]

    def fc(x):
        count[0] += 1
        return f(x)

    value = mp.mpf(0)
    err = mp.mpf(0)
    stack = [(mp.mpf(x0), mp.mpf(x1), _panel(fc, x0, x1, nodes, weights), 0)]
    while stack:
        a, b, coarse, depth = stack.pop()
        m = (a + b) / 2
        left = _panel(fc, a, m, nodes, weights)
        right = _panel(fc, m, b, nodes, weights)
        delta = abs(coarse - (left + right))
        local_tol = abs_tol * (b - a) / (mp.mpf(x1) - mp.mpf(x0))
        if delta <= local_tol or depth >= max_depth:
            if depth >= max_depth and delta > local_tol:
                raise NonConvergence(
                    f"panel refinement stalled on [{mp.nstr(a)}, {mp.nstr(b)}]")
            value += left + right
            err += delta
        else:
            stack.append((a, m, left, depth + 1))
            stack.append((m, b, right, depth + 1))
    return value, err, count[0]


def _tail_radius_and_bound(decay, abs_tol):
    """Truncation radius R with analytic bound on the discarded tail."""
    a = mp.mpf(decay.a)
    C = mp.mpf(decay.coeff)
    s = mp.mpf(decay.power)
    gaussian = isinstance(decay, GaussianDecay)

    def bound(R):
        # r^s <= R^s exp(s (r-R)/R) for r >= R folds the power into the
        # exponential rate, which must stay positive.
        if gaussian:
            rate = 2 * a * R - s / R
            if rate <= 0:
                return mp.inf
            return C * R ** s * mp.e ** (-a * R * R) / rate
        rate = a - s / R
        if rate <= 0:
            return mp.inf
        return C * R ** s * mp.e ** (-a * R) / rate

    R = mp.mpf(1)
    for _ in range(200):
        b = bound(R)
        if b < abs_tol:
            return R, b
        R *= mp.mpf("1.5")
    raise NonConvergence("could not find a finite truncation radius")


def quad_semiinf(f: Callable, decay, p: int = DEFAULT_PRECISION,
                 order: int = 48) -> QuadratureResult:
    """Integral of f over [0, inf) for integrands with a known decay envelope.

    The truncation radius R is chosen so the analytic tail bound from the
    decay hint is below 2^(-p-16) relative to a coarse estimate of the value;
    [0, R] is integrated by panel-adaptive Gauss-Legendre.
    """
    with mp.workprec(p + GUARD_BITS):
        scale = 1 / mp.mpf(decay.a) if isinstance(decay, ExponentialDecay) \
            else 1 / mp.sqrt(mp.mpf(decay.a))
        nodes, weights = gauss_legendre(order, mp.mp.prec)
        rough = abs(_panel(f, mp.mpf(0), 4 * scale, nodes, weights))
        if rough == 0:
            rough = mp.mpf(1)
        abs_tol = rough * mp.mpf(2) ** (-(p + 16))
        R, tail = _tail_radius_and_bound(decay, abs_tol)
        value, err, n = _adaptive(f, mp.mpf(0), R, abs_tol, order)
        return QuadratureResult(value, err + tail, n)


# ---------------------------------------------------------------------------
# Oscillatory Bessel-kernel radial integrals
# ---------------------------------------------------------------------------

def _hankel1_asym(q: int, z, rel_tol):
    """H^(1)_q(z) by the large-argument expansion, |z| large, 0 <= arg z < pi.

    Direct J + iY suffers catastrophic cancellation for large Im z; the
    asymptotic series has no such problem.  Caller guarantees |z| is large
    enough that the minimal term is below rel_tol; the achieved bound is
    returned alongside the value.
    """
    w = mp.sqrt(2 / (mp.pi * z)) * mp.e ** (1j * (z - q * mp.pi / 2 - mp.pi / 4))
    term = mp.mpc(1)
    total = mp.mpc(1)
    fourq2 = 4 * q * q
    prev = mp.inf
    k = 0
    while True:
        k += 1
        term = term * (fourq2 - (2 * k - 1) ** 2) * 1j / (8 * k * z)
        mag = abs(term)
        if mag >= prev:
            # divergent turnover: stop, remainder ~ first omitted term
            return w * total, 2 * prev
        total += term
        if mag < rel_tol:
            return w * total, 2 * mag
        prev = mag


def _rotated_tail(beta, a, c, d, q, r0, abs_tol, order):
    """Re of the Hankel-1 integral over the ray r0 + s e^{i phi}, s >= 0.

    On the rotated ray the kernel decays like exp(-c sin(d phi) |z|^d), so a
    few panels replace thousands of oscillations on the real axis.
    """
    phi = min(mp.pi / (2 * d), mp.pi / 8)
    eiphi = mp.e ** (1j * phi)
    hankel_rel_tol = mp.mpf(2) ** (-(mp.mp.prec - 4))

    def net_exponent(s):
        z = r0 + s * eiphi
        return (a * (z * z).real + c * (z ** d).imag
                - beta * mp.log(abs(z)))

    def g(s):
        z = r0 + s * eiphi
        h1, _ = _hankel1_asym(q, c * z ** d, hankel_rel_tol)
        return z ** beta * mp.e ** (-a * z * z) * h1 * eiphi

    # envelope magnitude at the junction; |H1_q| ~ 1 there by choice of r0
    e0 = net_exponent(mp.mpf(0))
    target = e0 + mp.log(1 / abs_tol) + 3
    s_max = mp.mpf(1)
    for _ in range(200):
        if net_exponent(s_max) > target:
            break
        s_max *= mp.mpf("1.4")
    else:
        raise NonConvergence("rotated tail does not decay")
    # local decay rate at s_max bounds the truncated remainder
    ds = s_max / 1000
    rate = (net_exponent(s_max + ds) - net_exponent(s_max)) / ds
    trunc = abs(g(s_max)) / rate if rate > 0 else abs_tol
    value, err, n = _adaptive(g, mp.mpf(0), s_max, abs_tol, order)
    return value.real, err + trunc, n


def bessel_moment_quad(beta: int, a, c, d: int, q: int,
                       p: int = DEFAULT_PRECISION) -> QuadratureResult:
    """Integral of r^beta exp(-a r^2) J_q(c r^d) over [0, inf).

    Mildly oscillatory cases go through real-axis adaptive panels; beyond
    ~40 kernel oscillations the oscillatory part is evaluated as the real
    part of the Hankel-1 integral on a contour rotated into the upper half
    plane, where the kernel decays.
    """
    if q < 0:
        # J_{-q} = (-1)^q J_q for integer order
        res = bessel_moment_quad(beta, a, c, d, -q, p)
        sign = -1 if q % 2 else 1
        return QuadratureResult(sign * res.value, res.error_estimate,
                                res.nodes_used)
    with mp.workprec(p + GUARD_BITS):
        a = to_mpf(a)
        c = to_mpf(c)
        beta = to_mpf(beta)
        # amplitude scale of the integral for the relative tolerance:
        # |J_q| <= 1, so |I| <= Gamma((beta+1)/2) / (2 a^((beta+1)/2))
        scale = mp.gamma((beta + 1) / 2) / (2 * a ** ((beta + 1) / 2))
        abs_tol = scale * mp.mpf(2) ** (-(p + 16))
        decay = GaussianDecay(a, 1.0, float(beta))
        R, tail = _tail_radius_and_bound(decay, abs_tol)
        oscillations = float(c * R ** d / mp.pi)

        def f(r):
            if r == 0:
                return mp.mpf(0) if beta > 0 else mp.besselj(q, 0)
            return r ** beta * mp.e ** (-a * r * r) * mp.besselj(q, c * r ** d)

        if oscillations <= 40:
            value, err, n = _adaptive(f, mp.mpf(0), R, abs_tol, 48)
            return QuadratureResult(value, err + tail, n)

        # head on [0, r0]: junction far enough out that (a) the Hankel
        # asymptotic expansion reaches working precision (minimal term
        # ~ exp(-2|z|)) and (b) the small-argument growth region is cleared
        x0 = max(mp.mpf(8), mp.mpf(q) * mp.mpf("1.3") + 5,
                 mp.mp.prec * mp.log(2) / 2 + 10)
        r0 = (x0 / c) ** (mp.mpf(1) / d)
        if r0 >= R:
            value, err, n = _adaptive(f, mp.mpf(0), R, abs_tol, 48)
            return QuadratureResult(value, err + tail, n)
        head, head_err, n1 = _adaptive(f, mp.mpf(0), r0, abs_tol, 48)
        tail_val, tail_err, n2 = _rotated_tail(beta, a, c, d, q, r0,
                                               abs_tol, 32)
        return QuadratureResult(head + tail_val,
                                head_err + tail_err + tail,
                                n1 + n2)


def ladder_agrees(lo: Number, hi: Number, rel_tol) -> bool:
    """True when a value recomputed at doubled precision confirms `lo`."""
    if hi == 0:
        return abs(lo) <= rel_tol
    return abs(lo - hi) <= rel_tol * abs(hi)


def rational(num: int, den: int = 1) -> Fraction:
    """Exact rational parameter, for callers assembling parameter lists."""
    return Fraction(num, den)
