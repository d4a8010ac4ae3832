"""Positive solution of the d-ary discrete Painleve-type recurrence.

V_n + a^(-2) sum_{j=0}^{d-2} prod_{k=0}^{d-2} V_(n+j-k) = (n+1)/a, with
V_m = 0 for m < 0 and V_0..V_(d-3) from the h-function derivatives.  The
positive solution is an unstable separatrix: forward iteration sheds
precision at a rate growing with n, so every run is validated by a
two-precision ladder and reports an honest `validated_to` instead of
silently wrong values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import mpmath as mp

from .density import PotentialSpec
from .hfun import h_eval, initial_conditions
from .numerics import (
    DEFAULT_PRECISION,
    GUARD_BITS,
    DomainError,
    NumericsError,
    XReal,
    to_mpf,
)


class PositivityLost(NumericsError):
    """The forward iteration left the positive branch.

    Signals precision exhaustion or wrong initial data; carries the index
    at which the sign was lost.
    """

    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(message or f"positivity lost at index {index}")


@dataclass
class RecurrenceTrace:
    """Validated prefix of the positive recurrence solution.

    V[n] for 0 <= n <= validated_to passed the two-precision ladder;
    entries are not stored beyond it.  epsilon_std = a^(-d/(d-2)) is the
    parameter of the rescaled standard form (None for d = 2).
    """

    spec: PotentialSpec
    V: List[XReal]
    validated_to: int
    precision: int
    epsilon_std: Optional[XReal]
    precision_exhausted: bool = False

    @property
    def d(self) -> int:
        return self.spec.d

    def a_mpf(self) -> XReal:
        return self.spec.a_mpf()

    def v_standard(self, n: int) -> XReal:
        """Standard-form variable v_n = a^(-2/(d-2)) V_n (d != 2)."""
        if self.d == 2:
            raise DomainError("standard form requires d != 2")
        with mp.workprec(self.precision + GUARD_BITS):
            a = self.a_mpf()
            return a ** (mp.mpf(-2) / (self.d - 2)) * self.V[n]


def _get(V: Sequence, i: int):
    return V[i] if i >= 0 else mp.mpf(0)


def step(d: int, a, V: Sequence, n: int) -> XReal:
    """Solve the recurrence at index n for its highest entry V_(n+d-2).

    V must hold valid entries up to index n+d-3; negative indices are 0 by
    convention.  Raises PositivityLost if the divisor vanishes or the
    result is not positive.
    """
    a = to_mpf(a)
    if d == 1:
        return (n + 1) / a
    if d == 2:
        return (n + 1) * a / (a * a + 1)
    rhs = a * a * ((n + 1) / a - _get(V, n))
    for j in range(d - 2):
        prod = mp.mpf(1)
        for k in range(d - 1):
            prod *= _get(V, n + j - k)
        rhs -= prod
    div = mp.mpf(1)
    for k in range(1, d - 1):
        div *= _get(V, n + d - 2 - k)
    if div == 0:
        raise PositivityLost(n + d - 2, "vanishing divisor in recurrence")
    out = rhs / div
    if out <= 0:
        raise PositivityLost(n + d - 2)
    return out


def window_residual(d: int, a, V: Sequence, n: int) -> XReal:
    """Relative residual of the recurrence at index n over stored entries."""
    a = to_mpf(a)
    lhs = _get(V, n)
    for j in range(d - 1):
        prod = mp.mpf(1)
        for k in range(d - 1):
            prod *= _get(V, n + j - k)
        lhs += prod / (a * a)
    return abs(lhs - (n + 1) / a) / ((n + 1) / a)


def _run_raw(d: int, a, N: int, p: int) -> List[XReal]:
    """Forward iteration at a single working precision; may lose positivity."""
    with mp.workprec(p + GUARD_BITS):
        av = to_mpf(a)
        if d <= 2:
            return [step(d, av, [], n) for n in range(N + 1)]
        V = [to_mpf(v) for v in initial_conditions(d, a, p)]
        # entries V_0..V_(d-3) known; relation at index n yields V_(n+d-2)
        n = 0
        while len(V) <= N:
            V.append(step(d, av, V, n))
            n += 1
        return V[:N + 1]


def run(d: int, a, N: int, p: int = DEFAULT_PRECISION) -> RecurrenceTrace:
    """Positive solution V_0..V_N validated by a two-precision ladder.

    The iteration runs at p and 2p bits; an index is validated while the
    relative disagreement stays below 2^(-p/4).  A trace shorter than
    requested carries the precision_exhausted flag.
    """
    if d < 1:
        raise DomainError("d must be >= 1")
    spec = PotentialSpec(d, a)
    with mp.workprec(2 * p + GUARD_BITS):
        av = to_mpf(a)
        eps = None if d == 2 else av ** (-mp.mpf(d) / (d - 2))
    if d <= 2:
        V = _run_raw(d, a, N, p)
        return RecurrenceTrace(spec, V, N, p, eps)

    def attempt(prec):
        try:
            return _run_raw(d, a, N, prec), None
        except PositivityLost as exc:
            return None, exc

    lo, lo_err = attempt(p)
    hi, hi_err = attempt(2 * p)
    with mp.workprec(2 * p + GUARD_BITS):
        tol = mp.mpf(2) ** (-mp.mpf(p) / 4)
        validated = -1
        nlo = N if lo is not None else lo_err.index - 1
        nhi = N if hi is not None else hi_err.index - 1
        limit = min(nlo, nhi, N)
        lo_vals = lo if lo is not None else _partial(d, a, nlo, p)
        hi_vals = hi if hi is not None else _partial(d, a, nhi, 2 * p)
        for n in range(limit + 1):
            if abs(lo_vals[n] - hi_vals[n]) > tol * abs(hi_vals[n]):
                break
            validated = n
    if validated < 0:
        raise PositivityLost(0, "no index validated; initial data suspect")
    exhausted = validated < N
    return RecurrenceTrace(spec, hi_vals[:validated + 1], validated, p, eps,
                           precision_exhausted=exhausted)


def _partial(d: int, a, upto: int, p: int) -> List[XReal]:
    """Prefix of the iteration up to `upto`, known not to lose positivity."""
    if upto < 0:
        return []
    return _run_raw(d, a, upto, p)


def h_sequence(trace: RecurrenceTrace, p: int = DEFAULT_PRECISION,
               h0: Optional[XReal] = None) -> List[XReal]:
    """Square norms h_n = h(a) prod_{k<n} V_k along the validated prefix.

    h0 defaults to h(a) for the canonical density; pass an explicit h0 for
    oracle modes (e.g. t = 0).
    """
    with mp.workprec(p + GUARD_BITS):
        if h0 is None:
            h0 = h_eval(trace.d, trace.spec.a, p).values[0]
        out = [to_mpf(h0)]
        for n in range(trace.validated_to + 1):
            out.append(out[-1] * trace.V[n])
        return out


def dh_residual(d: int, a, n: int, p: int = DEFAULT_PRECISION) -> XReal:
    """Residual of d/da h_n = -h_(n+1) + a^(-2) h_n^2 / h_(n-d+1).

    The derivative is a central finite difference with step 2^(-p/3).  For
    n - d + 1 < 0 the last term carries a divergent negative-order moment
    in the denominator and drops out.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    with mp.workprec(p + GUARD_BITS):
        av = to_mpf(a)
        delta = mp.mpf(2) ** (-(p // 3))

        def h_at(x):
            tr = run(d, x, n + 1, p)
            if tr.validated_to < n + 1:
                raise PositivityLost(tr.validated_to + 1,
                                     "insufficient precision for dh_residual")
            return h_sequence(tr, p)

        h_mid = h_at(av)
        h_plus = h_at(av + delta)
        h_minus = h_at(av - delta)
        fd = (h_plus[n] - h_minus[n]) / (2 * delta)
        rhs = -h_mid[n + 1]
        if n - d + 1 >= 0:
            rhs += h_mid[n] ** 2 / (av * av * h_mid[n - d + 1])
        return abs(fd - rhs) / abs(h_mid[n + 1])
