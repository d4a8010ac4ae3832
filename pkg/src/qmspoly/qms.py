"""Finite truncations of the ladder-operator pair built from the recurrence.

With w_n = a^(-1/(d-2)) sqrt(V_n) and W the weighted raising shift
W e_n = w_n e_(n+1), the pair M = a^(1/(d-2)) (W + i (W*)^(d-1)) and
L = a^((d-1)/(d-2)) (i W^(d-1) + W*) satisfies [L, M] = I and the
self-consistency relation [W*, W] + [(W*)^(d-1), W^(d-1)] = eps I with
eps = a^(-d/(d-2)), both up to truncation effects confined to the last
d - 1 rows and columns.  Residuals are therefore measured on the interior
block 0..N-d only.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .numerics import DEFAULT_PRECISION, GUARD_BITS, DomainError, XReal
from .painleve import RecurrenceTrace


@dataclass
class OperatorTruncation:
    """(N+1)x(N+1) matrices of the shift pair and derived operators."""

    d: int
    N: int
    W: mp.matrix
    Wdag: mp.matrix
    M: mp.matrix
    L: mp.matrix
    epsilon: XReal
    precision: int


def _matpow(A: mp.matrix, k: int) -> mp.matrix:
    out = mp.eye(A.rows)
    for _ in range(k):
        out = out * A
    return out


def build_operators(trace: RecurrenceTrace, N: int,
                    p: int = DEFAULT_PRECISION) -> OperatorTruncation:
    """Truncated W, W*, M, L from the validated recurrence prefix."""
    d = trace.d
    if d <= 2:
        raise DomainError("operator construction requires d >= 3")
    if N - 1 > trace.validated_to:
        raise DomainError("trace validated too short for this truncation")
    with mp.workprec(p + GUARD_BITS):
        a = trace.a_mpf()
        s = mp.mpf(1) / (d - 2)
        w = [a ** (-s) * mp.sqrt(trace.V[n]) for n in range(N)]
        W = mp.matrix(N + 1, N + 1)
        for n in range(N):
            W[n + 1, n] = w[n]
        Wdag = W.T
        Wd = _matpow(W, d - 1)
        Wdagd = Wd.T
        M = a ** s * (W + 1j * Wdagd)
        L = a ** (s * (d - 1)) * (1j * Wd + Wdag)
        eps = a ** (-mp.mpf(d) * s)
        return OperatorTruncation(d, N, W, Wdag, M, L, eps, p)


def _interior_max(A: mp.matrix, d: int, N: int) -> XReal:
    worst = mp.mpf(0)
    for i in range(N - d + 1):
        for j in range(N - d + 1):
            worst = max(worst, abs(A[i, j]))
    return worst


def qms_residual(ops: OperatorTruncation) -> XReal:
    """Max interior-block entry of [W*, W] + [(W*)^(d-1), W^(d-1)] - eps I."""
    with mp.workprec(ops.precision + GUARD_BITS):
        Wd = _matpow(ops.W, ops.d - 1)
        Wdagd = Wd.T
        C = (ops.Wdag * ops.W - ops.W * ops.Wdag
             + Wdagd * Wd - Wd * Wdagd - ops.epsilon * mp.eye(ops.N + 1))
        return _interior_max(C, ops.d, ops.N)


def lm_commutator_residual(ops: OperatorTruncation) -> XReal:
    """Max interior-block entry of [L, M] - I."""
    with mp.workprec(ops.precision + GUARD_BITS):
        C = ops.L * ops.M - ops.M * ops.L - mp.eye(ops.N + 1)
        return _interior_max(C, ops.d, ops.N)
