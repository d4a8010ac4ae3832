"""Monic orthogonal polynomials for the twisted pairing.

Two independent constructions: the fast route builds P_n by the sparse
three-term-like recurrence P_(n+1) = z P_n - (i/a)(prod of d-1 recurrence
entries) P_(n-d+1); the oracle route Gram-Schmidts the monomials against
quadrature moments with a hand-rolled pivoted elimination.  Their agreement
is the central cross-check of the whole package, so the two routes share no
code beyond the moment evaluator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import mpmath as mp

from .density import PotentialSpec, l_apply_monomial, moment, sign_data
from .numerics import (
    DEFAULT_PRECISION,
    GUARD_BITS,
    DomainError,
    NumericsError,
    XComplex,
    XReal,
    to_mpf,
)
from .painleve import RecurrenceTrace, h_sequence

# sparse polynomial: degree -> complex coefficient
Poly = Dict[int, XComplex]


class SingularGram(NumericsError):
    """Pivot collapse during Gram-Schmidt: the pairing degenerated.

    Carries a certificate (step index, pivot magnitude, scale) sufficient
    to reproduce the failure.
    """

    def __init__(self, step: int, pivot, scale):
        self.step = step
        self.pivot = pivot
        self.scale = scale
        super().__init__(
            f"Gram pivot at step {step} is {mp.nstr(mp.mpf(abs(pivot)), 5)} "
            f"against scale {mp.nstr(mp.mpf(abs(scale)), 5)}")


@dataclass
class OrthoBasis:
    """Monic polynomials P_0..P_N in sparse degree->coefficient form.

    Degrees present in P_n are congruent to n mod d: the pairing is
    invariant under the mu_d weight grading, so each P_n lives on a single
    weight lattice.
    """

    spec: PotentialSpec
    polys: List[Poly]
    precision: int

    @property
    def N(self) -> int:
        return len(self.polys) - 1

    def coeff(self, n: int, k: int) -> XComplex:
        return self.polys[n].get(k, mp.mpc(0))


def poly_pairing(spec: PotentialSpec, f: Poly, g: Poly,
                 p: int = DEFAULT_PRECISION) -> XComplex:
    """(f, g) by bilinear expansion over the moment table."""
    with mp.workprec(p + GUARD_BITS):
        total = mp.mpc(0)
        for n, cf in f.items():
            for m, cg in g.items():
                if (n - m) % spec.d:
                    continue
                total += cf * mp.conj(cg) * moment(spec, n, m, p)
        return total


def build(trace: RecurrenceTrace, N: Optional[int] = None,
          p: int = DEFAULT_PRECISION) -> OrthoBasis:
    """P_0..P_N from the validated recurrence trace.

    P_(n+1) = z P_n - (i/a) V_(n-1) V_(n-2) ... V_(n-d+1) P_(n-d+1), with
    P_m = 0 for m < 0 and entries below index 0 treated as absent (the
    product term only enters once n + 1 >= d).
    """
    d = trace.d
    if N is None:
        N = trace.validated_to + 1
    if N > trace.validated_to + 1:
        raise DomainError(
            f"trace validated to {trace.validated_to}; cannot build P_{N}")
    with mp.workprec(p + GUARD_BITS):
        a = trace.a_mpf()
        polys: List[Poly] = [{0: mp.mpc(1)}]
        for n in range(N):
            nxt: Poly = {k + 1: c for k, c in polys[n].items()}
            if n - d + 1 >= 0:
                c = mp.mpc(1j) / a
                for j in range(1, d):
                    c *= trace.V[n - j]
                for k, ck in polys[n - d + 1].items():
                    nxt[k] = nxt.get(k, mp.mpc(0)) - c * ck
            polys.append(nxt)
        return OrthoBasis(trace.spec, polys, p)


def orthogonality_residual(basis: OrthoBasis, h: List[XReal],
                           p: int = DEFAULT_PRECISION):
    """Largest normalized off-diagonal pairing and diagonal deviation.

    Off-diagonal entries are scaled by sqrt(h_n h_m); the diagonal checks
    (P_n, P_n) = rho(n) h_n.  Pairs with incongruent weights vanish
    identically and are skipped.
    """
    spec = basis.spec
    sd = sign_data(spec.d)
    with mp.workprec(p + GUARD_BITS):
        off = mp.mpf(0)
        diag = mp.mpf(0)
        for n in range(basis.N + 1):
            for m in range(n, basis.N + 1):
                if (n - m) % spec.d:
                    continue
                val = poly_pairing(spec, basis.polys[n], basis.polys[m], p)
                if n == m:
                    dev = abs(val / (sd.rho(n) * h[n]) - 1)
                    diag = max(diag, dev)
                else:
                    off = max(off, abs(val) / mp.sqrt(h[n] * h[m]))
        return off, diag


def l_action_residual(basis: OrthoBasis, trace: RecurrenceTrace, n: int,
                      p: int = DEFAULT_PRECISION) -> XReal:
    """Coefficient-space residual of L P_n = i P_(n+d-1) + a V_(n-1) P_(n-1).

    L = d/dz + i t d z^(d-1) is the lowering/raising operator of the
    pairing; the identity requires the canonical strength t = 1/d and
    both P_(n+d-1), P_(n-1) inside the basis.
    """
    spec = basis.spec
    d = spec.d
    if not spec.canonical:
        raise DomainError("L-action identity requires t = 1/d")
    if n + d - 1 > basis.N:
        raise DomainError("basis too short for L-action at this n")
    with mp.workprec(p + GUARD_BITS):
        a = trace.a_mpf()
        lhs: Poly = {}
        for k, c in basis.polys[n].items():
            for deg, w in l_apply_monomial(spec, k).items():
                lhs[deg] = lhs.get(deg, mp.mpc(0)) + c * w
        rhs: Poly = {k: 1j * c for k, c in basis.polys[n + d - 1].items()}
        if n >= 1:
            vn1 = trace.V[n - 1] if n - 1 <= trace.validated_to else None
            if vn1 is None:
                raise DomainError("trace too short for L-action at this n")
            for k, c in basis.polys[n - 1].items():
                rhs[k] = rhs.get(k, mp.mpc(0)) + a * vn1 * c
        scale = max(abs(c) for c in rhs.values())
        worst = mp.mpf(0)
        for k in set(lhs) | set(rhs):
            worst = max(worst, abs(lhs.get(k, mp.mpc(0))
                                   - rhs.get(k, mp.mpc(0))))
        return worst / scale


def gram_schmidt_oracle(spec: PotentialSpec, N: int,
                        p: int = DEFAULT_PRECISION):
    """Monic orthogonalization of 1, z, ..., z^N directly against moments.

    Elimination proceeds degree by degree inside each weight class; the
    pivots are the diagonal pairings (P_n, P_n).  A pivot below 2^(-p/2)
    of the running scale raises SingularGram with a certificate.  Returns
    (OrthoBasis, list of pivots).
    """
    with mp.workprec(p + GUARD_BITS):
        polys: List[Poly] = []
        pivots: List[XComplex] = []
        scale = mp.mpf(0)
        floor = mp.mpf(2) ** (-mp.mpf(p) / 2)
        for n in range(N + 1):
            cur: Poly = {n: mp.mpc(1)}
            for m in range(n - spec.d, -1, -spec.d):
                # project away the same-weight predecessors
                num = poly_pairing(spec, cur, polys[m], p)
                coef = num / pivots[m]
                for k, c in polys[m].items():
                    cur[k] = cur.get(k, mp.mpc(0)) - coef * c
            piv = poly_pairing(spec, cur, cur, p)
            scale = max(scale, abs(piv))
            if abs(piv) < floor * scale:
                raise SingularGram(n, piv, scale)
            polys.append(cur)
            pivots.append(piv)
        return OrthoBasis(spec, polys, p), pivots


def basis_distance(b1: OrthoBasis, b2: OrthoBasis,
                   p: int = DEFAULT_PRECISION) -> XReal:
    """Largest coefficient disagreement between two bases, degree-wise."""
    if b1.N != b2.N:
        raise DomainError("bases must have equal length")
    with mp.workprec(p + GUARD_BITS):
        worst = mp.mpf(0)
        for n in range(b1.N + 1):
            keys = set(b1.polys[n]) | set(b2.polys[n])
            scale = max(abs(c) for c in b1.polys[n].values())
            for k in keys:
                worst = max(worst, abs(b1.coeff(n, k) - b2.coeff(n, k))
                            / scale)
        return worst


def partition_function(trace: RecurrenceTrace, N: int,
                       p: int = DEFAULT_PRECISION) -> Tuple[XReal, int]:
    """det of the (N+1)x(N+1) moment matrix as (magnitude, sign).

    Factorizes as prod_n rho(n) h_n over n = 0..N; the magnitude is the
    product of square norms and the sign collects the rho signature.
    """
    if N > trace.validated_to:
        raise DomainError("trace validated too short for partition function")
    sd = sign_data(trace.d)
    h = h_sequence(trace, p)
    with mp.workprec(p + GUARD_BITS):
        mag = mp.mpf(1)
        sign = 1
        for n in range(N + 1):
            mag *= h[n]
            sign *= sd.rho(n)
        return mag, sign
