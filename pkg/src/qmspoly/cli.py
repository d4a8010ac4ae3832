"""Command-line front end with deterministic JSON/CSV output.

Every numeric field is serialized as a decimal string whose significant-
digit count is derived from the attached error estimate, so extended
precision survives the round trip.  Exit codes: 0 success, 1 usage error,
2 numerical failure, 3 degenerate Gram pairing detected.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys
from typing import List, Optional, Tuple

import click
import mpmath as mp

from . import density, hfun, opoly, painleve, qms
from .numerics import DEFAULT_PRECISION, GUARD_BITS, NumericsError, to_mpf

EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_DEGENERATE = 3


def default_precision() -> int:
    env = os.environ.get("OPOLY_DEFAULT_PRECISION")
    if env is None:
        return DEFAULT_PRECISION
    try:
        return int(env)
    except ValueError:
        raise click.UsageError(
            f"OPOLY_DEFAULT_PRECISION must be an integer, got {env!r}")


def fmt(value, prec: int, error=None) -> str:
    """Decimal string with significant digits implied by the error estimate.

    Falls back to full working precision when no estimate is available.
    The formatting runs at fixed precision so equal inputs always yield
    identical strings.
    """
    with mp.workprec(prec + GUARD_BITS):
        v = mp.mpf(value) if not isinstance(value, mp.mpc) else value
        full = max(6, int(prec * 0.30103))
        digits = full
        if error is not None and error > 0 and abs(v) > 0:
            digits = int(mp.floor(mp.log10(abs(v) / error))) + 1
            digits = max(6, min(digits, full))
        return mp.nstr(v, digits)


def emit(meta: dict, rows: List[dict], output_format: str,
         out_path: Optional[str]) -> None:
    if output_format == "json":
        text = json.dumps({"meta": meta, "rows": rows},
                          indent=2, sort_keys=False) + "\n"
    else:
        buf = io.StringIO()
        fields = list(rows[0].keys()) if rows else list(meta.keys())
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        if rows:
            writer.writerows(rows)
        else:
            writer.writerow(meta)
        text = buf.getvalue()
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def common_options(with_n=True, with_t=False):
    def deco(f):
        f = click.option("--out", "out_path", type=click.Path(), default=None,
                         help="write output to PATH instead of stdout")(f)
        f = click.option("--format", "output_format",
                         type=click.Choice(["json", "csv"]),
                         default="json", show_default=True)(f)
        f = click.option("--precision-bits", type=int, default=None,
                         help="working precision in bits (>= 64); defaults "
                              "to OPOLY_DEFAULT_PRECISION or 256")(f)
        if with_n:
            f = click.option("--N", "n_max", type=int, required=True,
                             help="largest index n")(f)
        if with_t:
            f = click.option("--t", "t_str", type=str, default=None,
                             help="oscillation strength (default 1/d)")(f)
        f = click.option("--a", "a_str", type=str, required=True,
                         help="Gaussian strength, decimal string")(f)
        f = click.option("--d", "d", type=int, required=True,
                         help="monomial degree of the density")(f)
        return f
    return deco


def resolve_precision(precision_bits: Optional[int]) -> int:
    p = precision_bits if precision_bits is not None else default_precision()
    if p < 64:
        raise click.UsageError("precision-bits must be >= 64")
    return p


def check_common(d: int, a_str: str) -> None:
    if d < 1:
        raise click.UsageError("d must be >= 1")
    try:
        a = to_mpf(a_str)
    except Exception:
        raise click.UsageError(f"cannot parse --a value {a_str!r}")
    if a < 0:
        raise click.UsageError("a must be non-negative")


@click.group()
def main_group():
    """Orthogonal polynomials and recurrence data for the twisted pairing."""


@main_group.command("hfun")
@common_options(with_n=False)
def cmd_hfun(d, a_str, precision_bits, output_format, out_path):
    """h(a), its derivatives, the ODE residual, and the quadrature delta."""
    check_common(d, a_str)
    p = resolve_precision(precision_bits)
    he = hfun.h_eval(d, a_str, p)
    row = {"a": fmt(he.a, p)}
    names = ["h"] + [f"h_deriv{k}" for k in range(1, len(he.values))]
    for name, v in zip(names, he.values):
        row[name] = fmt(v, p, he.error)
    row["ode_residual"] = fmt(hfun.ode_residual(d, a_str, p), p)
    if to_mpf(a_str) > 0:
        lap = hfun.h_laplace(d, a_str, p)
        row["laplace_delta"] = fmt(abs(lap - he.values[0]) / he.values[0], p)
    else:
        row["laplace_delta"] = "0"
    meta = {"command": "hfun", "d": d, "a": a_str, "precision_bits": p}
    emit(meta, [row], output_format, out_path)


@main_group.command("recurrence")
@common_options()
def cmd_recurrence(d, a_str, n_max, precision_bits, output_format, out_path):
    """Positive recurrence solution V_0..V_N with ladder validation."""
    check_common(d, a_str)
    if n_max < 0:
        raise click.UsageError("N must be >= 0")
    p = resolve_precision(precision_bits)
    tr = painleve.run(d, a_str, n_max, p)
    rows = []
    for n in range(tr.validated_to + 1):
        row = {"n": n, "V_n": fmt(tr.V[n], p)}
        if d != 2:
            row["v_n"] = fmt(tr.v_standard(n), p)
        row["window_residual"] = fmt(
            painleve.window_residual(d, to_mpf(a_str), tr.V, n)
            if n + max(d - 2, 0) <= tr.validated_to else mp.mpf(0), p)
        rows.append(row)
    meta = {
        "command": "recurrence", "d": d, "a": a_str,
        "N": n_max, "precision_bits": p,
        "validated_to": tr.validated_to,
        "precision_exhausted": tr.precision_exhausted,
    }
    if tr.epsilon_std is not None:
        meta["epsilon_std"] = fmt(tr.epsilon_std, p)
    emit(meta, rows, output_format, out_path)


@main_group.command("opoly")
@common_options()
def cmd_opoly(d, a_str, n_max, precision_bits, output_format, out_path):
    """Monic polynomial coefficients from the validated recurrence."""
    check_common(d, a_str)
    p = resolve_precision(precision_bits)
    tr = painleve.run(d, a_str, max(n_max - 1, 0), p)
    basis = opoly.build(tr, n_max, p)
    rows = []
    for n in range(basis.N + 1):
        terms = ";".join(
            f"{k}:{fmt(c.real, p)}+{fmt(c.imag, p)}j"
            for k, c in sorted(basis.polys[n].items()))
        rows.append({"n": n, "coefficients": terms})
    meta = {"command": "opoly", "d": d, "a": a_str, "N": n_max,
            "precision_bits": p,
            "validated_to": tr.validated_to}
    emit(meta, rows, output_format, out_path)


@main_group.command("gram")
@common_options(with_t=True)
def cmd_gram(d, a_str, t_str, n_max, precision_bits, output_format, out_path):
    """Gram-Schmidt pivot scan; exits 3 on a degenerate pairing."""
    check_common(d, a_str)
    p = resolve_precision(precision_bits)
    spec = density.PotentialSpec(d, a_str, t_str)
    sd = density.sign_data(d)
    basis, pivots = opoly.gram_schmidt_oracle(spec, n_max, p)
    rows = []
    for n, piv in enumerate(pivots):
        rows.append({
            "n": n,
            "pivot": fmt(piv.real, p),
            "sign": 1 if piv.real > 0 else -1,
            "rho": sd.rho(n),
        })
    meta = {"command": "gram", "d": d, "a": a_str,
            "t": str(spec.t), "N": n_max, "precision_bits": p}
    emit(meta, rows, output_format, out_path)


@main_group.command("qms")
@common_options()
def cmd_qms(d, a_str, n_max, precision_bits, output_format, out_path):
    """Truncated ladder-operator residuals on the interior block."""
    check_common(d, a_str)
    p = resolve_precision(precision_bits)
    tr = painleve.run(d, a_str, max(n_max - 1, 0), p)
    ops = qms.build_operators(tr, n_max, p)
    rows = [{"n": n, "w_n": fmt(ops.W[n + 1, n], p)} for n in range(n_max)]
    meta = {
        "command": "qms", "d": d, "a": a_str, "N": n_max,
        "precision_bits": p,
        "epsilon": fmt(ops.epsilon, p),
        "qms_residual": fmt(qms.qms_residual(ops), p),
        "lm_commutator_residual": fmt(qms.lm_commutator_residual(ops), p),
    }
    emit(meta, rows, output_format, out_path)


def _verify_checks(d: int, a_str: str, n_max: int, p: int):
    """Full invariant suite; yields (name, passed, detail) triples."""
    sd = density.sign_data(d)
    spec = density.PotentialSpec(d, a_str)
    tol = mp.mpf(10) ** -10

    he = hfun.h_eval(d, a_str, p)
    oder = hfun.ode_residual(d, a_str, p)
    yield ("ode_residual", oder < mp.mpf(10) ** -20, fmt(oder, p))
    lap = hfun.h_laplace(d, a_str, p)
    lapd = abs(lap - he.values[0]) / he.values[0]
    yield ("laplace_agreement", lapd < mp.mpf(10) ** -12, fmt(lapd, p))

    tr = painleve.run(d, a_str, n_max, p)
    yield ("positivity",
           tr.validated_to >= n_max and all(v > 0 for v in tr.V),
           f"validated_to={tr.validated_to}")

    gp = min(p, 128)
    G = density.gram(spec, min(n_max, 8), gp)
    with mp.workprec(gp + GUARD_BITS):
        herm = max(abs(G[n, m] - mp.conj(G[m, n]))
                   for n in range(G.N + 1) for m in range(G.N + 1))
    yield ("density_hermiticity", herm == 0, fmt(herm, gp))

    op = min(p, 128)
    basis = opoly.build(tr, min(n_max, 10), op)
    h = painleve.h_sequence(tr, op)
    off, diag = opoly.orthogonality_residual(basis, h, op)
    yield ("orthogonality_offdiag", off < tol, fmt(off, op))
    yield ("orthogonality_diagonal", diag < tol, fmt(diag, op))

    degenerate = None
    try:
        _, pivots = opoly.gram_schmidt_oracle(spec, min(n_max, 10), op)
        signs_ok = all((piv.real > 0) == (sd.rho(n) > 0)
                       for n, piv in enumerate(pivots))
        yield ("sign_pattern", signs_ok, "rho(n) matched")
    except opoly.SingularGram as exc:
        degenerate = exc
        yield ("sign_pattern", False,
               f"degenerate pivot at step {exc.step}: "
               f"{mp.nstr(mp.mpf(abs(exc.pivot)), 5)}")

    if d >= 3 and n_max >= d:
        ops = qms.build_operators(tr, n_max, op)
        r1 = qms.qms_residual(ops)
        r2 = qms.lm_commutator_residual(ops)
        yield ("qms_identity", r1 < tol, fmt(r1, op))
        yield ("lm_commutator", r2 < tol, fmt(r2, op))
    return degenerate


@main_group.command("verify")
@common_options()
def cmd_verify(d, a_str, n_max, precision_bits, output_format, out_path):
    """Run the invariant suite and report pass/fail per item."""
    check_common(d, a_str)
    p = resolve_precision(precision_bits)
    rows = []
    degenerate = False
    gen = _verify_checks(d, a_str, n_max, p)
    while True:
        try:
            name, ok, detail = next(gen)
        except StopIteration as stop:
            degenerate = stop.value is not None
            break
        rows.append({"check": name, "passed": ok, "detail": detail})
    all_ok = all(r["passed"] for r in rows)
    meta = {"command": "verify", "d": d, "a": a_str, "N": n_max,
            "precision_bits": p, "all_passed": all_ok}
    emit(meta, rows, output_format, out_path)
    if degenerate:
        sys.exit(EXIT_DEGENERATE)
    if not all_ok:
        sys.exit(EXIT_NUMERICAL)


def main(argv=None):
    try:
        main_group.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        sys.exit(EXIT_USAGE)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.Abort:
        sys.exit(EXIT_USAGE)
    except opoly.SingularGram as exc:
        click.echo(f"degenerate pairing: {exc}", err=True)
        sys.exit(EXIT_DEGENERATE)
    except NumericsError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    sys.exit(0)


if __name__ == "__main__":
    main()
