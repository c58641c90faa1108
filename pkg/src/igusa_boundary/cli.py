"""Command-line front end: ``igusa-boundary <subcommand> [options]``.

Exit codes: 0 success, 1 invariant failure, 2 usage or configuration
error, 3 budget exceeded.  ``IGUSA_OUTPUT_DIR`` names a directory that
receives ``<subcommand>.<format>`` when ``--output`` is not given.
"""

import argparse
import csv
import io
import json
import math
import numbers
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import boundary_zeros as bz
from . import euler_products as ep
from . import kernels, sym_ring
from .curve_arith import (
    DEFAULT_ORACLE_BUDGET,
    FROBENIUS_CSV_COLUMNS,
    CurveSpec,
    frobenius_data,
    frobenius_table,
)
from .errors import BudgetExceededError, ExpansionInvariantError, IgusaError
from .local_igusa import local_closed_form, local_oracle
from .verify import run_suite

SCHEMA_VERSION = 1
DEFAULT_CURVE = '{"weierstrass": [-1, 0], "cm": true}'
OUTPUT_DIR_ENV = "IGUSA_OUTPUT_DIR"

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ parsing

def _float(text, whole):
    try:
        v = float(text)
    except ValueError:
        raise UsageError(f"cannot parse complex number {whole!r} (expected a+bi)")
    if not math.isfinite(v):
        raise UsageError(f"non-finite value in {whole!r}")
    return v


def parse_complex(text):
    """Parse ``a``, ``a+bi``, ``a-bi``, ``bi`` or ``i`` with decimal literals."""
    t = text.replace(" ", "")
    if not t:
        raise UsageError("empty complex number")
    if t[-1] not in "ij":
        return complex(_float(t, text), 0.0)
    body = t[:-1]
    k = max((i for i, ch in enumerate(body) if ch in "+-" and i > 0 and body[i - 1] not in "eE"), default=0)
    re_txt, im_txt = body[:k], body[k:]
    if im_txt in ("", "+", "-"):
        im = -1.0 if im_txt == "-" else 1.0
    else:
        im = _float(im_txt, text)
    return complex(_float(re_txt, text) if re_txt else 0.0, im)


def parse_grid(text):
    """``start:stop:step`` (stop included up to rounding), a comma list, or one value."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid {text!r} must be start:stop:step")
        a, b = parse_complex(parts[0]), parse_complex(parts[1])
        try:
            step = float(parts[2])
        except ValueError:
            raise UsageError(f"grid step {parts[2]!r} is not a number")
        if step <= 0:
            raise UsageError("grid step must be positive")
        if a.imag != b.imag:
            raise UsageError("grid endpoints must share an imaginary part")
        n = int(math.floor((b.real - a.real) / step + 1e-9))
        if n < 0:
            raise UsageError("grid stop is below start")
        return [complex(a.real + k * step, a.imag) for k in range(n + 1)]
    return [parse_complex(t) for t in text.split(",")]


def _load_curve(source):
    try:
        return CurveSpec.from_json(source)
    except IgusaError:
        raise
    except (OSError, TypeError, ValueError) as exc:
        raise UsageError(f"curve config: {exc}")


# --------------------------------------------------------------- formatting


class Emitter:
    """Serialises a table or document with a fixed float precision."""

    def __init__(self, args):
        self.fmt = args.format
        self.digits = min(args.precision, 17)
        self.precision = args.precision
        self.command = args.command
        self.output = args.output
        self.config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "output")}

    def num(self, x):
        if isinstance(x, bool) or x is None or isinstance(x, str):
            return x
        if isinstance(x, numbers.Integral):
            return int(x)
        if isinstance(x, Fraction):
            return str(x)
        if hasattr(x, "imag") and not isinstance(x, float):
            if type(x).__module__.startswith("mpmath"):
                import mpmath

                return {"re": mpmath.nstr(x.real, self.precision), "im": mpmath.nstr(x.imag, self.precision)}
            return {"re": self.num(float(x.real)), "im": self.num(float(x.imag))}
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{self.digits}g}")

    def cell(self, x):
        if isinstance(x, complex):
            return f"{self.cell(x.real)}{'+' if x.imag >= 0 else '-'}{self.cell(abs(x.imag))}i"
        if isinstance(x, float):
            return f"{x:.{self.digits}g}"
        v = self.num(x)
        if isinstance(v, dict):
            return f"{v['re']}+{v['im']}i".replace("+-", "-")
        return "" if v is None else str(v)

    def _json_value(self, x):
        if isinstance(x, dict):
            return {str(k): self._json_value(v) for k, v in x.items()}
        if isinstance(x, (list, tuple)):
            return [self._json_value(v) for v in x]
        return self.num(x)

    def render(self, columns, rows, meta=None, text=None, extra=None):
        if self.fmt == "text":
            if text is None:
                raise UsageError(f"--format text is not available for {self.command}")
            return text.rstrip("\n") + "\n"
        if self.fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([self.cell(v) for v in r])
            return buf.getvalue()
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "precision": self.precision,
            "config": self._json_value(self.config),
            "meta": self._json_value(meta or {}),
            "columns": list(columns),
            "rows": [self._json_value(list(r)) for r in rows],
        }
        doc.update(extra or {})
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"

    def write(self, payload):
        target = self.output
        if target is None and os.environ.get(OUTPUT_DIR_ENV):
            ext = {"json": "json", "csv": "csv", "text": "txt"}[self.fmt]
            target = str(Path(os.environ[OUTPUT_DIR_ENV]) / f"{self.command}.{ext}")
        if target is None or target == "-":
            sys.stdout.write(payload)
            return
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        Path(target).write_text(payload)
        print(f"wrote {target}", file=sys.stderr)


# ----------------------------------------------------------------- commands


def cmd_ap(args, out):
    table = frobenius_table(args.curve_spec, args.pmax)
    rows = []
    for fd in table:
        lam = (None, None) if fd.degenerate else (fd.lambda_p.numerator, fd.lambda_p.denominator)
        rows.append((fd.p, fd.C_p, fd.a_p, *lam, fd.pi_p.real, fd.pi_p.imag, fd.b_p))
    return out.render(FROBENIUS_CSV_COLUMNS, rows, {"bad_primes": sorted(table.bad)}), EXIT_OK


def cmd_expand(args, out):
    try:
        e = sym_ring.cyclotomic_expand(args.M, budget=args.term_budget)
    except ExpansionInvariantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None, EXIT_INVARIANT
    rows = [("factor", f.r, f.n, f.m, f.eps, f.c) for f in e.factors]
    rows += [("W", r, n, m, "", str(a)) for (r, n, m), a in e.W.sorted_items()]
    meta = {"M": e.M, "display": e.display()}
    cols = ("kind", "r", "n", "m", "eps", "coeff")
    return out.render(cols, rows, meta, e.display(), extra=e.to_json()), EXIT_OK


def cmd_local(args, out):
    fd = frobenius_data(args.curve_spec, args.p)
    rows = []
    for s in args.s:
        exact = s.imag == 0 and s.real == int(s.real)
        sv = int(s.real) if exact else s
        closed = local_closed_form(fd, sv)
        row = [fd.p, s, closed, float(closed.real) if isinstance(closed, complex) else float(closed)]
        if args.levels is not None:
            tr = local_oracle(args.curve_spec, fd.p, args.levels, sv, budget=args.oracle_budget)
            row += [tr.partial_sum, tr.tail_bound, "PASS" if tr.covers(closed) else "FAIL"]
        rows.append(row)
    cols = ["p", "s", "closed_form", "closed_form_float"]
    if args.levels is not None:
        cols += ["oracle_partial_sum", "oracle_tail_bound", "agreement"]
    status = EXIT_INVARIANT if args.levels is not None and any(r[-1] == "FAIL" for r in rows) else EXIT_OK
    return out.render(cols, rows), status


def cmd_global(args, out):
    rows = []
    table = frobenius_table(args.curve_spec, args.cutoff)
    dps = args.precision if args.precision > 15 else None
    for s in args.s:
        g = ep.igusa_global(args.curve_spec, s, args.cutoff, table)
        row = [s, args.cutoff, g.value, g.tail_estimate, g.certified, " ".join(map(str, sorted(g.omitted_primes)))]
        if args.continued:
            row.append(ep.first_continuation(args.curve_spec, s, args.cutoff, table, dps=dps))
        rows.append(row)
    cols = ["s", "cutoff", "value", "tail_estimate", "certified", "omitted_primes"]
    if args.continued:
        cols.append("continued_value")
    return out.render(cols, rows), EXIT_OK


def cmd_zr(args, out):
    table = frobenius_table(args.curve_spec, args.cutoff)
    rows = []
    for s in args.s:
        z = ep.z_r_partial(args.curve_spec, args.r, s, args.cutoff, args.eps, table)
        rows.append([args.r, args.eps, s, args.cutoff, z.value, z.tail_estimate, z.certified])
    return out.render(["r", "eps", "s", "cutoff", "value", "tail_estimate", "certified"], rows), EXIT_OK


def cmd_check_continuation(args, out):
    table = frobenius_table(args.curve_spec, args.pmax)
    e = sym_ring.cyclotomic_expand(args.M)
    rows, worst = [], 0.0
    for fd in table:
        for s in args.s:
            c = ep.continuation_identity_check(fd, args.M, s, e)
            worst = max(worst, c.residual, c.factor_residual)
            rows.append([c.p, c.M, c.s, c.residual, c.factor_residual])
    status = EXIT_OK if worst < args.tol else EXIT_INVARIANT
    meta = {"max_residual": worst, "tolerance": args.tol}
    return out.render(["p", "M", "s", "residual", "factor_residual"], rows, meta), status


def cmd_probe_wq(args, out):
    pr = ep.w_over_q_convergence_probe(args.curve_spec, args.M, args.s, args.cutoff)
    meta = {
        "prod_1_plus_W": pr.z1.value,
        "prod_1_plus_W_over_Q": pr.z2.value,
        "tail_estimate_W": pr.z1.tail_estimate,
        "tail_estimate_W_over_Q": pr.z2.tail_estimate,
        "decay_exponent_W": pr.decay_exponent_w,
        "decay_exponent_W_over_Q": pr.decay_exponent_wq,
        "excluded_primes": list(pr.excluded_primes),
        "certified": pr.certified,
    }
    if args.format == "json" or args.format == "csv":
        rows = [
            [int(p), abs(w), abs(wq), g]
            for p, w, wq, g in zip(pr.primes.tolist(), pr.w_terms, pr.wq_terms, pr.majorant.tolist())
        ]
    else:
        rows = []
    text = "\n".join(f"{k}: {out.cell(v) if not isinstance(v, list) else v}" for k, v in meta.items())
    return out.render(["p", "abs_W", "abs_W_over_Q", "majorant"], rows, meta, text), EXIT_OK


def cmd_zeros(args, out):
    table = frobenius_table(args.curve_spec, args.pmax)
    if args.target_imag is None:
        recs = bz.zero_table(args.curve_spec, args.pmax, table)
        if not args.all:
            recs = [r for r in recs if r.in_P_E]
        return out.render(bz.ZERO_CSV_COLUMNS, [(r.p, r.b_p, r.r_p, r.s_p, r.theta_p, r.gap) for r in recs]), EXIT_OK
    rows = bz.accumulation_report(args.curve_spec, args.pmax, args.target_imag, table)
    cols = ("p", "n_p", "re_z", "im_z", "distance", "imag_mismatch")
    data = [(r.p, r.n_p, r.zero.real, r.zero.imag, r.distance, r.imag_mismatch) for r in rows]
    return out.render(cols, data, {"target_imag": args.target_imag}), EXIT_OK


def cmd_satotate(args, out):
    rep = bz.sato_tate_report(args.curve_spec, args.pmax, args.grid_size)
    meta = {
        "prime_cutoff": rep.prime_cutoff,
        "samples": int(rep.samples.size),
        "sup_discrepancy": rep.sup_discrepancy,
        "zero_fraction": rep.zero_fraction,
        "label": rep.label,
    }
    text = "\n".join(f"{k}: {out.cell(v)}" for k, v in meta.items())
    hist = rep.histogram(args.bins)
    return out.render(("bin_center", "empirical_mass", "semicircle_mass"), hist, meta, text), EXIT_OK


def cmd_verify(args, out):
    results = run_suite(args.pmax, args.M, [args.curve_spec] if args.curve_given else None)
    rows = [(r.name, "PASS" if r.ok else "FAIL", r.detail) for r in results]
    text = "\n".join(r.line() for r in results)
    status = EXIT_OK if all(r.ok for r in results) else EXIT_INVARIANT
    return out.render(("invariant", "status", "detail"), rows, None, text), status


# ------------------------------------------------------------------ parser


def _precision(text):
    v = int(text)
    if not 15 <= v <= 50:
        raise argparse.ArgumentTypeError("precision must be in [15, 50]")
    return v


def _at_least(lo):
    def conv(text):
        v = int(text)
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}")
        return v

    return conv


def _grid(text):
    try:
        return parse_grid(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--curve", default=None,
                        help="curve as inline JSON or a path to a JSON file (default y^2 = x^3 - x, CM)")
    common.add_argument("--output", default=None, help=f"output file (default stdout or ${OUTPUT_DIR_ENV})")
    common.add_argument("--precision", type=_precision, default=15,
                        help="significant digits for printed floats; > 15 also runs zeta in mpmath")
    common.add_argument("--workers", type=_at_least(1), default=None,
                        help="threads for the prime sweep (default: all cores)")

    def fmt(p, text=False):
        choices = ["json", "csv", "text"] if text else ["json", "csv"]
        p.add_argument("--format", choices=choices, default="text" if text else "csv")

    parser = argparse.ArgumentParser(prog="igusa-boundary", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ap", parents=[common], help="Frobenius data table")
    p.add_argument("--pmax", type=_at_least(2), required=True)
    fmt(p)
    p.set_defaults(func=cmd_ap)

    p = sub.add_parser("expand", parents=[common], help="cyclotomic expansion of 1 - uY - vY")
    p.add_argument("--M", type=_at_least(1), required=True)
    p.add_argument("--term-budget", type=_at_least(1), default=10**6)
    fmt(p, text=True)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("local", parents=[common], help="local Igusa factor at one prime")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--s", type=_grid, default=[complex(1)])
    p.add_argument("--levels", type=_at_least(0), default=None, help="also run the level-sum oracle")
    p.add_argument("--oracle-budget", type=_at_least(1), default=DEFAULT_ORACLE_BUDGET)
    fmt(p)
    p.set_defaults(func=cmd_local)

    p = sub.add_parser("global", parents=[common], help="truncated global Igusa product")
    p.add_argument("--s", type=_grid, required=True)
    p.add_argument("--cutoff", "--pmax", dest="cutoff", type=_at_least(2), required=True)
    p.add_argument("--continued", action="store_true", help="also evaluate the first continued form")
    fmt(p)
    p.set_defaults(func=cmd_global)

    p = sub.add_parser("zr", parents=[common], help="truncated product of Z_{r,p}")
    p.add_argument("--r", type=_at_least(0), required=True)
    p.add_argument("--s", type=_grid, required=True)
    p.add_argument("--cutoff", "--pmax", dest="cutoff", type=_at_least(2), required=True)
    p.add_argument("--eps", type=int, choices=[1, -1], default=1)
    fmt(p)
    p.set_defaults(func=cmd_zr)

    p = sub.add_parser("check-continuation", parents=[common], help="continuation identity residuals")
    p.add_argument("--pmax", type=_at_least(2), required=True)
    p.add_argument("--M", type=_at_least(1), required=True)
    p.add_argument("--s", "--s-grid", dest="s", type=_grid, default=parse_grid("0.8:3:0.55"))
    p.add_argument("--tol", type=float, default=1e-9)
    fmt(p)
    p.set_defaults(func=cmd_check_continuation)

    p = sub.add_parser("probe-wq", parents=[common], help="convergence probe for prod(1 + W) and prod(1 + W/Q)")
    p.add_argument("--M", type=_at_least(1), required=True)
    p.add_argument("--s", type=parse_complex_arg, required=True)
    p.add_argument("--cutoff", "--pmax", dest="cutoff", type=_at_least(2), required=True)
    fmt(p, text=True)
    p.set_defaults(func=cmd_probe_wq)

    p = sub.add_parser("zeros", parents=[common], help="local zeros near Re(s) = -3/2")
    p.add_argument("--pmax", type=_at_least(2), required=True)
    p.add_argument("--target-imag", type=float, default=None)
    p.add_argument("--all", action="store_true", help="every prime with a_p != 0, not only b_p > 1")
    fmt(p)
    p.set_defaults(func=cmd_zeros)

    p = sub.add_parser("satotate", parents=[common], help="Sato-Tate discrepancy and histogram")
    p.add_argument("--pmax", type=_at_least(2), required=True)
    p.add_argument("--bins", type=_at_least(1), default=20)
    p.add_argument("--grid-size", type=_at_least(2), default=2001)
    fmt(p, text=True)
    p.set_defaults(func=cmd_satotate)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("--pmax", type=_at_least(2), default=100)
    p.add_argument("--M", type=_at_least(1), default=4)
    fmt(p, text=True)
    p.set_defaults(func=cmd_verify)
    return parser


def parse_complex_arg(text):
    try:
        return parse_complex(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _set_workers(n):
    if n is None or not kernels.HAVE_NUMBA:
        return
    import numba

    numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.curve_given = args.curve is not None
        args.curve_spec = _load_curve(args.curve if args.curve is not None else DEFAULT_CURVE)
        _set_workers(args.workers)
        out = Emitter(args)
        out.config.pop("curve_spec", None)
        out.config.pop("curve_given", None)
        out.config["curve"] = args.curve_spec.to_json()
        payload, status = args.func(args, out)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, IgusaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssertionError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    if payload is not None:
        out.write(payload)
    return status


if __name__ == "__main__":
    sys.exit(main())
