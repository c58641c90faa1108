"""Named invariant suite behind ``igusa-boundary verify``.

Each check returns ``(ok, detail)``; :func:`run_suite` runs them all and
reports PASS/FAIL per name.  Everything is deterministic: the only sampled
inputs come from a fixed-seed generator.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import boundary_zeros as bz
from . import euler_products as ep
from . import sym_ring
from .curve_arith import (
    CurveSpec,
    count_affine_points,
    count_affine_points_brute,
    count_points_mod_pn,
    frobenius_table,
)
from .local_igusa import local_closed_form, local_oracle

SEED = 20240601
S_GRID = (0.8, 1.35, 1.9, 2.45, 3.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}: {self.detail}"


def default_curves():
    return [
        CurveSpec.short_weierstrass(-1, 0, cm=True),
        CurveSpec.short_weierstrass(0, 1, cm=True),
    ]


def _good(table, bound):
    return [fd for fd in table if fd.p <= bound]


def check_hasse(curves, pmax, M):
    worst = 0.0
    for c in curves:
        t = frobenius_table(c, pmax)
        if len(t):
            worst = max(worst, float(np.max(np.abs(t.a) / (2 * np.sqrt(t.p)))))
    return worst <= 1, f"max |a_p|/(2 sqrt p) = {worst:.6f}"


def check_counts(curves, pmax, M):
    bound = min(pmax, 150)
    n = 0
    for c in curves:
        for fd in _good(frobenius_table(c, pmax), bound):
            n += 1
            if count_affine_points(c, fd.p) != count_affine_points_brute(c, fd.p):
                return False, f"sweep and brute counts differ at p = {fd.p}"
    return True, f"{n} primes agree with brute force"


def check_lifting(curves, pmax, M):
    bound = min(pmax, 13)
    n = 0
    for c in curves:
        for fd in _good(frobenius_table(c, pmax), bound):
            for k in (2, 3) if fd.p <= 7 else (2,):
                n += 1
                got = count_points_mod_pn(c, fd.p, k)
                if got != fd.p ** (k - 1) * fd.C_p:
                    return False, f"C_(p^{k}) = {got} != p^{k - 1} C_p at p = {fd.p}"
    return True, f"{n} prime powers satisfy C_(p^n) = p^(n-1) C_p"


def check_local_oracle(curves, pmax, M):
    bound = min(pmax, 11)
    n = 0
    for c in curves:
        for fd in _good(frobenius_table(c, pmax), bound):
            for s in (1, 2, 3):
                n += 1
                tr = local_oracle(c, fd.p, 1, s)
                if not tr.covers(local_closed_form(fd, s)):
                    return False, f"closed form outside the oracle bound at p = {fd.p}, s = {s}"
    return True, f"{n} exact comparisons within the tail bound"


def check_expansion(curves, pmax, M):
    for k in range(1, M + 1):
        e = sym_ring.cyclotomic_expand(k)
        if sym_ring.TARGET - e.Q - e.W.to_ring() != sym_ring.RingElement({}):
            return False, f"TARGET - Q - W != 0 at M = {k}"
        for (r, n, m) in e.W.coeffs:
            if r + 2 * n != m or m < k:
                return False, f"W_{k} term {(r, n, m)} off the lattice"
    return True, f"exact for M = 1..{M}"


def check_continuation(curves, pmax, M):
    worst_r = worst_f = 0.0
    for c in curves:
        t = frobenius_table(c, pmax)
        for k in range(1, M + 1):
            e = sym_ring.cyclotomic_expand(k)
            for s in S_GRID:
                worst_r = max(worst_r, float(np.max(ep.continuation_residuals(t, k, s, e), initial=0)))
            for fd in _good(t, min(pmax, 60)):
                chk = ep.continuation_identity_check(fd, k, complex(1.3, 0.7), e)
                worst_f = max(worst_f, chk.factor_residual, chk.residual)
    ok = worst_r < 1e-9 and worst_f < 1e-9
    return ok, f"max residual {worst_r:.3e}, factor residual {worst_f:.3e}"


def check_z_identities(curves, pmax, M):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for c in curves:
        for fd in _good(frobenius_table(c, pmax), pmax):
            for s in rng.uniform(0.6, 3.0, 2) + 1j * rng.uniform(-5, 5, 2):
                for r in range(1, 5):
                    lhs = ep.z_r_local(fd, r, s, -1) * ep.z_r_local(fd, r, s, 1)
                    rhs = ep.z_r_local(fd, 2 * r, 2 * s, 1)
                    worst = max(worst, abs(lhs - rhs) / abs(rhs))
                sp = ep.satake(fd)
                for m in range(1, 9):
                    a = ep.sym_power_reciprocal(sp, m, s)
                    b = ep.sym_power_reciprocal_via_z(fd, m, s)
                    worst = max(worst, abs(a - b) / abs(a))
    return worst < 1e-9, f"max relative error {worst:.3e}"


def check_first_continuation(curves, pmax, M):
    n = 0
    for c in curves:
        for fd in frobenius_table(c, pmax).nondegenerate():
            for s in (1, 2):
                n += 1
                lhs, rhs = ep.first_continuation_identity(fd, s)
                if lhs != rhs:
                    return False, f"exact identity fails at p = {fd.p}, s = {s}"
    return True, f"{n} exact identities"


def check_hasse_weil(curves, pmax, M):
    worst = 0.0
    for c in curves:
        for fd in _good(frobenius_table(c, pmax), pmax):
            a = ep.hasse_weil_local(fd, 2.5)
            b = ep.hasse_weil_exp_sum(fd, 2.5, terms=60)
            worst = max(worst, abs(a - b) / abs(a))
    return worst < 1e-9, f"max relative error {worst:.3e}"


def check_zeros(curves, pmax, M):
    worst = 0.0
    members = 0
    for c in curves:
        for rec in bz.zero_table(c, pmax):
            worst = max(worst, max(rec.residual_at(n) for n in range(-5, 6)))
            if rec.in_P_E:
                members += 1
                if not all(bz.zer3_chain(rec)):
                    return False, f"implication chain breaks at p = {rec.p}"
                if rec.gap > math.log(3) / math.log(rec.p):
                    return False, f"gap bound fails at p = {rec.p}"
    return worst < 1e-9, f"{members} boundary primes, max residual {worst:.3e}"


def check_semicircle(curves, pmax, M):
    ends = bz.semicircle_cdf([-1.0, 1.0])
    grid = bz.semicircle_cdf(np.linspace(-1, 1, 101))
    ok = ends[0] == 0 and abs(ends[1] - 1) < 1e-15 and bool(np.all(np.diff(grid) >= 0))
    return ok, "F(-1) = 0, F(1) = 1, monotone"


def check_products(curves, pmax, M):
    worst = -math.inf
    for c in curves:
        g = ep.igusa_global(c, 2, pmax)
        f = ep.first_continuation(c, 2, pmax)
        worst = max(worst, abs(g.value - f) / abs(g.value) - g.tail_estimate)
    return worst <= 0, f"igusa_global vs continued form at s = 2 within tail estimate (slack {worst:.3e})"


CHECKS = (
    ("hasse_bound", check_hasse),
    ("sweep_vs_brute_counts", check_counts),
    ("prime_power_lifting", check_lifting),
    ("closed_form_vs_level_oracle", check_local_oracle),
    ("expansion_exact_and_on_lattice", check_expansion),
    ("continuation_identity", check_continuation),
    ("z_ratio_and_s_recursions", check_z_identities),
    ("first_continuation_exact", check_first_continuation),
    ("hasse_weil_exp_form", check_hasse_weil),
    ("boundary_zero_chain", check_zeros),
    ("semicircle_cdf", check_semicircle),
    ("global_vs_continued_product", check_products),
)


def run_suite(pmax=100, M=4, curves=None, names=None):
    curves = curves or default_curves()
    out = []
    for name, fn in CHECKS:
        if names and name not in names:
            continue
        try:
            ok, detail = fn(curves, pmax, M)
        except Exception as exc:  # a crash is a failure of that invariant
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))
    return out
