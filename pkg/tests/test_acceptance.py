"""Acceptance suite: one group of tests per numbered criterion.

Each test records a short ``detail`` string; the conftest summary hook prints
one line per criterion at the end of the run.
"""

import cmath
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from igusa_boundary import boundary_zeros as bz
from igusa_boundary import euler_products as ep
from igusa_boundary import kernels
from igusa_boundary import sym_ring as sr
from igusa_boundary.curve_arith import count_points_mod_pn, frobenius_data, frobenius_table
from igusa_boundary.local_igusa import local_closed_form, local_oracle


def note(record_property, text):
    record_property("detail", text)


class Clock:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False

    def check(self):
        assert self.elapsed < self.limit, f"runtime {self.elapsed:.2f} s exceeds {self.limit} s"
        return f"{self.elapsed:.2f} s < {self.limit} s"


@pytest.fixture
def single_thread():
    if not kernels.NUMBA_COMPILED:
        yield
        return
    import numba

    before = numba.get_num_threads()
    numba.set_num_threads(1)
    yield
    numba.set_num_threads(before)


# ------------------------------------------------------------------ criterion 1

EXPECTED_EXPANSIONS = {
    2: ([(1, 0, 1)], {(0, 1, 2): -1}),
    3: ([(1, 0, 1), (0, 1, 2)], {(1, 1, 3): -1, (0, 2, 4): 1}),
    4: (
        [(1, 0, 1), (0, 1, 2), (1, 1, 3)],
        {(2, 2, 6): 1, (2, 1, 4): -1, (1, 4, 9): -1, (0, 5, 10): 1, (0, 3, 6): 1, (0, 2, 4): -1},
    ),
}


@pytest.mark.criterion(1)
def test_criterion_1_expansion_fidelity(record_property):
    sr.cyclotomic_expand.cache_clear()
    with Clock(1.0) as clk:
        got = {M: sr.cyclotomic_expand(M) for M in (2, 3, 4)}
    for M, (points, W) in EXPECTED_EXPANSIONS.items():
        e = got[M]
        assert [(f.r, f.n, f.m) for f in e.factors] == points
        assert all(f.eps == 1 and f.c == 1 for f in e.factors)
        assert e.W.coeffs == W
    note(record_property, f"M = 2, 3, 4 factors and W exact; {clk.check()}")


# ------------------------------------------------------------------ criterion 2


@pytest.mark.criterion(2)
def test_criterion_2_expansion_structure(record_property):
    sr.cyclotomic_expand.cache_clear()
    with Clock(30.0) as clk:
        for M in range(1, 9):
            e = sr.cyclotomic_expand(M)
            for (r, n, m), a in e.W.coeffs.items():
                assert a != 0 and r + 2 * n == m and m >= M
            assert sr.TARGET - e.Q - e.W.to_ring() == sr.RingElement()
    note(record_property, f"M <= 8 on the lattice with m >= M, identity exact in R; {clk.check()}")


# ------------------------------------------------------------------ criterion 3


@pytest.mark.criterion(3)
def test_criterion_3_local_oracle(record_property, E_cm, E_plus1):
    n_lift = n_cmp = 0
    with Clock(120.0) as clk:
        for c in (E_cm, E_plus1):
            for fd in frobenius_table(c, 13).nondegenerate():
                for k in (1, 2, 3):
                    assert count_points_mod_pn(c, fd.p, k) == fd.p ** (k - 1) * fd.C_p
                    n_lift += 1
                for s in (1, 2, 3):
                    tr = local_oracle(c, fd.p, 2, s)
                    closed = local_closed_form(fd, s)
                    assert isinstance(closed, Fraction) and isinstance(tr.partial_sum, Fraction)
                    assert tr.covers(closed)
                    n_cmp += 1
    note(record_property, f"{n_lift} lifting counts, {n_cmp} exact oracle comparisons; {clk.check()}")


# ------------------------------------------------------------------ criterion 4


@pytest.mark.criterion(4)
def test_criterion_4_continuation(record_property, E_cm, E_plus1):
    grid = [complex(x, t) for x, t in zip(np.linspace(0.8, 3.0, 5), (0.0, 2.5, -7.0, 14.0, 0.0))]
    worst_r = worst_f = 0.0
    n = 0
    with Clock(60.0) as clk:
        exps = {M: sr.cyclotomic_expand(M) for M in range(1, 7)}
        for c in (E_cm, E_plus1):
            for fd in frobenius_table(c, 500).nondegenerate():
                for M, e in exps.items():
                    for s in grid:
                        chk = ep.continuation_identity_check(fd, M, s, expansion=e)
                        worst_r = max(worst_r, chk.residual)
                        worst_f = max(worst_f, chk.factor_residual)
                        n += 1
    assert worst_r < 1e-9 and worst_f < 1e-9
    note(record_property, f"{n} checks, max residual {worst_r:.1e}, factor {worst_f:.1e}; {clk.check()}")


# ------------------------------------------------------------------ criterion 5


@pytest.mark.criterion(5)
def test_criterion_5_z_identities(record_property, E_cm, E_11a3):
    rng = np.random.default_rng(20240601)
    ss = [complex(a, b) for a, b in zip(rng.uniform(0.2, 3.0, 20), rng.uniform(-15, 15, 20))]
    worst = 0.0
    with Clock(10.0) as clk:
        for c in (E_cm, E_11a3):
            for fd in frobenius_table(c, 100).nondegenerate():
                sp = ep.satake(fd)
                for s in ss:
                    for r in range(1, 5):
                        lhs = ep.z_r_local(fd, r, s, -1) * ep.z_r_local(fd, r, s, 1)
                        rhs = ep.z_r_local(fd, 2 * r, 2 * s, 1)
                        worst = max(worst, abs(lhs - rhs) / abs(rhs))
                    for m in range(1, 9):
                        want = ep.sym_power_reciprocal(sp, m, s)
                        got = ep.sym_power_reciprocal_via_z(fd, m, s)
                        worst = max(worst, abs(got - want) / abs(want))
    assert worst < 1e-9
    note(record_property, f"max relative error {worst:.1e}; {clk.check()}")


# ------------------------------------------------------------------ criterion 6


@pytest.mark.criterion(6)
def test_criterion_6_cauchy_at_s1(record_property, E_cm):
    with Clock(120.0) as clk:
        lo = ep.igusa_global(E_cm, 1, 10**3)
        hi = ep.igusa_global(E_cm, 1, 10**4)
    log_gap = abs(cmath.log(hi.value / lo.value))
    diff = abs(hi.value - lo.value)
    assert lo.certified
    # the tail estimate bounds the log of the omitted product
    assert log_gap <= lo.tail_estimate
    assert diff <= lo.cauchy_bound()
    note(
        record_property,
        f"|log ratio| {log_gap:.3e} <= tail {lo.tail_estimate:.3e}; |diff| {diff:.3e} <= "
        f"{lo.cauchy_bound():.3e}; {clk.check()}",
    )


@pytest.mark.criterion(6)
@pytest.mark.parametrize("M, s", [(2, 1.2), (4, 0.8)])
def test_criterion_6_probe_decay(record_property, E_cm, M, s):
    with Clock(120.0) as clk:
        pr = ep.w_over_q_convergence_probe(E_cm, M, s, 10**4)
    assert pr.decay_exponent_w <= -1.1 and pr.decay_exponent_wq <= -1.1
    note(
        record_property,
        f"M={M} s={s}: W exponent {pr.decay_exponent_w:.2f}, W/Q {pr.decay_exponent_wq:.2f}; {clk.check()}",
    )


# ------------------------------------------------------------------ criterion 7


@pytest.mark.criterion(7)
def test_criterion_7_boundary_zeros(record_property, E_cm, single_thread):
    frobenius_table.cache_clear()
    cutoff = 10**5
    with Clock(300.0) as clk:
        table = frobenius_table(E_cm, cutoff)
        recs = bz.zero_table(E_cm, cutoff, table=table)
        members = [r for r in recs if r.in_P_E]
        assert 13 in [r.p for r in members]
        for r in members:
            assert all(bz.zer3_chain(r))
        worst = max(r.residual for r in recs)
        assert worst < 1e-10
        gaps = {}
        for P in (10**2, 10**3, 10**4):
            gaps[P] = max(r.gap for r in members if r.p >= P)
            assert gaps[P] <= math.log(3) / math.log(P)
    gap_text = ", ".join(f"P={P}: {g:.3f}" for P, g in gaps.items())
    note(
        record_property,
        f"|P_E| = {len(members)}, chain holds, max residual {worst:.1e}, max gaps {gap_text}; {clk.check()}",
    )


@pytest.mark.criterion(7)
@pytest.mark.xfail(
    strict=True,
    reason="73 is not in P_E: the count gives a_73 = -6 and 73 = 3^2 + 8^2 forces |a_73| = 6 < sqrt(73)",
)
def test_criterion_7_contains_73(record_property, E_cm):
    fd = frobenius_data(E_cm, 73)
    note(record_property, f"a_73 = {fd.a_p}, b_73 = {fd.b_p:.3f}")
    assert 73 in [r.p for r in bz.boundary_primes(E_cm, 10**5)]


# ------------------------------------------------------------------ criterion 8


@pytest.mark.criterion(8)
def test_criterion_8_sato_tate(record_property, E_cm, E_11a3):
    with Clock(300.0) as clk:
        generic = bz.sato_tate_report(E_11a3, 10**5)
        cm = bz.sato_tate_report(E_cm, 10**5)
    assert generic.label == "non-CM" and generic.sup_discrepancy < 0.05
    assert cm.label == bz.CM_LABEL and cm.zero_fraction > 0.4
    note(
        record_property,
        f"non-CM discrepancy {generic.sup_discrepancy:.4f}; CM t_p = 0 fraction {cm.zero_fraction:.3f} "
        f"labeled; {clk.check()}",
    )


# ------------------------------------------------------------------ criterion 9


@pytest.mark.criterion(9)
def test_criterion_9_headline_results(record_property):
    record_property("status", "INFO")
    note(
        record_property,
        "continuation past the abscissa and the natural boundary are not numerically verifiable; "
        "criteria 4-7 give the identity and accumulation evidence",
    )
