import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from igusa_boundary.curve_arith import (
    CurveSpec,
    FrobeniusData,
    bad_primes,
    count_affine_points,
    count_affine_points_brute,
    count_points_mod_pn,
    frobenius_data,
    frobenius_table,
    singular_point_mod,
    write_frobenius_csv,
)
from igusa_boundary.errors import (
    BadPrimeError,
    BudgetExceededError,
    CurveFormatError,
    SingularCurveError,
)
from igusa_boundary.primes import is_prime, primes_up_to


def naive_count(monos, q):
    """Independent oracle: plain Python double loop."""
    return sum(
        1
        for x in range(q)
        for y in range(q)
        if sum(c * x**i * y**j for i, j, c in monos) % q == 0
    )


def naive_singular(monos, p):
    def f(x, y, mon):
        return sum(c * x**i * y**j for i, j, c in mon) % p

    fx = [(i - 1, j, c * i) for i, j, c in monos if i]
    fy = [(i, j - 1, c * j) for i, j, c in monos if j]
    return any(
        f(x, y, monos) == 0 and f(x, y, fx) == 0 and f(x, y, fy) == 0
        for x in range(p)
        for y in range(p)
    )


# ----------------------------------------------------------------- CurveSpec


def test_weierstrass_discriminant(E_cm, E_plus1):
    assert E_cm.discriminant == 64
    assert E_plus1.discriminant == -432


def test_singular_weierstrass_rejected():
    with pytest.raises(SingularCurveError, match="singular over Q"):
        CurveSpec.short_weierstrass(0, 0)
    with pytest.raises(SingularCurveError):
        CurveSpec.short_weierstrass(-3, 2)  # 4(-27) + 27*4 = 0


def test_singular_general_poly_rejected():
    # y^2 = x^3 + x^2 has a node at the origin
    with pytest.raises(SingularCurveError):
        CurveSpec.from_poly([(0, 2, 1), (3, 0, -1), (2, 0, -1)])


def test_json_round_trip(E_cm, E_11a3):
    for c in (E_cm, E_11a3):
        again = CurveSpec.from_json(json.dumps(c.to_json()))
        assert again == c


def test_json_from_file(tmp_path, E_plus1):
    path = tmp_path / "curve.json"
    path.write_text(json.dumps({"weierstrass": [0, 1], "cm": True}))
    assert CurveSpec.from_json(str(path)) == E_plus1


@pytest.mark.parametrize(
    "text, field",
    [
        ('{"weierstrass": [1]}', "weierstrass"),
        ('{"weierstrass": [1, "a"]}', "weierstrass"),
        ('{"poly": 3}', "poly"),
        ('{"poly": [[1, 2]]}', "poly"),
    ],
)
def test_json_field_diagnostics(text, field):
    with pytest.raises(CurveFormatError) as info:
        CurveSpec.from_json(text)
    assert info.value.field == field


def test_json_syntax_error_reports_position():
    with pytest.raises(CurveFormatError, match="line 2, column"):
        CurveSpec.from_json('{"weierstrass": [1,\n 2')


def test_json_missing_curve_key():
    with pytest.raises(CurveFormatError):
        CurveSpec.from_json('{"cm": true}')


# ---------------------------------------------------------------- bad primes


def test_bad_primes_frozen(E_cm, E_plus1, E_11a3):
    assert bad_primes(E_cm) == {2}
    assert bad_primes(E_plus1) == {2, 3}
    assert bad_primes(E_11a3) == {11}


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 13])
def test_bad_primes_match_singular_search(E_cm, E_plus1, E_11a3, p):
    for c in (E_cm, E_plus1, E_11a3):
        singular = naive_singular(c.monomials, p)
        assert (p in bad_primes(c)) == singular
        assert (singular_point_mod(c, p) is not None) == singular


def test_singular_witness_is_singular(E_plus1):
    for p in bad_primes(E_plus1):
        x, y = singular_point_mod(E_plus1, p)
        assert E_plus1(x, y) % p == 0


def test_declared_bad_primes_are_honoured():
    c = CurveSpec.short_weierstrass(-1, 0, bad_primes=[5])
    assert bad_primes(c) == {2, 5}
    with pytest.raises(BadPrimeError):
        frobenius_data(c, 5)


# ------------------------------------------------------------------ counting


@pytest.mark.parametrize("p, expected", [(3, 3), (5, 7), (7, 7), (11, 11), (13, 7)])
def test_counts_frozen(E_cm, p, expected):
    assert naive_count(E_cm.monomials, p) == expected
    assert count_affine_points(E_cm, p) == expected


def test_fast_count_matches_brute_to_200(E_cm, E_plus1, E_11a3):
    for c in (E_cm, E_plus1, E_11a3):
        bad = bad_primes(c)
        for p in primes_up_to(200):
            p = int(p)
            if p in bad:
                continue
            assert count_affine_points(c, p) == count_affine_points_brute(c, p), p


def test_brute_count_matches_python_oracle(E_11a3):
    for p in (2, 3, 5, 7, 13, 17):
        assert count_affine_points_brute(E_11a3, p) == naive_count(E_11a3.monomials, p)


def test_cubic_in_y_uses_brute_path():
    # y^3 = x^3 + x + 1 style: a smooth plane cubic not quadratic in y
    c = CurveSpec.from_poly([(0, 3, 1), (3, 0, -1), (1, 0, -1), (0, 0, -1)])
    for p in (5, 7, 11):
        assert count_affine_points(c, p) == naive_count(c.monomials, p)


@pytest.mark.parametrize("p, n, expected", [(5, 1, 7), (5, 2, 35), (3, 3, 27)])
def test_prime_power_counts_frozen(E_cm, p, n, expected):
    assert naive_count(E_cm.monomials, p**n) == expected
    assert count_points_mod_pn(E_cm, p, n) == expected


def test_prime_power_budget(E_cm):
    with pytest.raises(BudgetExceededError, match="oracle budget"):
        count_points_mod_pn(E_cm, 13, 3, budget=10**6)


def test_lifting_law_small(E_cm, E_plus1):
    for c in (E_cm, E_plus1):
        for p in (5, 7, 11):
            C = count_affine_points(c, p)
            assert count_points_mod_pn(c, p, 2) == p * C


# ------------------------------------------------------------ Frobenius data


def test_frobenius_p5(E_cm):
    fd = frobenius_data(E_cm, 5)
    assert (fd.C_p, fd.a_p) == (7, -2)
    assert fd.lambda_p == Fraction(14, 9)
    assert fd.pi_p == complex(-1, 2)
    assert fd.N_p == 8


def test_frobenius_p7(E_cm):
    fd = frobenius_data(E_cm, 7)
    assert fd.a_p == 0
    assert fd.pi_p.real == 0
    assert fd.pi_p.imag == pytest.approx(math.sqrt(7), rel=1e-15)


def test_frobenius_bad_prime(E_cm):
    with pytest.raises(BadPrimeError):
        frobenius_data(E_cm, 2)
    with pytest.raises(ValueError):
        frobenius_data(E_cm, 9)


def test_hasse_violation_detected():
    with pytest.raises(BadPrimeError):
        FrobeniusData.from_count(5, 0)  # a = 5 > 2 sqrt 5


def test_degenerate_count_at_two(E_11a3):
    fd = next(iter(frobenius_table(E_11a3, 10)))
    assert fd.p == 2 and fd.C_p == 4
    assert fd.degenerate and fd.lambda_p is None


@given(st.sampled_from([int(p) for p in primes_up_to(3000) if p > 2]))
def test_frobenius_invariants(p):
    c = CurveSpec.short_weierstrass(-1, 0, cm=True)
    fd = frobenius_data(c, p)
    assert abs(fd.a_p) <= 2 * math.sqrt(p)
    s = fd.pi_p + fd.pi_bar
    prod = fd.pi_p * fd.pi_bar
    assert abs(s.real - fd.a_p) <= 1e-12 * max(1, abs(fd.a_p)) and abs(s.imag) == 0
    assert abs(prod.real - p) <= 1e-12 * p and abs(prod.imag) <= 1e-12 * p
    assert fd.pi_p.imag >= 0
    assert abs(fd.b_p) <= 2
    if p >= 5:
        assert 0 < fd.C_p < 2 * p
    assert fd.lambda_p == Fraction((p - 1) * fd.C_p, p * p - fd.C_p)


@given(st.integers(-30, 30), st.integers(-30, 30))
def test_weierstrass_sweep_vs_brute_random_curves(A, B):
    if 4 * A**3 + 27 * B**2 == 0:
        return
    c = CurveSpec.short_weierstrass(A, B)
    bad = bad_primes(c)
    for p in (3, 5, 7, 11, 13, 31):
        if p not in bad:
            assert count_affine_points(c, p) == count_affine_points_brute(c, p)


# --------------------------------------------------------------------- table


def test_table_matches_pointwise(E_11a3):
    t = frobenius_table(E_11a3, 400)
    assert 11 not in set(t.p.tolist())
    for fd in t:
        assert fd.C_p == count_affine_points_brute(E_11a3, fd.p)


def test_table_nondegenerate_moves_primes(E_11a3):
    t = frobenius_table(E_11a3, 100).nondegenerate()
    assert 2 in t.bad and 2 not in set(t.p.tolist())
    assert not np.any(t.degenerate)


def test_table_is_read_only(E_cm):
    t = frobenius_table(E_cm, 50)
    with pytest.raises(ValueError):
        t.p[0] = 3


def test_csv_rows(E_cm, tmp_path):
    import io

    buf = io.StringIO()
    t = frobenius_table(E_cm, 13)
    write_frobenius_csv(list(t), buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "p,C_p,a_p,lambda_p_num,lambda_p_den,re_pi,im_pi,b_p"
    assert lines[2].startswith("5,7,-2,14,9,-1,2,")


def test_prime_helpers():
    assert primes_up_to(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert is_prime(2**61 - 1) and not is_prime(2**61 + 1)
    assert [n for n in range(50) if is_prime(n)] == primes_up_to(50).tolist()
