"""The Igusa integral of f over Z_p^2 at a good prime.

Two independent routes: the closed form in C_p and lambda_p, and a level
sum over E_k = {f = 0 mod p^k} whose measures come from brute-force counts
mod p^k.
"""

import cmath
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .curve_arith import DEFAULT_ORACLE_BUDGET, count_points_mod_pn
from .errors import BadPrimeError, PoleError


def _is_exact(s):
    return isinstance(s, Rational) and Fraction(s).denominator == 1


def _ppow(p, e):
    """p**e, exact when e is an integer."""
    if _is_exact(e):
        return Fraction(p) ** int(e)
    return cmath.exp(complex(e) * cmath.log(p))


def local_closed_form(fd, s):
    """(1 - C_p/p^2)(1 + lambda_p x/(1 - x)), x = p^-(s+1).

    Integer ``s`` gives an exact Fraction; anything else a complex number.
    """
    p = fd.p
    x = _ppow(p, -(s + 1)) if _is_exact(s) else _ppow(p, -(complex(s) + 1))
    if (x == 1) if _is_exact(s) else abs(x - 1) < 1e-14:
        raise PoleError(f"pole of the local factor at p = {p}, s = {s}", p=p)
    # (1 - C_p/p^2) lambda_p = (p - 1) C_p / p^2, which stays finite when C_p = p^2
    head = 1 - Fraction(fd.C_p, p * p)
    slope = Fraction((p - 1) * fd.C_p, p * p)
    if _is_exact(s):
        return head + slope * x / (1 - x)
    return complex(float(head) + float(slope) * x / (1 - x))


def normalized_local_factor(fd, s):
    """The local factor scaled to constant term 1: 1 + lambda_p x/(1 - x)."""
    if fd.degenerate:
        raise BadPrimeError(f"C_p = p^2 at p = {fd.p}: the normalized factor is undefined")
    return local_closed_form(fd, s) / (1 - Fraction(fd.C_p, fd.p**2))


@dataclass(frozen=True)
class LevelTruncation:
    """Partial level sum of the integral with its remainder bound.

    ``measures[k]`` is mu(E_k) = C_{p^k} p^(-2k) for k = 0..n_levels+1 (exact).
    """

    p: int
    n_levels: int
    measures: tuple
    partial_sum: object
    tail_bound: object

    def covers(self, value):
        """True when |value - partial_sum| <= tail_bound (exact for Fractions)."""
        diff = value - self.partial_sum
        if isinstance(diff, Fraction) and isinstance(self.tail_bound, Fraction):
            return abs(diff) <= self.tail_bound
        return abs(complex(diff)) <= float(self.tail_bound) * (1 + 1e-12) + 1e-15


def local_oracle(curve, p, n_levels, s, budget=DEFAULT_ORACLE_BUDGET):
    """Level-truncated integral sum_{k=0..N} p^(-ks) (mu(E_k) - mu(E_{k+1})).

    The measures need counts mod p^k for k <= N + 1, all by enumeration.
    Because E_k shrinks with k, the remainder over levels above N is at most
    mu(E_{N+1}) |p^-s|^(N+1) / (1 - |p^-s|) when Re(s) > 0, with no appeal to
    Hensel lifting.  For Re(s) <= 0 the bound is infinite.
    """
    if n_levels < 0:
        raise ValueError("n_levels must be >= 0")
    measures = [Fraction(1)]
    for k in range(1, n_levels + 2):
        measures.append(Fraction(count_points_mod_pn(curve, p, k, budget), p ** (2 * k)))
    exact = _is_exact(s)
    total = Fraction(0) if exact else 0j
    for k in range(n_levels + 1):
        w = _ppow(p, -k * s) if exact else _ppow(p, -k * complex(s))
        piece = measures[k] - measures[k + 1]
        total += w * (piece if exact else float(piece))
    if exact and s > 0:
        r = Fraction(1, p) ** int(s)
        tail = measures[-1] * r ** (n_levels + 1) / (1 - r)
    else:
        r = abs(_ppow(p, -complex(s)))
        tail = float("inf") if r >= 1 else float(measures[-1]) * r ** (n_levels + 1) / (1 - r)
    return LevelTruncation(p, n_levels, tuple(measures), total, tail)
