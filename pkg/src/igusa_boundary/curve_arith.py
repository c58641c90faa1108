"""Reductions of a plane elliptic curve modulo primes and prime powers.

All counts are affine: the point at infinity is never included, so
``C_p = #{(x, y) in F_p^2 : f(x, y) = 0}`` and the trace is ``a_p = p - C_p``.
"""

import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np

from . import kernels
from .errors import (
    BadPrimeError,
    BudgetExceededError,
    CurveFormatError,
    SingularCurveError,
)
from .primes import is_prime, prime_divisors, primes_up_to

DEFAULT_SEARCH_BOUND = 1000
DEFAULT_ORACLE_BUDGET = 10**9  # pairs (x, y) enumerated mod p^n

FROBENIUS_CSV_COLUMNS = (
    "p", "C_p", "a_p", "lambda_p_num", "lambda_p_den", "re_pi", "im_pi", "b_p",
)


def _normalize_monomials(monos):
    acc = {}
    for item in monos:
        try:
            i, j, c = (int(t) for t in item)
        except (TypeError, ValueError):
            raise CurveFormatError(f"monomial {item!r} is not an integer triple [i, j, c]", "poly")
        if i < 0 or j < 0:
            raise CurveFormatError(f"negative exponent in {item!r}", "poly")
        acc[(i, j)] = acc.get((i, j), 0) + c
    return tuple(sorted((i, j, c) for (i, j), c in acc.items() if c != 0))


def _derivative(monos, var):
    out = []
    for i, j, c in monos:
        if var == "x" and i:
            out.append((i - 1, j, c * i))
        elif var == "y" and j:
            out.append((i, j - 1, c * j))
    return tuple(out)


def _dense(monos):
    if not monos:
        return np.zeros((1, 1), dtype=np.int64)
    dx = max(i for i, _, _ in monos)
    dy = max(j for _, j, _ in monos)
    m = np.zeros((dx + 1, dy + 1), dtype=np.int64)
    for i, j, c in monos:
        if abs(c) >= 2**62:
            raise CurveFormatError(f"coefficient {c} too large for the counting kernels", "poly")
        m[i, j] = c
    return m


def _int64_array(values):
    if any(abs(v) >= 2**62 for v in values):
        raise CurveFormatError("coefficients too large for the counting kernels", "poly")
    return np.array(values, dtype=np.int64)


def _singular_over_q(monos):
    """True when f = f_x = f_y = 0 has a solution over an algebraic closure of Q."""
    import sympy

    x, y = sympy.symbols("x y")
    f = sum(c * x**i * y**j for i, j, c in monos)
    basis = sympy.groebner([f, sympy.diff(f, x), sympy.diff(f, y)], x, y, order="grevlex")
    return list(basis.exprs) != [1]


@dataclass(frozen=True)
class CurveSpec:
    """An integer polynomial f(x, y) whose zero set is an affine elliptic curve.

    Build with :meth:`short_weierstrass`, :meth:`from_poly` or :meth:`from_json`.
    ``monomials`` is the canonical sorted tuple of ``(i, j, c)`` for ``c x^i y^j``.
    ``declared_bad_primes`` are added to whatever the search finds, which is the
    only way to tell a general (non-Weierstrass) curve about bad primes above
    the singular-point search bound.
    """

    monomials: tuple
    weierstrass: tuple = None
    cm: bool = False
    declared_bad_primes: tuple = ()

    def __post_init__(self):
        if not self.monomials:
            raise SingularCurveError("the zero polynomial does not define a curve")
        if self.weierstrass is not None:
            if self.discriminant == 0:
                raise SingularCurveError(
                    f"y^2 = x^3 + {self.weierstrass[0]}x + {self.weierstrass[1]} is singular over Q "
                    "(discriminant 0)"
                )
        elif _singular_over_q(self.monomials):
            raise SingularCurveError("curve is singular over Q (f, f_x, f_y have a common zero)")

    @classmethod
    def short_weierstrass(cls, A, B, cm=False, bad_primes=()):
        A, B = int(A), int(B)
        monos = _normalize_monomials([(0, 2, 1), (3, 0, -1), (1, 0, -A), (0, 0, -B)])
        return cls(monos, (A, B), bool(cm), tuple(sorted(set(bad_primes))))

    @classmethod
    def from_poly(cls, monos, cm=False, bad_primes=()):
        return cls(_normalize_monomials(monos), None, bool(cm), tuple(sorted(set(bad_primes))))

    @classmethod
    def from_json(cls, source):
        """Parse ``{"weierstrass": [A, B], "cm": bool}`` or ``{"poly": [[i, j, c], ...]}``.

        ``source`` is a dict, a JSON string, or a path to a JSON file.
        """
        if isinstance(source, dict):
            obj = source
        else:
            text = str(source)
            if not text.lstrip().startswith("{") and Path(text).is_file():
                text = Path(text).read_text()
            try:
                obj = json.loads(text)
            except json.JSONDecodeError as exc:
                raise CurveFormatError(
                    f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
                ) from None
        if not isinstance(obj, dict):
            raise CurveFormatError("curve must be a JSON object")
        unknown = set(obj) - {"weierstrass", "poly", "cm", "bad_primes"}
        if unknown:
            raise CurveFormatError(f"unknown field(s) {sorted(unknown)}", sorted(unknown)[0])
        cm = obj.get("cm", False)
        if not isinstance(cm, bool):
            raise CurveFormatError("must be true or false", "cm")
        bad = obj.get("bad_primes", [])
        if not isinstance(bad, list) or not all(isinstance(q, int) and is_prime(q) for q in bad):
            raise CurveFormatError("must be a list of primes", "bad_primes")
        if ("weierstrass" in obj) == ("poly" in obj):
            raise CurveFormatError("exactly one of 'weierstrass' or 'poly' is required")
        if "weierstrass" in obj:
            w = obj["weierstrass"]
            if not (isinstance(w, list) and len(w) == 2 and all(isinstance(t, int) for t in w)):
                raise CurveFormatError("must be a pair of integers [A, B]", "weierstrass")
            return cls.short_weierstrass(w[0], w[1], cm=cm, bad_primes=bad)
        if not isinstance(obj["poly"], list):
            raise CurveFormatError("must be a list of [i, j, c] triples", "poly")
        return cls.from_poly(obj["poly"], cm=cm, bad_primes=bad)

    def to_json(self):
        obj = {"weierstrass": list(self.weierstrass)} if self.weierstrass else {
            "poly": [list(m) for m in self.monomials]
        }
        obj["cm"] = self.cm
        if self.declared_bad_primes:
            obj["bad_primes"] = list(self.declared_bad_primes)
        return obj

    @property
    def discriminant(self):
        """-16(4A^3 + 27B^2) for Weierstrass input, None otherwise."""
        if self.weierstrass is None:
            return None
        A, B = self.weierstrass
        return -16 * (4 * A**3 + 27 * B**2)

    @property
    def y_degree(self):
        return max(j for _, j, _ in self.monomials)

    @cached_property
    def coef(self):
        return _dense(self.monomials)

    @cached_property
    def quadratic_sweep(self):
        """(y^2 coefficient, discriminant) as integer coefficient arrays in x, or None.

        Only defined for curves of degree exactly 2 in y.
        """
        if self.y_degree != 2:
            return None
        cols = [[int(c) for c in self.coef[:, j]] for j in range(3)]
        c, b, a = cols
        disc = [0] * (2 * len(b) - 1)
        for i, bi in enumerate(b):
            for k, bk in enumerate(b):
                disc[i + k] += bi * bk
        for i, ai in enumerate(a):
            for k, ck in enumerate(c):
                disc[i + k] -= 4 * ai * ck
        while len(disc) > 1 and disc[-1] == 0:
            disc.pop()
        while len(a) > 1 and a[-1] == 0:
            a.pop()
        return _int64_array(a), _int64_array(disc)

    @cached_property
    def gradient_coefs(self):
        return _dense(_derivative(self.monomials, "x")), _dense(_derivative(self.monomials, "y"))

    def __call__(self, x, y):
        return sum(c * x**i * y**j for i, j, c in self.monomials)

    def describe(self):
        if self.weierstrass:
            A, B = self.weierstrass
            return f"y^2 = x^3 + ({A})x + ({B})"
        terms = " + ".join(f"({c})x^{i}y^{j}" for i, j, c in self.monomials)
        return f"{terms} = 0"


def _require_prime(p):
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")


def singular_point_mod(curve, p):
    """A point of the reduction mod p where f = f_x = f_y = 0, or None."""
    _require_prime(p)
    fx, fy = curve.gradient_coefs
    return kernels.singular_witness(curve.coef, fx, fy, p)


def bad_primes(curve, search_bound=DEFAULT_SEARCH_BOUND):
    """Primes at which the reduction of the curve is singular.

    Exact for Weierstrass input (prime divisors of the discriminant).  For a
    general polynomial only primes up to ``search_bound`` are searched, since
    no effective bound on bad primes is available; ``curve.declared_bad_primes``
    is always included.
    """
    found = set(curve.declared_bad_primes)
    if curve.weierstrass is not None:
        found.update(prime_divisors(curve.discriminant))
    else:
        for p in primes_up_to(search_bound):
            if singular_point_mod(curve, int(p)) is not None:
                found.add(int(p))
    return found


def is_good_prime(curve, p, search_bound=DEFAULT_SEARCH_BOUND):
    if p in curve.declared_bad_primes:
        return False
    if curve.weierstrass is not None:
        return curve.discriminant % p != 0
    if p > search_bound:
        return True
    return singular_point_mod(curve, p) is None


def _sweepable(curve):
    return curve.y_degree <= 2


def count_affine_points_brute(curve, p):
    """O(p^2) double loop over F_p^2."""
    _require_prime(p)
    return kernels.count_brute(curve.coef, p)


def count_affine_points(curve, p):
    """C_p, the number of affine solutions of f = 0 over F_p.

    Curves of degree <= 2 in y (Weierstrass input in particular) are counted
    with an O(p) sweep over x that tests each discriminant for being a square;
    anything else falls back to the double loop.
    """
    _require_prime(p)
    if _sweepable(curve) and p > 2:
        quad = curve.quadratic_sweep
        if quad is not None and kernels._lead_is_unit_constant(quad[0], p):
            return kernels.count_disc(quad[1], p)
        return kernels.count_sweep(curve.coef, p)
    return kernels.count_brute(curve.coef, p)


def count_points_mod_pn(curve, p, n, budget=DEFAULT_ORACLE_BUDGET):
    """Number of solutions of f = 0 in (Z/p^nZ)^2 by exhaustive enumeration.

    This is an oracle: it never uses Hensel lifting.
    """
    _require_prime(p)
    if n < 1:
        raise ValueError("n must be a positive integer")
    q = p**n
    if q * q > budget:
        raise BudgetExceededError(
            f"oracle budget exceeded: {p}^{2 * n} = {q * q} pairs > budget {budget}"
        )
    return kernels.count_brute(curve.coef, q)


@dataclass(frozen=True)
class FrobeniusData:
    p: int
    C_p: int
    a_p: int
    lambda_p: Fraction
    pi_p: complex
    b_p: float

    @classmethod
    def from_count(cls, p, C_p):
        p, C_p = int(p), int(C_p)
        a = p - C_p
        gap = 4 * p - a * a
        if gap <= 0:
            raise BadPrimeError(f"a_{p} = {a} violates the Hasse bound; is {p} a bad prime?")
        pi = complex(a / 2, math.sqrt(gap) / 2)
        lam = Fraction((p - 1) * C_p, p * p - C_p) if C_p != p * p else None
        return cls(p, C_p, a, lam, pi, a / math.sqrt(p))

    @property
    def degenerate(self):
        """C_p = p^2 (possible only at p = 2): lambda_p and the normalized Igusa factor are undefined."""
        return self.lambda_p is None

    @property
    def N_p(self):
        """Projective point count C_p + 1."""
        return self.C_p + 1

    @property
    def pi_bar(self):
        return self.pi_p.conjugate()

    def csv_row(self):
        lam = ("", "") if self.degenerate else (self.lambda_p.numerator, self.lambda_p.denominator)
        return (
            self.p, self.C_p, self.a_p, *lam,
            f"{self.pi_p.real:.17g}", f"{self.pi_p.imag:.17g}", f"{self.b_p:.17g}",
        )


def frobenius_data(curve, p, search_bound=DEFAULT_SEARCH_BOUND):
    _require_prime(p)
    if not is_good_prime(curve, p, search_bound):
        raise BadPrimeError(f"{p} is a bad prime for {curve.describe()}")
    return FrobeniusData.from_count(p, count_affine_points(curve, p))


@dataclass(frozen=True)
class FrobeniusTable:
    """Good primes up to a cutoff with their affine counts, as parallel arrays."""

    p: np.ndarray
    C: np.ndarray
    bad: frozenset

    @property
    def a(self):
        return self.p - self.C

    @property
    def b(self):
        return self.a / np.sqrt(self.p)

    @property
    def lam(self):
        p = self.p.astype(float)
        den = p * p - self.C
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(den != 0, (p - 1) * self.C / np.where(den != 0, den, 1), np.nan)

    @property
    def degenerate(self):
        """Mask of primes with C_p = p^2."""
        return self.C == self.p * self.p

    def nondegenerate(self):
        keep = ~self.degenerate
        return FrobeniusTable(self.p[keep], self.C[keep], self.bad | frozenset(self.p[~keep].tolist()))

    @property
    def pi(self):
        a = self.a.astype(float)
        return 0.5 * (a + 1j * np.sqrt(4.0 * self.p - a * a))

    def __len__(self):
        return int(self.p.size)

    def __iter__(self):
        for p, c in zip(self.p.tolist(), self.C.tolist()):
            yield FrobeniusData.from_count(p, c)

    def upto(self, cutoff):
        k = int(np.searchsorted(self.p, cutoff, side="right"))
        return FrobeniusTable(self.p[:k], self.C[:k], self.bad)


@lru_cache(maxsize=32)
def frobenius_table(curve, cutoff, search_bound=DEFAULT_SEARCH_BOUND):
    """Counts at every good prime p <= cutoff, ascending in p."""
    bad = frozenset(bad_primes(curve, min(search_bound, max(cutoff, 2))))
    primes = primes_up_to(cutoff)
    if bad:
        primes = primes[~np.isin(primes, np.fromiter(bad, dtype=np.int64))]
    quad = curve.quadratic_sweep or (None, None)
    counts = kernels.count_many(curve.coef, primes, _sweepable(curve), *quad)
    a = primes - counts
    if np.any(a.astype(float) ** 2 >= 4.0 * primes):
        worst = int(primes[np.argmax(a.astype(float) ** 2 - 4.0 * primes)])
        raise BadPrimeError(f"Hasse bound fails at p = {worst}; declare it in bad_primes")
    primes.flags.writeable = False
    counts.flags.writeable = False
    return FrobeniusTable(primes, counts, bad)


def write_frobenius_csv(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(FROBENIUS_CSV_COLUMNS)
    for fd in rows:
        w.writerow(fd.csv_row())
