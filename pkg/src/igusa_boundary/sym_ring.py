"""Exact arithmetic in R = Z<u, v, X, Y | uv = X> and the cyclotomic expansion of 1 - uY - vY.

A monomial is stored as ``(r1, r2, n, m)`` meaning ``u^r1 v^r2 X^n Y^m`` with
``min(r1, r2) == 0``; any product is brought back to that form by trading each
``uv`` for an ``X``.  Symmetric elements are also written over the basis
``beta_r X^n Y^m`` with ``beta_r = u^r + v^r`` for ``r >= 1`` and ``beta_0 = 1``.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType

import numpy as np

from .errors import (
    BudgetExceededError,
    ExpansionInvariantError,
    LatticeError,
    NotSymmetricError,
    RelationError,
)

DEFAULT_TERM_BUDGET = 10**6


def _canon(r1, r2, n, m):
    t = min(r1, r2)
    return (r1 - t, r2 - t, n + t, m)


def _fmt_power(name, k):
    if k == 0:
        return ""
    return name if k == 1 else f"{name}^{k}"


def _join_terms(pieces):
    """Join (coefficient, body) pairs as ``a - b + c`` with unit coefficients elided."""
    out = []
    for coeff, body in pieces:
        mag = abs(coeff)
        text = body if (mag == 1 and body) else f"{mag}{body}"
        if not out:
            out.append(text if coeff > 0 else f"-{text}")
        else:
            out.append(("+ " if coeff > 0 else "- ") + text)
    return " ".join(out) if out else "0"


class RingElement:
    """An immutable element of R with exact integer coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        acc = {}
        for key, c in (terms or {}).items():
            if c:
                k = _canon(*key)
                acc[k] = acc.get(k, 0) + int(c)
        self._terms = {k: c for k, c in acc.items() if c}

    @classmethod
    def _trusted(cls, terms):
        obj = cls.__new__(cls)
        obj._terms = terms
        return obj

    @classmethod
    def const(cls, c):
        return cls({(0, 0, 0, 0): c})

    @classmethod
    def monomial(cls, r1=0, r2=0, n=0, m=0, coeff=1):
        return cls({(r1, r2, n, m): coeff})

    @property
    def terms(self):
        return MappingProxyType(self._terms)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    @staticmethod
    def _coerce(other):
        if isinstance(other, RingElement):
            return other
        if isinstance(other, int):
            return RingElement.const(other)
        if isinstance(other, SymElement):
            return other.to_ring()
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._terms)
        for k, c in other._terms.items():
            s = acc.get(k, 0) + c
            if s:
                acc[k] = s
            else:
                acc.pop(k, None)
        return RingElement._trusted(acc)

    __radd__ = __add__

    def __neg__(self):
        return RingElement._trusted({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = {}
        for (a1, a2, an, am), ca in self._terms.items():
            for (b1, b2, bn, bm), cb in other._terms.items():
                r1, r2 = a1 + b1, a2 + b2
                t = r1 if r1 < r2 else r2
                k = (r1 - t, r2 - t, an + bn + t, am + bm)
                acc[k] = acc.get(k, 0) + ca * cb
        return RingElement._trusted({k: c for k, c in acc.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers")
        out, base = RingElement.const(1), self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def swap(self):
        """The image under u <-> v."""
        return RingElement._trusted({(r2, r1, n, m): c for (r1, r2, n, m), c in self._terms.items()})

    def is_symmetric(self):
        return self == self.swap()

    def y_degrees(self):
        return sorted({m for (_, _, _, m) in self._terms})

    def part_at_level(self, m):
        return RingElement._trusted({k: c for k, c in self._terms.items() if k[3] == m})

    def sorted_terms(self):
        return sorted(self._terms.items(), key=lambda kv: (kv[0][3], kv[0][2], -kv[0][0], -kv[0][1]))

    def __str__(self):
        pieces = []
        for (r1, r2, n, m), c in self.sorted_terms():
            body = _fmt_power("u", r1) + _fmt_power("v", r2) + _fmt_power("X", n) + _fmt_power("Y", m)
            pieces.append((c, body))
        return _join_terms(pieces)

    def __repr__(self):
        return f"RingElement({self})"


u = RingElement.monomial(r1=1)
v = RingElement.monomial(r2=1)
X = RingElement.monomial(n=1)
Y = RingElement.monomial(m=1)
ONE = RingElement.const(1)


def beta(r):
    """u^r + v^r for r >= 1, and 1 for r = 0."""
    if r == 0:
        return ONE
    return RingElement({(r, 0, 0, 0): 1, (0, r, 0, 0): 1})


class SymElement:
    """Coefficients a_(r,n,m) of a symmetric element over the basis beta_r X^n Y^m."""

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs=None):
        self._coeffs = {tuple(int(t) for t in k): int(c) for k, c in (coeffs or {}).items() if c}

    @property
    def coeffs(self):
        return MappingProxyType(self._coeffs)

    def __len__(self):
        return len(self._coeffs)

    def __eq__(self, other):
        if isinstance(other, SymElement):
            return self._coeffs == other._coeffs
        if isinstance(other, (RingElement, int)):
            return self.to_ring() == other
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._coeffs.items()))

    def to_ring(self):
        acc = {}
        for (r, n, m), a in self._coeffs.items():
            if r == 0:
                acc[(0, 0, n, m)] = acc.get((0, 0, n, m), 0) + a
            else:
                acc[(r, 0, n, m)] = a
                acc[(0, r, n, m)] = a
        return RingElement(acc)

    def sorted_items(self):
        return sorted(self._coeffs.items(), key=lambda kv: (kv[0][2], kv[0][0], kv[0][1]))

    def __str__(self):
        pieces = []
        for (r, n, m), a in self.sorted_items():
            b = "" if r == 0 else ("(u+v)" if r == 1 else f"(u^{r}+v^{r})")
            pieces.append((a, b + _fmt_power("X", n) + _fmt_power("Y", m)))
        return _join_terms(pieces)

    def __repr__(self):
        return f"SymElement({self})"


def multiply(a, b):
    return a * b


def symmetric_decompose(e):
    """Read off the unique coefficients of a symmetric ``e`` over beta_r X^n Y^m.

    Raises :class:`NotSymmetricError` naming a monomial whose mirror image
    carries a different coefficient.
    """
    terms = e.terms
    out = {}
    for (r1, r2, n, m), c in terms.items():
        if r1 == 0 and r2 == 0:
            out[(0, n, m)] = c
            continue
        if terms.get((r2, r1, n, m), 0) != c:
            raise NotSymmetricError(str(RingElement.monomial(r1, r2, n, m, c)))
        if r1:
            out[(r1, n, m)] = c
    return SymElement(out)


# ---------------------------------------------------------------------- lattice


def in_lattice(r, n, m):
    return r >= 0 and n >= 0 and m >= 1 and r + 2 * n == m


@dataclass(frozen=True, order=True)
class LatticePoint:
    r: int
    n: int
    m: int

    @property
    def in_lattice(self):
        return in_lattice(self.r, self.n, self.m)

    def in_truncation(self, M):
        return self.in_lattice and self.m < M

    @property
    def weight(self):
        return Fraction(self.r + 2 * self.n + 2, 2 * self.m)


def lattice_points(M):
    """The finite truncation {(r, n, m) in the lattice : m < M}, ordered by (m, r, n)."""
    return [LatticePoint(m - 2 * n, n, m) for m in range(1, M) for n in sorted(range(m // 2 + 1), reverse=True)]


def p_poly(r, n, m, eps, strict=True):
    """1 - eps beta_r X^n Y^m + X^(r+2n) Y^(2m) for r >= 1, and 1 - eps X^n Y^m for r = 0.

    ``strict`` demands (r, n, m) on the lattice r + 2n = m; the recursions for
    the S-polynomials use the same shape at m = 1 off the lattice.
    """
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    if strict and not in_lattice(r, n, m):
        raise LatticeError(f"({r},{n},{m}) is not on the lattice r + 2n = m, m >= 1")
    if min(r, n, m) < 0:
        raise LatticeError(f"negative index in ({r},{n},{m})")
    if r == 0:
        return RingElement({(0, 0, 0, 0): 1, (0, 0, n, m): -eps})
    return RingElement(
        {(0, 0, 0, 0): 1, (r, 0, n, m): -eps, (0, r, n, m): -eps, (0, 0, r + 2 * n, 2 * m): 1}
    )


def s_poly(n):
    """prod_{i=0..n} (1 - u^i v^(n-i) Y), expanded."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = ONE
    for i in range(n + 1):
        out = out * (ONE - RingElement.monomial(i, n - i, 0, 1))
    return out


@dataclass(frozen=True)
class Factor:
    r: int
    n: int
    m: int
    eps: int
    c: int

    @property
    def point(self):
        return LatticePoint(self.r, self.n, self.m)

    def poly(self):
        return p_poly(self.r, self.n, self.m, self.eps)

    def __str__(self):
        s = f"P^{{[{self.eps}]}}_{{({self.r},{self.n},{self.m})}}"
        return s if self.c == 1 else f"({s})^{{{self.c}}}"


@dataclass(frozen=True)
class ExpansionResult:
    """1 - uY - vY = Q + W with Q the product of ``factors`` and W supported on levels >= M."""

    M: int
    factors: tuple
    Q: RingElement
    W: SymElement

    def display(self):
        q = "".join(str(f) for f in self.factors) or "1"
        w = str(self.W)
        sign = "-" if w.startswith("-") else "+"
        return f"1-uY-vY = {q} {sign} {w.lstrip('-')}"

    def to_json(self):
        return {
            "M": self.M,
            "factors": [[f.r, f.n, f.m, f.eps, f.c] for f in self.factors],
            "W": [[r, n, m, str(a)] for (r, n, m), a in self.W.sorted_items()],
        }


TARGET = ONE - u * Y - v * Y


@lru_cache(maxsize=None)
def cyclotomic_expand(M, budget=DEFAULT_TERM_BUDGET):
    """Greedy level-by-level construction of Q_M and W_M.

    At each level m = 1, ..., M-1 every basis term a beta_r X^n Y^m of the
    current remainder W = (1 - uY - vY) - Q is killed by multiplying Q with
    (P^[eps]_(r,n,m))^c, c = |a|, eps = -sign(a).  Since Q has constant term 1
    this only disturbs levels above m.  Terms of one level are taken in
    lexicographic (r, n) order.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    Q = ONE
    factors = []
    for level in range(1, M):
        part = symmetric_decompose((TARGET - Q).part_at_level(level))
        for (r, n, m), a in sorted(part.coeffs.items()):
            if not in_lattice(r, n, m):
                raise ExpansionInvariantError(
                    f"remainder term at ({r},{n},{m}) lies off the lattice r + 2n = m"
                )
            eps = -1 if a > 0 else 1
            f = Factor(r, n, m, eps, abs(a))
            Q = Q * f.poly() ** f.c
            if len(Q) > budget:
                raise BudgetExceededError(
                    f"expansion budget exceeded at M={M}, level {level}: {len(Q)} > {budget} terms"
                )
            factors.append(f)
        if (TARGET - Q).part_at_level(level):
            raise ExpansionInvariantError(f"level {level} not cleared")
    W = symmetric_decompose(TARGET - Q)
    for (r, n, m) in W.coeffs:
        if not in_lattice(r, n, m) or m < M:
            raise ExpansionInvariantError(f"W_{M} has a term at ({r},{n},{m})")
    return ExpansionResult(M, tuple(factors), Q, W)


# ------------------------------------------------------------------- evaluation


def _check_relation(u0, v0, X0, rtol):
    uv = u0 * v0
    scale = max(abs(X0), abs(uv))
    if abs(uv - X0) > rtol * scale and scale > 0:
        raise RelationError(f"u0*v0 = {uv} differs from X0 = {X0}")


def evaluate(e, u0, v0, X0, Y0, rtol=1e-9):
    """Numeric value of a ring or symmetric element at a point with u0 v0 = X0."""
    _check_relation(u0, v0, X0, rtol)
    total = 0j
    if isinstance(e, SymElement):
        for (r, n, m), a in e.coeffs.items():
            b = 1 if r == 0 else u0**r + v0**r
            total += a * b * X0**n * Y0**m
        return complex(total)
    for (r1, r2, n, m), c in e.terms.items():
        total += c * u0**r1 * v0**r2 * X0**n * Y0**m
    return complex(total)


def evaluate_array(e, u0, v0, X0, Y0):
    """Vectorized :func:`evaluate` over numpy arrays (no relation check).

    Each power of each variable is computed once and reused across terms.
    """
    u0, v0, X0, Y0 = (np.asarray(t, dtype=complex) for t in (u0, v0, X0, Y0))
    if isinstance(e, SymElement):
        items = [((r, 0, n, m), a) for (r, n, m), a in e.coeffs.items()]
    else:
        items = list(e.terms.items())
    cache = {}

    def power(base, name, k):
        key = (name, k)
        if key not in cache:
            cache[key] = base**k
        return cache[key]

    total = np.zeros(np.broadcast(u0, v0, X0, Y0).shape, dtype=complex)
    sym = isinstance(e, SymElement)
    for (r1, r2, n, m), c in items:
        if sym:
            b = 1.0 if r1 == 0 else power(u0, "u", r1) + power(v0, "v", r1)
        else:
            b = power(u0, "u", r1) * power(v0, "v", r2)
        total = total + float(c) * b * power(X0, "X", n) * power(Y0, "Y", m)
    return total
