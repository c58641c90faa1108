"""Truncated Euler products built from Frobenius data.

Products run over good primes up to a cutoff in ascending order.  Each
carries a tail estimate: a bound on |log| of the omitted tail obtained from
an explicit majorant of the local terms, summed over primes in
(cutoff, 10 cutoff] and extended by an integral beyond.  These estimates are
diagnostics, not proofs.
"""

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import sym_ring
from .curve_arith import frobenius_table
from .errors import PoleError
from .primes import primes_up_to

LOG_3_PLUS_SQRT8 = math.log(3 + math.sqrt(8))


# ------------------------------------------------------------------ zeta(s)


def _borwein_coefficients(n):
    # d_k = n * sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!), exact integers
    d, term, acc = [], Fraction(1, n), Fraction(0)
    for i in range(n + 1):
        if i > 0:
            term *= Fraction(4 * (n + i - 1) * (n - i + 1), (2 * i) * (2 * i - 1))
        acc += term
        d.append(acc * n)
    assert all(x.denominator == 1 for x in d)
    return [int(x) for x in d]


def _borwein_terms(s, tol):
    t = abs(complex(s).imag)
    from scipy.special import loggamma

    inv_gamma = -float(loggamma(complex(s)).real)
    n = math.ceil((math.log(3 / tol) + max(inv_gamma, 0.0) + math.log1p(2 * t)) / LOG_3_PLUS_SQRT8)
    return max(n, 8) + 4


def riemann_zeta(s, tol=1e-15, dps=None):
    """zeta(s) for Re(s) > 0 by the accelerated alternating series.

    zeta(s) = eta(s) / (1 - 2^(1-s)) with eta summed using Borwein's
    weights d_k; the number of terms is chosen from the error bound
    3 (3 + sqrt 8)^(-n) (1 + 2|t|) / |Gamma(s)|.  ``dps`` > 15 switches to
    mpmath arithmetic at that many digits.
    """
    s = complex(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    if s.real <= 0:
        raise ValueError("riemann_zeta needs Re(s) > 0")
    if dps is not None and dps > 15:
        import mpmath

        with mpmath.workdps(dps + 10):
            ms = mpmath.mpc(s.real, s.imag)
            n = _borwein_terms(s, mpmath.mpf(10) ** (-dps))
            d = _borwein_coefficients(n)
            acc = mpmath.mpc(0)
            for k in range(n):
                acc += (-1) ** k * (d[k] - d[n]) / mpmath.power(k + 1, ms)
            denom = 1 - mpmath.power(2, 1 - ms)
            if abs(denom) < mpmath.mpf(10) ** (-dps):
                raise ValueError(f"1 - 2^(1-s) vanishes at s = {s}; the alternating form is undefined")
            return -acc / (d[n] * denom)
    n = _borwein_terms(s, tol)
    d = np.array([float(x) for x in _borwein_coefficients(n)])
    k = np.arange(n)
    signs = np.where(k % 2 == 0, 1.0, -1.0)
    terms = signs * (d[:n] - d[n]) * np.exp(-s * np.log(k + 1.0))
    denom = 1 - cmath.exp((1 - s) * math.log(2))
    if abs(denom) < 1e-10:
        raise ValueError(f"1 - 2^(1-s) vanishes at s = {s}; the alternating form is undefined")
    return complex(-terms.sum() / (d[n] * denom))


# ------------------------------------------------------------ partial products


@dataclass(frozen=True)
class PartialProduct:
    value: complex
    log_value: complex
    prime_cutoff: int
    n_factors: int
    omitted_primes: frozenset
    tail_estimate: float
    certified: bool
    factors: np.ndarray = field(default=None, repr=False, compare=False)
    primes: np.ndarray = field(default=None, repr=False, compare=False)

    def cauchy_bound(self):
        """Bound on |full product - value| implied by the tail estimate."""
        return abs(self.value) * math.expm1(self.tail_estimate)


def _tail_log_bound(cutoff, majorant, leading):
    """Bound on sum_{p > cutoff} |log(1 + z_p)| given |z_p| <= majorant(p).

    ``leading = (c, alpha)`` states majorant(t) <= c t^-alpha for t > 10 cutoff,
    which with prime density 1/log t gives the integral part.
    """
    lo = max(cutoff, 1)
    ps = primes_up_to(10 * lo)
    ps = ps[ps > cutoff].astype(float)
    g = majorant(ps) if ps.size else np.zeros(0)
    if np.any(g >= 1):
        return float("inf")
    near = float(np.sum(g / (1 - g)))
    c, alpha = leading
    if alpha <= 1:
        return float("inf")
    T = 10.0 * lo
    g_far = c * T**-alpha
    if g_far >= 1:
        return float("inf")
    far = c * T ** (1 - alpha) / ((alpha - 1) * math.log(T))
    return near + far / (1 - g_far)


def _reduce(factors, primes, cutoff, bad, tail, certified):
    factors = np.asarray(factors, dtype=complex)
    value = complex(1.0)
    for f in factors:  # fixed ascending-p order
        value *= complex(f)
    log_value = complex(np.sum(np.log(factors))) if factors.size else 0j
    return PartialProduct(value, log_value, int(cutoff), int(factors.size), frozenset(bad),
                          float(tail), bool(certified), factors, primes)


def _cpow(p, e):
    return np.exp(e * np.log(np.asarray(p, dtype=float)))


def _lambda_max(p):
    """Largest lambda_p allowed by the Hasse bound (C_p <= p + 2 sqrt p)."""
    cmax = p + 2 * np.sqrt(p)
    return (p - 1) * cmax / (p * p - cmax)


def normalized_igusa_factors(table, s):
    s = complex(s)
    x = _cpow(table.p, -(s + 1))
    close = np.abs(1 - x) < 1e-14
    if np.any(close):
        p = int(table.p[np.argmax(close)])
        raise PoleError(f"pole of the local Igusa factor at p = {p}, s = {s}", p=p)
    return 1 + table.lam * x / (1 - x)


def igusa_global(curve, s, cutoff, table=None):
    """Truncated product of normalized local Igusa factors over good p <= cutoff.

    Primes with C_p = p^2 have no normalized factor and are reported in
    ``omitted_primes`` together with the bad primes.
    """
    s = complex(s)
    table = (table if table is not None else frobenius_table(curve, max(cutoff, 2))).upto(cutoff).nondegenerate()
    factors = normalized_igusa_factors(table, s)
    sigma = s.real

    def majorant(ps):
        x = ps ** -(sigma + 1)
        return _lambda_max(ps) * x / (1 - x)

    tail = _tail_log_bound(cutoff, majorant, (1.2, sigma + 1))
    return _reduce(factors, table.p, cutoff, table.bad, tail, sigma > 0)


def first_continuation_factors(table, s):
    s = complex(s)
    p = table.p.astype(float)
    return 1 - table.a * _cpow(p, -s) / (p * p - table.C)


def first_continuation_identity(fd, s):
    """Both sides of -x + lambda_p x = -a_p p^-s / (p^2 - C_p), x = p^-(s+1).

    Exact Fractions for integer ``s``.
    """
    p = fd.p
    if isinstance(s, int):
        x = Fraction(p) ** (-(s + 1))
        return -x + fd.lambda_p * x, Fraction(-fd.a_p, p * p - fd.C_p) * Fraction(p) ** (-s)
    x = cmath.exp(-(complex(s) + 1) * math.log(p))
    lhs = -x + float(fd.lambda_p) * x
    return lhs, -fd.a_p * cmath.exp(-complex(s) * math.log(p)) / (p * p - fd.C_p)


def first_continuation(curve, s, cutoff, table=None, dps=None):
    """zeta(s+1) * prod_{good p <= cutoff} (1 - a_p p^-s / (p^2 - C_p)).

    The zeta Euler factors at bad primes are divided back out so the
    result tends to the same limit as :func:`igusa_global`; primes with
    C_p = p^2 are treated the same way.
    """
    s = complex(s)
    if s == 0:
        raise PoleError("zeta(s+1) has a pole at s = 0")
    table = (table if table is not None else frobenius_table(curve, max(cutoff, 2))).upto(cutoff).nondegenerate()
    value = riemann_zeta(s + 1, dps=dps)
    for q in sorted(table.bad):
        value *= 1 - cmath.exp(-(s + 1) * math.log(q))
    for f in first_continuation_factors(table, s):
        value *= complex(f)
    return complex(value)


# --------------------------------------------------------------- local factors


def frobenius_power_sum(fd, r):
    """pi_p^r + conj(pi_p)^r as an exact integer (t_r = a t_{r-1} - p t_{r-2})."""
    t0, t1 = 2, fd.a_p
    if r == 0:
        return t0
    for _ in range(r - 1):
        t0, t1 = t1, fd.a_p * t1 - fd.p * t0
    return t1


def _pw(p, e):
    return cmath.exp(complex(e) * math.log(p))


def hasse_weil_numerator(fd, s):
    return 1 - fd.a_p * _pw(fd.p, -s) + _pw(fd.p, 1 - 2 * complex(s))


def hasse_weil_euler_factor(fd, s):
    """(1 - a_p p^-s + p^(1-2s))^-1."""
    num = hasse_weil_numerator(fd, s)
    if abs(num) < 1e-300:
        raise PoleError(f"Hasse-Weil Euler factor has a pole at p = {fd.p}, s = {s}", p=fd.p)
    return 1 / num


def hasse_weil_local(fd, s):
    """zeta(E, p, s) = (1 - a_p p^-s + p^(1-2s)) / ((1 - p^-s)(1 - p^(1-s)))."""
    den = (1 - _pw(fd.p, -s)) * (1 - _pw(fd.p, 1 - complex(s)))
    if abs(den) < 1e-14:
        raise PoleError(f"zeta(E, p, s) has a pole at p = {fd.p}, s = {s}", p=fd.p)
    return hasse_weil_numerator(fd, s) / den


def hasse_weil_exp_sum(fd, s, terms=200):
    """exp(sum_m N_{p^m} p^(-ms) / m) with N_{p^m} = p^m + 1 - (pi^m + conj(pi)^m).

    Converges for Re(s) > 1.
    """
    acc = 0j
    for m in range(1, terms + 1):
        n_pm = fd.p**m + 1 - frobenius_power_sum(fd, m)
        acc += n_pm * _pw(fd.p, -m * complex(s)) / m
    return cmath.exp(acc)


@dataclass(frozen=True)
class SatakeParams:
    p: int
    alpha_p: complex
    beta_p: complex


def satake(fd):
    """alpha_p = pi_p / sqrt(p), beta_p = conj(pi_p) / sqrt(p)."""
    r = math.sqrt(fd.p)
    return SatakeParams(fd.p, fd.pi_p / r, fd.pi_bar / r)


def sym_power_reciprocal(sp, m, s):
    """prod_{i=0..m} (1 - alpha^i beta^(m-i) p^-s), a polynomial in p^-s."""
    y = _pw(sp.p, -s)
    out = 1 + 0j
    for i in range(m + 1):
        out *= 1 - sp.alpha_p**i * sp.beta_p ** (m - i) * y
    return out


def sym_power_local(sp, m, s):
    """The local factor of the m-th symmetric power L-function."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rec = sym_power_reciprocal(sp, m, s)
    if abs(rec) < 1e-300:
        raise PoleError(f"symmetric power factor has a pole at p = {sp.p}, s = {s}", p=sp.p)
    return 1 / rec


def sym_power_reciprocal_coefficients(sp, m):
    """Coefficients of the reciprocal factor as a polynomial in Y = p^-s."""
    coeffs = np.array([1.0 + 0j])
    for i in range(m + 1):
        root = sp.alpha_p**i * sp.beta_p ** (m - i)
        coeffs = np.convolve(coeffs, np.array([1.0, -root]))
    return coeffs


def z_r_local(fd, r, s, eps=1):
    """1 - eps (pi^r + conj(pi)^r) p^-s + p^(r-2s)."""
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    return 1 - eps * frobenius_power_sum(fd, r) * _pw(fd.p, -s) + _pw(fd.p, r - 2 * complex(s))


def sym_power_reciprocal_via_z(fd, m, s):
    """The S-polynomial recursions specialized at the Satake point.

    m = 2n:     (1 - p^-s) prod_{i=1..n} Z_{2i,p}(s + i)
    m = 2n - 1: prod_{i=1..n} Z_{2i-1,p}(s + (2i-1)/2)
    """
    s = complex(s)
    if m % 2 == 0:
        out = 1 - _pw(fd.p, -s)
        for i in range(1, m // 2 + 1):
            out *= z_r_local(fd, 2 * i, s + i)
        return out
    out = 1 + 0j
    for i in range(1, (m + 1) // 2 + 1):
        out *= z_r_local(fd, 2 * i - 1, s + (2 * i - 1) / 2)
    return out


def _power_sums(table, r):
    t0 = np.full(len(table), 2, dtype=object)
    t1 = table.a.astype(object)
    if r == 0:
        return t0.astype(float)
    p = table.p.astype(object)
    for _ in range(r - 1):
        t0, t1 = t1, table.a.astype(object) * t1 - p * t0
    return t1.astype(float)


def z_r_partial(curve, r, s, cutoff, eps=1, table=None):
    """Truncated product of Z^[eps]_{r,p}(s) over good p <= cutoff.

    Absolutely convergent for Re(s) > r/2 + 1 by |pi^r + conj(pi)^r| <= 2 p^(r/2).
    """
    s = complex(s)
    table = (table if table is not None else frobenius_table(curve, max(cutoff, 2))).upto(cutoff)
    p = table.p.astype(float)
    factors = 1 - eps * _power_sums(table, r) * _cpow(p, -s) + _cpow(p, r - 2 * s)
    sigma = s.real

    def majorant(ps):
        return 2 * ps ** (r / 2 - sigma) + ps ** (r - 2 * sigma)

    alpha = min(sigma - r / 2, 2 * sigma - r)
    tail = _tail_log_bound(cutoff, majorant, (3.0, alpha))
    return _reduce(factors, table.p, cutoff, table.bad, tail, sigma > r / 2 + 1)


def hasse_weil_partial(curve, s, cutoff, table=None):
    """Truncated product of the Euler factors (1 - a_p p^-s + p^(1-2s))^-1."""
    z = z_r_partial(curve, 1, s, cutoff, 1, table)
    factors = 1 / z.factors
    return _reduce(factors, z.primes, cutoff, z.omitted_primes, z.tail_estimate, z.certified)


# ----------------------------------------------------- continuation identities


@dataclass(frozen=True)
class ContinuationCheck:
    p: int
    M: int
    s: complex
    residual: float
    factor_residual: float


def _factor_value_via_z(fd, f, s):
    """P^[eps]_(r,n,m) at (pi, conj pi, p, p^-s): Z^[eps]_{r,p}(ms - n), or a zeta factor for r = 0."""
    t = f.m * complex(s) - f.n
    if f.r == 0:
        return 1 - f.eps * _pw(fd.p, -t)
    return z_r_local(fd, f.r, t, f.eps)


def continuation_identity_check(fd, M, s, expansion=None):
    """Residuals of 1 - a_p p^-s = Q_M + W_M and of each factor against Z_{r,p}(ms - n).

    ``fd`` is the FrobeniusData at the prime; both residuals are absolute.
    """
    s = complex(s)
    exp = expansion or sym_ring.cyclotomic_expand(M)
    point = (fd.pi_p, fd.pi_bar, complex(fd.p), _pw(fd.p, -s))
    lhs = 1 - fd.a_p * point[3]
    q = sym_ring.evaluate(exp.Q, *point)
    w = sym_ring.evaluate(exp.W, *point)
    fres = 0.0
    prod = 1 + 0j
    for f in exp.factors:
        direct = sym_ring.evaluate(f.poly(), *point)
        fres = max(fres, abs(direct - _factor_value_via_z(fd, f, s)))
        prod *= direct**f.c
    fres = max(fres, abs(prod - q))
    return ContinuationCheck(fd.p, M, s, abs(lhs - (q + w)), fres)


def continuation_residuals(table, M, s, expansion=None):
    """Vectorized residual |(1 - a_p p^-s) - (Q_M + W_M)| at every prime of ``table``."""
    s = complex(s)
    exp = expansion or sym_ring.cyclotomic_expand(M)
    p = table.p.astype(float)
    pi = table.pi
    y = _cpow(p, -s)
    lhs = 1 - table.a * y
    q = sym_ring.evaluate_array(exp.Q, pi, pi.conj(), p, y)
    w = sym_ring.evaluate_array(exp.W, pi, pi.conj(), p, y)
    return np.abs(lhs - (q + w))


def _level_weights(sym):
    """sum over terms at each level m of |a| * (2 if r > 0 else 1)."""
    acc = {}
    for (r, n, m), a in sym.coeffs.items():
        acc[m] = acc.get(m, 0) + abs(a) * (2 if r else 1)
    return acc


def _majorant_from_levels(levels, sigma):
    # every (r, n, m) on the lattice has |beta_r X^n Y^m| <= 2 p^(m/2 - m sigma)
    def g(ps):
        ps = np.asarray(ps, dtype=float)
        out = np.zeros_like(ps)
        for m, c in levels.items():
            out += c * ps ** (m * (0.5 - sigma))
        return out

    return g


@dataclass(frozen=True)
class WQProbe:
    M: int
    s: complex
    z1: PartialProduct
    z2: PartialProduct
    primes: np.ndarray
    w_terms: np.ndarray
    wq_terms: np.ndarray
    majorant: np.ndarray
    decay_exponent_w: float
    decay_exponent_wq: float
    excluded_primes: tuple
    certified: bool


def fit_decay_exponent(primes, terms):
    """Least-squares slope of log|term| against log p over nonzero terms."""
    mags = np.abs(np.asarray(terms))
    keep = mags > 0
    if keep.sum() < 2:
        return float("nan")
    slope, _ = np.polyfit(np.log(np.asarray(primes, dtype=float)[keep]), np.log(mags[keep]), 1)
    return float(slope)


def w_over_q_convergence_probe(curve, M, s, cutoff, table=None, q_floor=1e-12):
    """Per-prime sizes of W_M and W_M/Q_M at (pi_p, conj pi_p, p, p^-s) and their products.

    Primes where |Q_M| < ``q_floor`` (zeros of Q_M, i.e. poles introduced by
    the continuation) are excluded from the second product and reported.
    """
    s = complex(s)
    sigma = s.real
    exp = sym_ring.cyclotomic_expand(M)
    table = (table if table is not None else frobenius_table(curve, max(cutoff, 2))).upto(cutoff)
    p = table.p.astype(float)
    pi = table.pi
    y = _cpow(p, -s)
    w = sym_ring.evaluate_array(exp.W, pi, pi.conj(), p, y)
    q = sym_ring.evaluate_array(exp.Q, pi, pi.conj(), p, y)
    bad_q = np.abs(q) < q_floor
    wq = np.where(bad_q, 0, w / np.where(bad_q, 1, q))
    w_levels = _level_weights(exp.W)
    q_levels = _level_weights(sym_ring.symmetric_decompose(exp.Q - sym_ring.ONE))
    g_w = _majorant_from_levels(w_levels, sigma)
    g_q = _majorant_from_levels(q_levels, sigma)

    def g_wq(ps):
        h = g_q(ps)
        return np.where(h < 1, g_w(ps) / np.maximum(1 - h, 1e-300), np.inf)

    lead = M * (sigma - 0.5)
    c_lead = 2.0 * sum(w_levels.values())
    tail1 = _tail_log_bound(cutoff, g_w, (c_lead, lead))
    tail2 = _tail_log_bound(cutoff, g_wq, (2 * c_lead, lead))
    z1 = _reduce(1 + w, table.p, cutoff, table.bad, tail1, sigma > 0.5 + 1 / M)
    z2 = _reduce(1 + wq[~bad_q], table.p[~bad_q], cutoff, table.bad, tail2, sigma > 0.5 + 1 / M)
    return WQProbe(
        M, s, z1, z2, table.p, w, wq, g_w(p),
        fit_decay_exponent(p, w), fit_decay_exponent(p[~bad_q], wq[~bad_q]),
        tuple(int(t) for t in table.p[bad_q]), sigma > 0.5 + 1 / M,
    )

