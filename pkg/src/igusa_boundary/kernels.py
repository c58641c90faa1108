"""Point-counting kernels over Z/qZ.

Every kernel has a numba implementation and a pure-numpy implementation with
identical results.  The numba path is used when numba imports and the
environment variable ``IGUSA_NO_NUMBA`` is unset (or ``0``).

Polynomials are passed as dense ``int64`` matrices ``coef[i, j]`` holding the
coefficient of ``x**i * y**j``.  Kernels that take a modulus expect the matrix
already reduced into ``[0, q)``, except the batch sweep which reduces per prime.
Moduli must stay below ``2**31`` so that products of residues fit in int64.
"""

import os

import numpy as np

MAX_MODULUS = 2**31 - 1

_disabled = os.environ.get("IGUSA_NO_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError("numba disabled by IGUSA_NO_NUMBA")
    # the tbb layer available here is too old and only produces a warning
    os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


# HAVE_NUMBA may be switched off at runtime (tests, benchmarks); this records
# whether the compiled kernels exist at all.
NUMBA_COMPILED = HAVE_NUMBA


def use_numba():
    return HAVE_NUMBA


def numba_importable():
    return NUMBA_COMPILED


# --------------------------------------------------------------------------
# pure numpy path
# --------------------------------------------------------------------------


def _columns_np(coef, xs, q):
    """Evaluate every y-coefficient polynomial a_j(x) at the points ``xs``."""
    dx, dy = coef.shape
    cols = np.zeros((dy, xs.size), dtype=np.int64)
    for j in range(dy):
        acc = np.zeros(xs.size, dtype=np.int64)
        for i in range(dx - 1, -1, -1):
            acc = (acc * xs + coef[i, j]) % q
        cols[j] = acc
    return cols


def count_brute_np(coef, q):
    q = int(q)
    ys = np.arange(q, dtype=np.int64)
    cols = _columns_np(coef, ys, q)  # same grid for x
    dy = coef.shape[1]
    total = 0
    for x in range(q):
        acc = np.zeros(q, dtype=np.int64)
        for j in range(dy - 1, -1, -1):
            acc = (acc * ys + cols[j, x]) % q
        total += int(np.count_nonzero(acc == 0))
    return total


def count_sweep_np(coef, p):
    p = int(p)
    xs = np.arange(p, dtype=np.int64)
    cols = _columns_np(coef, xs, p)
    dy = coef.shape[1]
    c0 = cols[0]
    c1 = cols[1] if dy > 1 else np.zeros(p, dtype=np.int64)
    c2 = cols[2] if dy > 2 else np.zeros(p, dtype=np.int64)
    sq = np.bincount((xs * xs) % p, minlength=p)
    disc = (c1 * c1 - 4 * ((c2 * c0) % p)) % p
    per_x = np.where(
        c2 != 0,
        sq[disc],
        np.where(c1 != 0, 1, np.where(c0 == 0, p, 0)),
    )
    return int(per_x.sum())


def count_disc_np(disc, p):
    """Sum over x of #{z : z^2 = D(x)} for an odd prime p; ``disc`` reduced mod p."""
    p = int(p)
    xs = np.arange(p, dtype=np.int64)
    acc = np.zeros(p, dtype=np.int64)
    for c in disc[::-1]:
        acc = (acc * xs + c) % p
    sq = np.bincount((xs * xs) % p, minlength=p)
    return int(sq[acc].sum())


def _lead_is_unit_constant(lead, p):
    return lead[0] % p != 0 and all(c % p == 0 for c in lead[1:])


def count_many_np(coef_raw, primes, sweepable, lead_raw, disc_raw):
    out = np.empty(len(primes), dtype=np.int64)
    for k, p in enumerate(primes):
        p = int(p)
        if sweepable and p > 2 and lead_raw.size and _lead_is_unit_constant(lead_raw, p):
            out[k] = count_disc_np(np.mod(disc_raw, p), p)
        elif sweepable and p > 2:
            out[k] = count_sweep_np(np.mod(coef_raw, p), p)
        else:
            out[k] = count_brute_np(np.mod(coef_raw, p), p)
    return out


def singular_witness_np(f, fx, fy, p):
    p = int(p)
    ys = np.arange(p, dtype=np.int64)
    polys = [(m, _columns_np(m, ys, p)) for m in (f, fx, fy)]
    for x in range(p):
        mask = np.ones(p, dtype=bool)
        for m, cols in polys:
            acc = np.zeros(p, dtype=np.int64)
            for j in range(m.shape[1] - 1, -1, -1):
                acc = (acc * ys + cols[j, x]) % p
            mask &= acc == 0
        hits = np.flatnonzero(mask)
        if hits.size:
            return x, int(hits[0])
    return None


# --------------------------------------------------------------------------
# numba path
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _col_nb(coef, j, x, q):
        acc = 0
        for i in range(coef.shape[0] - 1, -1, -1):
            acc = (acc * x + coef[i, j]) % q
        return acc

    @njit(cache=True)
    def _count_brute_nb(coef, q):
        dy = coef.shape[1]
        a = np.zeros(dy, dtype=np.int64)
        total = 0
        for x in range(q):
            for j in range(dy):
                a[j] = _col_nb(coef, j, x, q)
            for y in range(q):
                acc = 0
                for j in range(dy - 1, -1, -1):
                    acc = (acc * y + a[j]) % q
                if acc == 0:
                    total += 1
        return total

    @njit(cache=True)
    def _count_sweep_nb(coef, p):
        dy = coef.shape[1]
        sq = np.zeros(p, dtype=np.int64)
        for y in range(p):
            sq[(y * y) % p] += 1
        total = 0
        for x in range(p):
            c0 = _col_nb(coef, 0, x, p)
            c1 = _col_nb(coef, 1, x, p) if dy > 1 else 0
            c2 = _col_nb(coef, 2, x, p) if dy > 2 else 0
            if c2 != 0:
                d = (c1 * c1 - 4 * ((c2 * c0) % p)) % p
                total += sq[d]
            elif c1 != 0:
                total += 1
            elif c0 == 0:
                total += p
        return total

    @njit(cache=True)
    def _count_disc_nb(disc, p):
        # forward differences of D(x): the inner loop is additions only
        d = disc.size - 1
        sq = np.zeros(p, dtype=np.int8)
        sq[0] = 1
        s = 0
        for y in range(1, (p - 1) // 2 + 1):
            s += 2 * y - 1  # y^2 = (y-1)^2 + 2y - 1
            if s >= p:
                s %= p
            sq[s] = 2
        diff = np.zeros(d + 1, dtype=np.int64)
        for k in range(d + 1):
            acc = 0
            for i in range(d, -1, -1):
                acc = (acc * k + disc[i]) % p
            diff[k] = acc
        for j in range(1, d + 1):
            for k in range(d, j - 1, -1):
                diff[k] = (diff[k] - diff[k - 1]) % p
        total = 0
        for x in range(p):
            total += sq[diff[0]]
            for j in range(d):
                v = diff[j] + diff[j + 1]
                diff[j] = v - p * (v >= p)  # branchless: the branch mispredicts half the time
        return total

    @njit(cache=True)
    def _lead_is_unit_constant_nb(lead, p):
        if lead[0] % p == 0:
            return False
        for i in range(1, lead.size):
            if lead[i] % p != 0:
                return False
        return True

    @njit(parallel=True, cache=True)
    def _count_many_nb(coef_raw, primes, sweepable, lead_raw, disc_raw):
        out = np.empty(primes.size, dtype=np.int64)
        for k in prange(primes.size):
            p = primes[k]
            if sweepable and p > 2 and lead_raw.size > 0 and _lead_is_unit_constant_nb(lead_raw, p):
                out[k] = _count_disc_nb(disc_raw % p, p)
            elif sweepable and p > 2:
                out[k] = _count_sweep_nb(coef_raw % p, p)
            else:
                out[k] = _count_brute_nb(coef_raw % p, p)
        return out

    @njit(cache=True)
    def _singular_witness_nb(f, fx, fy, p):
        for x in range(p):
            a0 = np.zeros(f.shape[1], dtype=np.int64)
            a1 = np.zeros(fx.shape[1], dtype=np.int64)
            a2 = np.zeros(fy.shape[1], dtype=np.int64)
            for j in range(f.shape[1]):
                a0[j] = _col_nb(f, j, x, p)
            for j in range(fx.shape[1]):
                a1[j] = _col_nb(fx, j, x, p)
            for j in range(fy.shape[1]):
                a2[j] = _col_nb(fy, j, x, p)
            for y in range(p):
                v = 0
                for j in range(a0.size - 1, -1, -1):
                    v = (v * y + a0[j]) % p
                if v != 0:
                    continue
                v = 0
                for j in range(a1.size - 1, -1, -1):
                    v = (v * y + a1[j]) % p
                if v != 0:
                    continue
                v = 0
                for j in range(a2.size - 1, -1, -1):
                    v = (v * y + a2[j]) % p
                if v == 0:
                    return x, y
        return -1, -1


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------


def _check_modulus(q):
    if not 2 <= q <= MAX_MODULUS:
        raise ValueError(f"modulus {q} outside kernel range [2, {MAX_MODULUS}]")


def count_brute(coef, q):
    """Number of (x, y) in (Z/qZ)^2 with f(x, y) = 0 mod q, by full enumeration."""
    _check_modulus(q)
    coef = np.mod(np.asarray(coef, dtype=np.int64), q)
    if HAVE_NUMBA:
        return int(_count_brute_nb(coef, np.int64(q)))
    return count_brute_np(coef, q)


def count_sweep(coef, p):
    """Affine count mod an odd prime for f of degree <= 2 in y, one x at a time."""
    _check_modulus(p)
    if p == 2:
        raise ValueError("the discriminant sweep needs an odd prime")
    coef = np.asarray(coef, dtype=np.int64)
    if coef.shape[1] > 3:
        raise ValueError("the discriminant sweep needs degree <= 2 in y")
    coef = np.mod(coef, p)
    if HAVE_NUMBA:
        return int(_count_sweep_nb(coef, np.int64(p)))
    return count_sweep_np(coef, p)


def count_disc(disc, p):
    """Affine count of a y^2 + b y + c = 0 over F_p when a is a nonzero constant mod p.

    ``disc`` holds the integer coefficients of D(x) = b(x)^2 - 4 a c(x); the
    count is the number of pairs (x, z) with z^2 = D(x).
    """
    _check_modulus(p)
    if p == 2:
        raise ValueError("the discriminant sweep needs an odd prime")
    disc = np.mod(np.asarray(disc, dtype=np.int64), p)
    if HAVE_NUMBA:
        return int(_count_disc_nb(disc, np.int64(p)))
    return count_disc_np(disc, p)


def count_many(coef_raw, primes, sweepable, lead_raw=None, disc_raw=None):
    """Affine counts of f mod each prime, in the order given.

    ``lead_raw``/``disc_raw`` (coefficients in x of the y^2 coefficient and of
    the discriminant) enable the addition-only sweep at primes where the y^2
    coefficient reduces to a nonzero constant.
    """
    primes = np.ascontiguousarray(primes, dtype=np.int64)
    if primes.size == 0:
        return np.zeros(0, dtype=np.int64)
    if primes.min() < 2:
        raise ValueError("moduli must be primes")
    _check_modulus(int(primes.max()))
    coef_raw = np.ascontiguousarray(coef_raw, dtype=np.int64)
    empty = np.zeros(0, dtype=np.int64)
    lead_raw = empty if lead_raw is None else np.ascontiguousarray(lead_raw, dtype=np.int64)
    disc_raw = empty if disc_raw is None else np.ascontiguousarray(disc_raw, dtype=np.int64)
    if HAVE_NUMBA:
        return _count_many_nb(coef_raw, primes, bool(sweepable), lead_raw, disc_raw)
    return count_many_np(coef_raw, primes, bool(sweepable), lead_raw, disc_raw)


def singular_witness(f, fx, fy, p):
    """First (x, y) mod p with f = f_x = f_y = 0, or None."""
    _check_modulus(p)
    f, fx, fy = (np.mod(np.asarray(m, dtype=np.int64), p) for m in (f, fx, fy))
    if HAVE_NUMBA:
        x, y = _singular_witness_nb(f, fx, fy, np.int64(p))
        return None if x < 0 else (int(x), int(y))
    return singular_witness_np(f, fx, fy, p)
