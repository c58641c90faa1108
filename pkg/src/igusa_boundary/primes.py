"""Prime sieving and primality for 64-bit inputs."""

import math

import numpy as np

# deterministic for n < 3.3e24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def primes_up_to(limit):
    """All primes p <= limit as an int64 array, ascending."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    sieve[4::2] = False
    for q in range(3, math.isqrt(limit) + 1, 2):
        if sieve[q]:
            sieve[q * q :: 2 * q] = False
    return np.flatnonzero(sieve).astype(np.int64)


def is_prime(n):
    """Miller-Rabin with a fixed base set; exact for every 64-bit integer."""
    n = int(n)
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_divisors(n):
    """Distinct prime divisors of a nonzero integer."""
    n = abs(int(n))
    if n == 0:
        raise ValueError("0 has no finite set of prime divisors")
    from sympy import factorint

    return sorted(int(q) for q in factorint(n))
