"""Zeros of the local factors 1 - a_p p^-s / (p^2 - C_p) and their drift to Re(s) = -3/2.

Solving the local equation gives p^s = p^(-3/2) r_p with

    r_p = b_p / (1 - p^-1 + b_p p^(-3/2)),    b_p = a_p / sqrt(p),

so the zeros are s_p + (theta_p + 2 pi n) i / log p with
s_p = -3/2 + log|r_p| / log p and theta_p = 0 or pi by the sign of r_p.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .curve_arith import frobenius_table
from .errors import InsufficientDataError

BOUNDARY = -1.5
CM_LABEL = "CM: semicircle comparison not expected to pass"


@dataclass(frozen=True)
class ZeroRecord:
    p: int
    a_p: int
    C_p: int
    b_p: float
    r_p: float
    s_p: float
    theta_p: float
    residual: float

    @property
    def gap(self):
        return self.s_p - BOUNDARY

    @property
    def in_P_E(self):
        return self.b_p > 1

    def zero(self, n=0):
        return complex(self.s_p, (self.theta_p + 2 * math.pi * n) / math.log(self.p))

    def residual_at(self, n):
        """|local equation| at the n-th lattice zero."""
        return float(abs(local_equation(self.p, self.a_p, self.C_p, self.zero(n))))

    def csv_row(self):
        return (self.p, f"{self.b_p:.17g}", f"{self.r_p:.17g}", f"{self.s_p:.17g}",
                f"{self.theta_p:.17g}", f"{self.gap:.17g}")


ZERO_CSV_COLUMNS = ("p", "b_p", "r_p", "s_p", "theta_p", "gap")


def local_equation(p, a_p, C_p, z):
    """1 - a_p p^-z / (p^2 - C_p)."""
    return 1 - a_p * np.exp(-complex(z) * math.log(p)) / (p * p - C_p)


def local_zero(fd):
    """The zero of the local factor nearest the real axis, or None when a_p = 0.

    Also None when C_p = p^2, where the local factor is undefined.
    """
    if fd.a_p == 0 or fd.degenerate:
        return None
    p = fd.p
    b = fd.b_p
    r = b / (1 - 1 / p + b * p**-1.5)
    s = BOUNDARY + math.log(abs(r)) / math.log(p)
    theta = 0.0 if r > 0 else math.pi
    z = complex(s, theta / math.log(p))
    res = abs(local_equation(p, fd.a_p, fd.C_p, z))
    return ZeroRecord(p, fd.a_p, fd.C_p, b, r, s, theta, float(res))


def zero_table(curve, cutoff, table=None):
    """ZeroRecords for every good p <= cutoff with a_p != 0, ascending in p."""
    table = (table if table is not None else frobenius_table(curve, max(cutoff, 2))).upto(cutoff)
    out = []
    for fd in table:
        rec = local_zero(fd)
        if rec is not None:
            out.append(rec)
    return out


def zer3_chain(rec):
    """The implications b_p > 1 => b_p > (1 - 1/p)/(1 - p^-3/2) => r_p > 1 => s_p > -3/2."""
    p = rec.p
    return (
        rec.b_p > 1,
        rec.b_p > (1 - 1 / p) / (1 - p**-1.5),
        rec.r_p > 1,
        rec.s_p > BOUNDARY,
    )


def boundary_primes(curve, cutoff, table=None):
    """Records of the primes p <= cutoff with b_p > 1 (strict)."""
    return [rec for rec in zero_table(curve, cutoff, table) if rec.in_P_E]


@dataclass(frozen=True)
class AccumulationRow:
    p: int
    n_p: int
    zero: complex
    distance: float
    imag_mismatch: float


def accumulation_report(curve, cutoff, target_imag=0.0, table=None):
    """For each p in P_E, the lattice zero closest to -3/2 + i target_imag."""
    rows = []
    target = complex(BOUNDARY, target_imag)
    for rec in boundary_primes(curve, cutoff, table):
        lp = math.log(rec.p)
        n = round((target_imag * lp - rec.theta_p) / (2 * math.pi))
        z = rec.zero(n)
        rows.append(AccumulationRow(rec.p, int(n), z, abs(z - target), abs(z.imag - target_imag)))
    return rows


@dataclass(frozen=True)
class InterferenceReport:
    """Exact values p^-z = (p^2 - C_p)/a_p at the local zeros, against the real parts
    1/(2m) - 3/2 that a critical-line zero of a building block Z(ms + n), n/m = -3/2,
    could occupy."""

    rows: tuple  # (p, Fraction p^-z, s_p)
    candidates: dict  # m -> 1/(2m) - 3/2
    flags: tuple  # (p, m, |s_p - candidate|)
    max_float_mismatch: float


def interference_check(curve, cutoff, m_max=8, tol=1e-6, table=None):
    rows, flags = [], []
    candidates = {m: 1 / (2 * m) + BOUNDARY for m in range(1, m_max + 1)}
    worst = 0.0
    for rec in boundary_primes(curve, cutoff, table):
        exact = Fraction(rec.p * rec.p - rec.C_p, rec.a_p)
        # p^-z with z = s_p + i theta/log p equals p^-s_p e^{-i theta}
        approx = rec.p**-rec.s_p * math.cos(rec.theta_p)
        worst = max(worst, abs(approx - float(exact)) / abs(float(exact)))
        rows.append((rec.p, exact, rec.s_p))
        for m, c in candidates.items():
            if abs(rec.s_p - c) < tol:
                flags.append((rec.p, m, abs(rec.s_p - c)))
    return InterferenceReport(tuple(rows), candidates, tuple(flags), worst)


# ----------------------------------------------------------------- Sato-Tate


def semicircle_cdf(t):
    """CDF of the density (2/pi) sqrt(1 - t^2) on [-1, 1]."""
    t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
    return 0.5 + (t * np.sqrt(1 - t * t) + np.arcsin(t)) / math.pi


@dataclass(frozen=True)
class SatoTateReport:
    prime_cutoff: int
    samples: np.ndarray
    sup_discrepancy: float
    grid_size: int
    cm: bool
    zero_fraction: float

    @property
    def label(self):
        return CM_LABEL if self.cm else "non-CM"

    def histogram(self, bins):
        """(bin_center, empirical_mass, semicircle_mass) over equal bins of [-1, 1]."""
        edges = np.linspace(-1.0, 1.0, bins + 1)
        counts, _ = np.histogram(self.samples, bins=edges)
        emp = counts / self.samples.size
        semi = np.diff(semicircle_cdf(edges))
        centers = -1.0 + (2.0 * np.arange(bins) + 1.0) / bins
        return list(zip(centers.tolist(), emp.tolist(), semi.tolist()))


def sato_tate_report(curve, cutoff, grid_size=2001, table=None, min_samples=50):
    """Sup distance on a uniform grid between the empirical CDF of t_p = b_p/2 and the semicircle CDF."""
    table = (table if table is not None else frobenius_table(curve, max(cutoff, 2))).upto(cutoff)
    t = np.sort(table.b / 2)
    if t.size < min_samples:
        raise InsufficientDataError(f"insufficient data: {t.size} primes below {cutoff}, need {min_samples}")
    if t.size and (t.min() < -1 or t.max() > 1):
        raise AssertionError("Hasse bound violated by a sample")
    grid = np.linspace(-1.0, 1.0, grid_size)
    emp = np.searchsorted(t, grid, side="right") / t.size
    disc = float(np.max(np.abs(emp - semicircle_cdf(grid))))
    zero_fraction = float(np.mean(table.a == 0))
    return SatoTateReport(int(cutoff), t, disc, int(grid_size), bool(curve.cm), zero_fraction)
