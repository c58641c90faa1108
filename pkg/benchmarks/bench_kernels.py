"""Time the numba and pure-numpy counting kernels on the same inputs.

    python benchmarks/bench_kernels.py [--cutoff 20000] [--brute-p 211] [--repeat 3]

The first numba call of each kernel includes compilation and is reported
separately from the steady-state timing.
"""

import argparse
import time

import numpy as np

from igusa_boundary import kernels
from igusa_boundary.curve_arith import CurveSpec, _sweepable
from igusa_boundary.primes import primes_up_to

CURVES = {
    "y^2=x^3-x": CurveSpec.short_weierstrass(-1, 0, cm=True),
    "y^2+y=x^3-x^2": CurveSpec.from_poly([(0, 2, 1), (0, 1, 1), (3, 0, -1), (2, 0, 1)]),
}


def _best(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def run(cutoff, brute_p, repeat):
    if not kernels.numba_importable():
        print("numba is not importable; only the numpy path can be timed")
    primes = primes_up_to(cutoff)
    primes = primes[primes > 11]
    rows = []
    for name, curve in CURVES.items():
        lead, disc = curve.quadratic_sweep
        jobs = {
            f"count_many  p<={cutoff}": lambda: kernels.count_many(curve.coef, primes, _sweepable(curve), lead, disc),
            f"count_brute p={brute_p}": lambda: kernels.count_brute(np.mod(curve.coef, brute_p), brute_p),
        }
        for label, job in jobs.items():
            saved = kernels.HAVE_NUMBA
            try:
                kernels.HAVE_NUMBA = False
                t_np, ref = _best(job, repeat)
                t_first = t_nb = float("nan")
                same = "n/a"
                if kernels.numba_importable():
                    kernels.HAVE_NUMBA = True
                    t_first, _ = _best(job, 1)
                    t_nb, got = _best(job, repeat)
                    same = "yes" if np.array_equal(np.asarray(ref), np.asarray(got)) else "NO"
            finally:
                kernels.HAVE_NUMBA = saved
            rows.append((name, label, t_np, t_first, t_nb, same))
    print(f"{'curve':<16}{'kernel':<24}{'numpy s':>10}{'nb first':>10}{'numba s':>10}{'speedup':>9}  equal")
    for name, label, t_np, t_first, t_nb, same in rows:
        speed = t_np / t_nb if t_nb == t_nb and t_nb > 0 else float("nan")
        print(f"{name:<16}{label:<24}{t_np:>10.4f}{t_first:>10.4f}{t_nb:>10.4f}{speed:>9.1f}  {same}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cutoff", type=int, default=20000)
    ap.add_argument("--brute-p", type=int, default=211)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    run(args.cutoff, args.brute_p, args.repeat)


if __name__ == "__main__":
    main()
