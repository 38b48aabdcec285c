"""Time the slice oracle with the numba kernel against the numpy fallback.

    python3 benchmarks/bench_oracle.py [--repeat 5]

Both paths must agree to rounding; the table reports the best of ``repeat``
wall-clock timings for each case.
"""

import argparse
import math
import time

import numpy as np

from qmreadout.oracle import HAVE_NUMBA, build_sliced_transform, default_slices, project

CASES = [
    ("single", 1_000, None),
    ("single", 10_000, None),
    ("single", 100_000, None),
    ("double", default_slices(300.0), 300.0),
    ("double", default_slices(600.0), 600.0),
]


def best_time(fn, repeat):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba not installed; only the numpy path can run")
    print(f"{'scheme':>7} {'N':>8} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8} {'max diff':>10}")
    for scheme, N, wt in CASES:
        def run(flag):
            return project(build_sliced_transform(scheme, math.sqrt(2.0), N, wt, use_numba=flag)).matrix

        t_np, m_np = best_time(lambda: run(False), args.repeat)
        if HAVE_NUMBA:
            run(True)  # compile outside the timing
            t_nb, m_nb = best_time(lambda: run(True), args.repeat)
            diff = float(np.abs(m_np - m_nb).max())
            print(f"{scheme:>7} {N:>8} {1e3 * t_np:>11.2f} {1e3 * t_nb:>11.2f} {t_np / t_nb:>8.2f} {diff:>10.1e}")
        else:
            print(f"{scheme:>7} {N:>8} {1e3 * t_np:>11.2f} {'-':>11} {'-':>8} {'-':>10}")


if __name__ == "__main__":
    main()
