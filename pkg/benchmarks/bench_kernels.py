"""Benchmark the two kernel implementations: numba njit vs vectorized numpy.

Runs both code paths in one process by calling the implementation functions
directly, so no environment flag juggling is needed.  Typical output shows
the annulus grid (the brute-force oracle's inner loop) gaining roughly an
order of magnitude under numba, which is what makes the oracle-equivalence
check affordable in the test suite.

Usage: python benchmarks/bench_kernels.py [--step 0.1] [--repeats 3]
"""

import argparse
import math
import time

import numpy as np

from dualsniff._kernels import (USING_NUMBA, _annulus_grid_numba,
                                _annulus_grid_numpy, _ellipse_scan_numba,
                                _ellipse_scan_numpy)


def time_call(func, *args, repeats=3):
    best = math.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = func(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_ellipse(repeats):
    # one located subframe does one 720-sample scan; batch 10,000 of them
    cx, cy, a, b = 54.85, 0.0, 58.54, 20.44
    cos_r, sin_r = 1.0, 0.0
    args = (cx, cy, a, b, cos_r, sin_r, 0.0, 0.0, 0.0, 139.5, 215.0, 720)

    def run(impl):
        total = 0.0
        for _ in range(10_000):
            total += impl(*args)[0]
        return total

    if USING_NUMBA:
        _ellipse_scan_numba(*args)  # compile outside the timed region
        t_nb, r_nb = time_call(run, _ellipse_scan_numba, repeats=repeats)
    t_np, r_np = time_call(run, _ellipse_scan_numpy, repeats=repeats)

    print("ellipse_scan, 10,000 scans x 720 samples")
    print(f"  numpy : {t_np * 1e3:8.1f} ms   (checksum {r_np:.6f})")
    if USING_NUMBA:
        print(f"  numba : {t_nb * 1e3:8.1f} ms   (checksum {r_nb:.6f})")
        print(f"  speedup: {t_np / t_nb:.1f}x")


def bench_annulus(step, repeats):
    # one oracle solve over the TA=1 annulus
    rng = np.random.default_rng(7)
    others_x = np.ascontiguousarray([0.0, 154.0])
    others_y = np.ascontiguousarray([139.5, 40.0])
    dd = np.ascontiguousarray(rng.normal(0.0, 20.0, size=2))
    args = (0.0, 0.0, 78.12, 156.24, step, 109.7, 0.0, others_x, others_y, dd)

    if USING_NUMBA:
        _annulus_grid_numba(0.0, 0.0, 78.12, 156.24, 20.0, 109.7, 0.0,
                            others_x, others_y, dd)  # compile
        t_nb, r_nb = time_call(_annulus_grid_numba, *args, repeats=repeats)
    t_np, r_np = time_call(_annulus_grid_numpy, *args, repeats=repeats)

    n_axis = int(2 * 156.24 / step) + 1
    print(f"annulus_grid_min, {n_axis}x{n_axis} grid at {step} m")
    print(f"  numpy : {t_np * 1e3:8.1f} ms   (min {r_np[0]:.6f} at {r_np[1]:.2f}, {r_np[2]:.2f})")
    if USING_NUMBA:
        print(f"  numba : {t_nb * 1e3:8.1f} ms   (min {r_nb[0]:.6f} at {r_nb[1]:.2f}, {r_nb[2]:.2f})")
        print(f"  speedup: {t_np / t_nb:.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--step", type=float, default=0.1,
                        help="annulus grid resolution in meters")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    print(f"numba active: {USING_NUMBA}")
    bench_ellipse(args.repeats)
    bench_annulus(args.step, args.repeats)
    if not USING_NUMBA:
        print("note: numba unavailable or disabled (DUALSNIFF_NO_NUMBA=1); "
              "only the numpy path was timed")


if __name__ == "__main__":
    main()
