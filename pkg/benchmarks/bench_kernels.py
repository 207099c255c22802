"""Time the numba and numpy forms of the TLS trace kernels.

    python3 benchmarks/bench_kernels.py [--samples 3421] [--defects 64 256] [--repeat 5]

Both forms consume the same pre-drawn random numbers; the script checks that
their outputs agree before reporting timings.
"""

import argparse
import time

import numpy as np

from transmon_stability import kernels
from transmon_stability._accel import HAVE_NUMBA


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def telegraph_case(m, n, rng):
    ra, rb = rng.uniform(1e2, 1e4, (2, n))
    p = np.full(n, 0.14)
    u = rng.random((m, n))
    state = rng.integers(0, 2, n)

    def run(fn):
        return lambda: fn(ra, rb, state.copy(), p, u, 1e3, True)

    return run


def diffusive_case(m, n, rng):
    g = rng.uniform(5e3, 6e4, n)
    gam = np.full(n, 0.5e6)
    d0 = rng.uniform(-20e6, 20e6, n)
    step = np.full(n, np.sqrt(2 * 3.5e7 * 100))
    z = rng.standard_normal((m, n))

    def run(fn):
        return lambda: fn(g, gam, d0.copy(), step, z, -20e6, 20e6, 1e4, True)

    return run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=3421)
    ap.add_argument("--defects", type=int, nargs="+", default=[16, 64, 256])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"numba available: {HAVE_NUMBA}")
    print(f"{'kernel':<10} {'defects':>7} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8} {'max rel diff':>13}")
    cases = [("telegraph", telegraph_case, kernels.telegraph_rates_np, kernels.telegraph_rates_nb),
             ("diffusive", diffusive_case, kernels.diffusive_rates_np, kernels.diffusive_rates_nb)]
    for name, make, f_np, f_nb in cases:
        for n in args.defects:
            run = make(args.samples, n, rng)
            t_np, out_np = _time(run(f_np), args.repeat)
            if HAVE_NUMBA:
                run(f_nb)()  # compile outside the timed region
                t_nb, out_nb = _time(run(f_nb), args.repeat)
                diff = float(np.max(np.abs(out_nb / out_np - 1)))
                print(f"{name:<10} {n:>7} {t_np * 1e3:>11.2f} {t_nb * 1e3:>11.2f} {t_np / t_nb:>8.1f} {diff:>13.2e}")
            else:
                print(f"{name:<10} {n:>7} {t_np * 1e3:>11.2f} {'-':>11} {'-':>8} {'-':>13}")


if __name__ == "__main__":
    main()
