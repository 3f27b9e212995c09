"""Time the numba and numpy flavours of each inner loop.

    python benchmarks/bench_kernels.py [--repeat 5]

The numba column is omitted when numba is missing or disabled with
CELLRATE_NUMBA=0. The first numba call (compilation) is excluded.
"""

import argparse
import time

import numpy as np

from cellrate import _kernels as k
from cellrate._jit import USE_NUMBA
from cellrate.multicell import hypoexp_coefficients


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    n, users = 1 << 14, 100
    delta = 1000.0 * np.sqrt(rng.random((n, users)))
    fading = rng.exponential(size=(n, users))
    pick = rng.integers(0, users, n)
    sig = rng.uniform(1e-15, 1e-10, 4096)
    im = rng.uniform(1e-16, 1e-14, (4096, 6))
    fad7 = rng.exponential(size=(1 << 18, 7))
    sig7 = rng.uniform(1e-15, 1e-10, 1 << 18)
    im7 = rng.uniform(1e-16, 1e-14, (1 << 18, 6))
    nodes, weights = k.log_rule()
    means = np.array([1.0, 2.0, 3.5, 0.4, 7.0, 5.0])
    coeffs = hypoexp_coefficients(means)
    eta = np.linspace(0.0, 60.0, 1 << 18)
    return {
        "select_served greedy (16384 x 100)": (
            lambda: k.select_served_np(delta, fading, 1e6, 2.0, k.MODE_GREEDY, pick),
            lambda: k.select_served_nb(delta, fading, 1e6, 2.0, k.MODE_GREEDY, pick)),
        "sinr_draws (262144 x 7)": (
            lambda: k.sinr_draws_np(sig7, im7, fad7, 1e-14),
            lambda: k.sinr_draws_nb(sig7, im7, fad7, 1e-14)),
        "location_mean_rate (4096 locations)": (
            lambda: k.location_mean_rate_np(sig, im, 1e-14, nodes, weights),
            lambda: k.location_mean_rate_nb(sig, im, 1e-14, nodes, weights)),
        "hypoexp_pdf (262144 points)": (
            lambda: k.hypoexp_pdf_np(eta, coeffs, means),
            lambda: k.hypoexp_pdf_nb(eta, coeffs, means)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':40s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>8s}")
    for name, (np_fn, nb_fn) in cases().items():
        t_np = best_of(np_fn, args.repeat)
        if USE_NUMBA:
            t_nb = best_of(nb_fn, args.repeat)
            print(f"{name:40s} {1e3 * t_np:12.2f} {1e3 * t_nb:12.2f} {t_np / t_nb:8.1f}")
        else:
            print(f"{name:40s} {1e3 * t_np:12.2f} {'-':>12s} {'-':>8s}")


if __name__ == "__main__":
    main()
