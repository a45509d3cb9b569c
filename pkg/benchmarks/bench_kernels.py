"""Time the numba and numpy KNN kernels on the same transductive sweep.

Run with ``python benchmarks/bench_kernels.py [--train N --test M --dim D]``.
Both backends are imported directly, so no environment flag is needed here.
"""

import argparse
import time

import numpy as np

from cpeff._kernels import _numba, _numpy
from cpeff.knn import gaussian_blobs
from cpeff.transducer import KnnSweep, draw_tau


def run(sweep, backend, variant, K, tau):
    import cpeff._kernels as kernels

    saved = kernels.count_pvalues, kernels.ratio_pvalues
    kernels.count_pvalues, kernels.ratio_pvalues = backend.count_pvalues, backend.ratio_pvalues
    try:
        return sweep.pvalues(variant, K, tau)
    finally:
        kernels.count_pvalues, kernels.ratio_pvalues = saved


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--train", type=int, default=2000)
    ap.add_argument("--test", type=int, default=500)
    ap.add_argument("--dim", type=int, default=16)
    ap.add_argument("--labels", type=int, default=10)
    ap.add_argument("--K", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    centers = np.random.default_rng(0).normal(size=(args.labels, args.dim))
    trX, trY = gaussian_blobs(args.train, 1, centers)
    teX, _ = gaussian_blobs(args.test, 2, centers)
    t0 = time.perf_counter()
    sweep = KnnSweep(trX, trY, teX, args.labels, seed=0)
    print(f"setup (distances, neighbour lists): {time.perf_counter() - t0:.3f}s")
    tau = draw_tau(0, args.test, args.labels)

    print(f"{'variant':8} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for variant in ("cp", "sp", "ratio"):
        run(sweep, _numba, variant, args.K, tau)  # compile outside the timing
        t_nb, p_nb = best_of(lambda: run(sweep, _numba, variant, args.K, tau), args.repeat)
        t_np, p_np = best_of(lambda: run(sweep, _numpy, variant, args.K, tau), args.repeat)
        if not np.allclose(p_nb, p_np, rtol=0, atol=1e-12):
            raise SystemExit(f"backends disagree on {variant}")
        print(f"{variant:8} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
