"""Compare the compiled and numpy Jacobi kernels.

    python benchmarks/bench_kernels.py [--sizes 50,100,200,400] [--repeat 3]

Gram matrices are built from random centred data, as in eigenspace fitting.
A second table times one full DCT sweep cell (fit + classify) per backend.
"""
import argparse
import time

import numpy as np

from eigenclass.classifier import ClassifierRule, fit_model
from eigenclass.dataset import SyntheticSpec, generate_synthetic
from eigenclass.eigenspace import symmetric_eigen
from eigenclass.evaluation import sweep_dct
from eigenclass.kernels import BACKENDS


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--sizes", default="50,100,200,400")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    backends = sorted(BACKENDS)
    if "cython" not in BACKENDS:
        print("compiled kernel not available; only the numpy fallback will be timed")

    rng = np.random.default_rng(0)
    print(f"{'M':>6} " + " ".join(f"{b:>12}" for b in backends) + "   speedup  max|dlambda|")
    for m in sizes:
        X = rng.normal(size=(m, 4 * m))
        X -= X.mean(axis=0)
        G = X @ X.T
        timings = {}
        values = {}
        for b in backends:
            timings[b] = best_of(lambda: symmetric_eigen(G, backend=b), args.repeat)
            values[b] = symmetric_eigen(G, backend=b)[0]
        speed = timings["python"] / timings["cython"] if "cython" in timings else float("nan")
        diff = np.abs(values[backends[0]] - values[backends[-1]]).max()
        print(f"{m:>6} " + " ".join(f"{timings[b]:>11.4f}s" for b in backends) + f"   {speed:7.1f}x  {diff:.2e}")

    ds = generate_synthetic(SyntheticSpec(), seed=42)
    print("\nDCT sweep 10..20 x {knn1..9, centroid} on the default synthetic set (200 train images)")
    for b in backends:
        t = best_of(lambda: sweep_dct(ds.train, ds.test, range(10, 21), [1, 3, 5, 7, 9], True, backend=b), 1)
        print(f"  {b:>8}: {t:.2f}s")


if __name__ == "__main__":
    main()
