"""Benchmark the batch z-score kernels: numba JIT vs. pure-numpy fallback.

Usage:

    python3 benchmarks/bench_z.py [--size N] [--repeats R]

The numba path is skipped when numba is unavailable or disabled via
TOPCITIES_NO_NUMBA=1.
"""

import argparse
import time

import numpy as np

from topcities import kernels


def bench(fn, args, repeats):
    fn(*args)  # warm up (includes JIT compilation)
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=2_000_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    n = rng.integers(1, 100000, size=args.size).astype(np.float64)
    n_o = rng.integers(0, n + 1).astype(np.float64)

    numpy_time = bench(kernels._z_scores_numpy, (n, n_o, 0.10), args.repeats)
    print(f"numpy fallback: {numpy_time * 1e3:8.2f} ms for {args.size:,} z scores")

    if kernels.HAVE_NUMBA:
        out = np.empty(args.size)
        jit_time = bench(kernels._z_scores_jit, (n, n_o, 0.10, out), args.repeats)
        print(f"numba kernel:   {jit_time * 1e3:8.2f} ms for {args.size:,} z scores")
        print(f"speedup: {numpy_time / jit_time:.2f}x")

        check = kernels._z_scores_numpy(n[:1000], n_o[:1000], 0.10)
        np.testing.assert_allclose(out[:1000], check, rtol=0, atol=1e-12)
        print("paths agree to 1e-12")
    else:
        print("numba unavailable or disabled; only the fallback was timed")


if __name__ == "__main__":
    main()
