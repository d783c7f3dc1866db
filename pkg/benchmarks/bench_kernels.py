#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy fallbacks.

Both implementations are importable side by side, so one process measures
the pair directly.  Run:

    python3 benchmarks/bench_kernels.py

Set STMATCH_NO_NUMBA=1 at import time to see what the package would use on
a numba-less install (this script then reports the numpy path only).
"""

import time

import numpy as np

from stmatch import _kernels


def _timeit(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_threshold():
    rng = np.random.default_rng(0)
    print("per-column top-tau selection (tau = n // 4)")
    print(f"{'shape':>16} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for n, cols in ((64, 256), (256, 1024), (1024, 2048)):
        m = rng.standard_normal((n, cols))
        tau = n // 4
        t_np = _timeit(_kernels._threshold_columns_numpy, m, tau)
        if _kernels.NUMBA_ACTIVE:
            _kernels._threshold_columns_numba(m, tau)  # compile once
            t_nb = _timeit(_kernels._threshold_columns_numba, m, tau)
            assert np.array_equal(_kernels._threshold_columns_numpy(m, tau),
                                  _kernels._threshold_columns_numba(m, tau))
            print(f"{n}x{cols:>10} {t_np * 1e3:>10.2f}ms {t_nb * 1e3:>10.2f}ms "
                  f"{t_np / t_nb:>8.1f}x")
        else:
            print(f"{n}x{cols:>10} {t_np * 1e3:>10.2f}ms {'-':>12} {'-':>9}")


def bench_cell_histograms():
    rng = np.random.default_rng(1)
    print("\norientation-histogram voting (cell 8, 9 bins)")
    print(f"{'shape':>16} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for side in (64, 256, 1024):
        gx = rng.standard_normal((side, side))
        gy = rng.standard_normal((side, side))
        t_np = _timeit(_kernels._cell_histograms_numpy, gx, gy, 8, 9)
        if _kernels.NUMBA_ACTIVE:
            _kernels._cell_histograms_numba(gx, gy, 8, 9)  # compile once
            t_nb = _timeit(_kernels._cell_histograms_numba, gx, gy, 8, 9)
            a = _kernels._cell_histograms_numpy(gx, gy, 8, 9)
            b = _kernels._cell_histograms_numba(gx, gy, 8, 9)
            assert np.allclose(a, b, rtol=1e-12, atol=1e-13)
            print(f"{side}x{side:>10} {t_np * 1e3:>10.2f}ms {t_nb * 1e3:>10.2f}ms "
                  f"{t_np / t_nb:>8.1f}x")
        else:
            print(f"{side}x{side:>10} {t_np * 1e3:>10.2f}ms {'-':>12} {'-':>9}")


if __name__ == "__main__":
    print(f"numba active: {_kernels.NUMBA_ACTIVE} "
          f"(disable with {_kernels.ENV_FLAG}=1)\n")
    bench_threshold()
    bench_cell_histograms()
