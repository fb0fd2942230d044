#!/usr/bin/env python3
"""Side-by-side benchmark of the JIT kernels against the pure-numpy fallback.

The fallback variants (py_*) are the exact functions the package uses when
GRADHMC_DISABLE_NUMBA=1; here both paths run in one process so the comparison
is direct. First JIT call compiles, so kernels are warmed up before timing.
"""

import time

import numpy as np

from gradhmc import _kernels


def bench(fn, args, repeat, number):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def main():
    if not _kernels.NUMBA_ENABLED:
        print("numba is disabled in this process; nothing to compare")
        return

    print("warming up JIT compilation...")
    t0 = time.perf_counter()
    _kernels.warmup()
    print(f"warmup took {time.perf_counter() - t0:.1f}s\n")

    rng = np.random.default_rng(0)
    rows = []

    for T in (250, 1000, 4000):
        y = rng.standard_normal(T)
        alpha = np.array([0.1, 0.1, 0.1])
        beta = np.array([0.4])
        args = (y, alpha, beta, 1.0)
        number = max(3, 2000 // T)
        rows.append(
            (
                f"garch_nll_grad T={T}",
                bench(_kernels.py_garch_nll_grad, args, 3, number),
                bench(_kernels.garch_nll_grad, args, 3, 50 * number),
            )
        )

    for hidden, d in ((50, 4), (100, 30)):
        w1 = rng.standard_normal((hidden, d))
        b1 = rng.standard_normal(hidden)
        w2 = rng.standard_normal((d, hidden)) * 0.1
        b2 = np.zeros(d)
        mean = np.zeros(d)
        sd = np.ones(d)
        q = rng.standard_normal(d)
        p = rng.standard_normal(d)
        fargs = (w1, b1, w2, b2, mean, sd, q)
        rows.append(
            (
                f"mlp_forward h={hidden} d={d}",
                bench(_kernels.py_mlp_forward, fargs, 3, 2000),
                bench(_kernels.mlp_forward, fargs, 3, 20000),
            )
        )
        largs = (w1, b1, w2, b2, mean, sd, q, p, 0.01, 15)
        rows.append(
            (
                f"mlp_leapfrog h={hidden} d={d} L=15",
                bench(_kernels.py_mlp_leapfrog, largs, 3, 200),
                bench(_kernels.mlp_leapfrog, largs, 3, 2000),
            )
        )

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    print("-" * (width + 34))
    for name, t_py, t_nb in rows:
        print(
            f"{name:<{width}}  {t_py * 1e6:>8.1f}us  {t_nb * 1e6:>8.1f}us"
            f"  {t_py / t_nb:>7.1f}x"
        )


if __name__ == "__main__":
    main()
