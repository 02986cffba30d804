"""Benchmark the compiled kernel backend against the pure-Python fallback.

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from gapcount.kernels import _pykernels

try:
    from gapcount.kernels import _ckernels
except ImportError:
    _ckernels = None


def _time(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_count_below(backend, n, n_shifts):
    rng = np.random.default_rng(1)
    diag = rng.standard_normal(n)
    off = rng.standard_normal(n - 1)
    shifts = np.linspace(-2.5, 2.5, n_shifts)
    return _time(lambda: backend.count_below(diag, off, shifts, 1e-280))


def bench_resolvent_diagonal(backend, n):
    rng = np.random.default_rng(2)
    diag = rng.standard_normal(n) + 5.0
    off = rng.standard_normal(n - 1)
    return _time(lambda: backend.resolvent_diagonal(diag, off, 1e-280))


def main():
    print(f"{'kernel':<34}{'python':>12}{'cython':>12}{'speedup':>10}")
    cases = [
        ("count_below n=2001, 64 shifts",
         lambda b: bench_count_below(b, 2001, 64)),
        ("count_below n=401, 512 shifts",
         lambda b: bench_count_below(b, 401, 512)),
        ("resolvent_diagonal n=20001",
         lambda b: bench_resolvent_diagonal(b, 20001)),
        ("resolvent_diagonal n=200001",
         lambda b: bench_resolvent_diagonal(b, 200001)),
    ]
    for name, runner in cases:
        t_py = runner(_pykernels)
        if _ckernels is None:
            print(f"{name:<34}{t_py * 1e3:>10.2f}ms{'n/a':>12}{'':>10}")
            continue
        t_cy = runner(_ckernels)
        print(
            f"{name:<34}{t_py * 1e3:>10.2f}ms{t_cy * 1e3:>10.2f}ms"
            f"{t_py / t_cy:>9.1f}x"
        )


if __name__ == "__main__":
    main()
