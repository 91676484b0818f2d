"""Benchmark the numba matvec kernel against the pure-numpy fallback.

Both variants live in stringbreak.kernels; the env flag STRINGBREAK_NO_NUMBA
selects which one apply_ising points at, but here we call both directly so a
single run prints the comparison.

Run: python benchmarks/bench_kernels.py [max_n]
"""

import sys
import time

import numpy as np

from stringbreak.kernels import apply_ising_numpy

try:
    from stringbreak.kernels import _apply_ising_njit
except ImportError:
    _apply_ising_njit = None


def bench(fn, diag, g, x, out, repeats):
    fn(diag, g, x, out)  # warmup (and JIT compile for the numba path)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(diag, g, x, out)
    return (time.perf_counter() - t0) / repeats


def main():
    max_n = int(sys.argv[1]) if len(sys.argv) > 1 else 20
    rng = np.random.default_rng(7)
    print(f"{'n':>3} {'dim':>9} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>8}")
    for n in range(10, max_n + 1, 2):
        dim = 1 << n
        diag = rng.standard_normal(dim)
        x = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        out = np.empty(dim, dtype=np.complex128)
        repeats = max(3, 2**22 // dim)
        t_np = bench(apply_ising_numpy, diag, 1.1, x, out, repeats)
        if _apply_ising_njit is not None:
            t_nb = bench(_apply_ising_njit, diag, 1.1, x, out, repeats)
            print(f"{n:>3} {dim:>9} {1e3 * t_np:>12.3f} {1e3 * t_nb:>12.3f} "
                  f"{t_np / t_nb:>8.2f}")
        else:
            print(f"{n:>3} {dim:>9} {1e3 * t_np:>12.3f} {'n/a':>12} {'n/a':>8}")

    # agreement check
    ref = np.empty_like(out)
    apply_ising_numpy(diag, 1.1, x, ref)
    if _apply_ising_njit is not None:
        got = np.empty_like(out)
        _apply_ising_njit(diag, 1.1, x, got)
        err = np.max(np.abs(got - ref))
        print(f"max |numba - numpy| at n={max_n}: {err:.2e}")


if __name__ == "__main__":
    main()
