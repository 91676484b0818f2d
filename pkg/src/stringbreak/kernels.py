"""Hot numeric kernels over the 2^ell bitstring basis.

Two interchangeable backends: numba @njit loops (default) and pure numpy.
Set STRINGBREAK_NO_NUMBA=1 to force the numpy path. Both are sequential
with a fixed reduction order, so results are bit-identical across runs
and thread counts.
"""

import os

import numpy as np

USE_NUMBA = os.environ.get("STRINGBREAK_NO_NUMBA", "0") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

__all__ = [
    "USE_NUMBA",
    "apply_ising",
    "apply_ising_numpy",
    "longest_run_table",
    "longest_run_table_numpy",
    "sign_table",
]


def apply_ising_numpy(diag, g, x, out):
    """out = H x with H = diag + single-bit-flip off-diagonal (-g)."""
    n = x.size
    ell = n.bit_length() - 1
    np.multiply(diag, x, out=out)
    for i in range(ell):
        block = 1 << i
        flipped = x.reshape(n // (2 * block), 2, block)[:, ::-1, :].reshape(n)
        out -= g * flipped
    return out


def longest_run_table_numpy(ell):
    """For each basis index s, length of the longest run of set bits."""
    states = np.arange(1 << ell, dtype=np.int64)
    t = states.copy()
    runs = np.zeros(1 << ell, dtype=np.int64)
    for r in range(1, ell + 1):
        runs[t != 0] = r
        t &= t >> 1
    return runs


if USE_NUMBA:

    @njit(cache=True)
    def _apply_ising_njit(diag, g, x, out):
        n = x.size
        ell = 0
        m = n
        while m > 1:
            m >>= 1
            ell += 1
        for a in range(n):
            out[a] = diag[a] * x[a]
        for i in range(ell):
            bit = 1 << i
            for a in range(n):
                out[a] -= g * x[a ^ bit]
        return out

    @njit(cache=True)
    def _longest_run_njit(ell):
        n = 1 << ell
        runs = np.zeros(n, dtype=np.int64)
        for s in range(n):
            best = 0
            cur = 0
            for i in range(ell):
                if (s >> i) & 1:
                    cur += 1
                    if cur > best:
                        best = cur
                else:
                    cur = 0
            runs[s] = best
        return runs

    def apply_ising(diag, g, x, out):
        return _apply_ising_njit(diag, g, x, out)

    def longest_run_table(ell):
        return _longest_run_njit(ell)

else:
    apply_ising = apply_ising_numpy
    longest_run_table = longest_run_table_numpy


def sign_table(ell):
    """(2^ell, ell) matrix of sigma^z = +/-1 per site; bit i is site i+1."""
    states = np.arange(1 << ell, dtype=np.int64)
    bits = (states[:, None] >> np.arange(ell)) & 1
    return (2 * bits - 1).astype(np.int8)
