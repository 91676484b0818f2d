"""Diagonal-basis observables of a state vector over n spins."""

from functools import lru_cache

import numpy as np

from . import kernels


@lru_cache(maxsize=32)
def _signs(n):
    return kernels.sign_table(n).astype(np.float64)


@lru_cache(maxsize=32)
def _runs(n):
    return kernels.longest_run_table(n).astype(np.int64)


def magnetization(state):
    """Mean sigma^z and the per-site profile."""
    p = np.abs(state) ** 2
    profile = _signs(_n_spins(state)) .T @ p
    return float(profile.mean()), profile


def _n_spins(state):
    n = state.size.bit_length() - 1
    if 1 << n != state.size:
        raise ValueError(f"state length {state.size} is not a power of two")
    return n


def connected_correlator(state):
    """C = sum_{i<j} (<s_i s_j> - <s_i><s_j>)."""
    p = np.abs(state) ** 2
    signs = _signs(_n_spins(state))
    means = signs.T @ p
    pair = (signs * p[:, None]).T @ signs
    corr = pair - np.outer(means, means)
    return float(np.triu(corr, 1).sum())


def instantaneous_populations(state, slice_):
    """P_n = |<psi_n|Psi>|^2 for each eigenvector in the spectrum slice."""
    if slice_.eigenvectors is None:
        raise ValueError("spectrum slice carries no eigenvectors")
    overlaps = slice_.eigenvectors.conj().T @ state
    return np.abs(overlaps) ** 2


def bubble_histogram(state):
    """Distribution P_d(r) of the longest run of +z spins, r in 0..n."""
    n = _n_spins(state)
    p = np.abs(state) ** 2
    hist = np.bincount(_runs(n), weights=p, minlength=n + 1)
    return hist


def basis_state(bits):
    """Product state |bits>, site 1 as least significant bit."""
    bits = np.asarray(bits)
    idx = int(np.sum(bits.astype(np.int64) << np.arange(bits.size)))
    state = np.zeros(1 << bits.size, dtype=np.complex128)
    state[idx] = 1.0
    return state
