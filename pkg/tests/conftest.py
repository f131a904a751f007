"""Shared test oracles, all independent of the library's evolution path."""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from loqsim.fock import PhotonicState


def naive_permanent(matrix) -> complex:
    """Definition-level permanent: sum over all permutations, O(n!)."""
    a = np.asarray(matrix, dtype=complex)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    total = 0j
    for perm in itertools.permutations(range(n)):
        prod = 1.0 + 0j
        for i, j in enumerate(perm):
            prod *= a[i, j]
        total += prod
    return total


def brute_force_apply(u: np.ndarray, state: PhotonicState) -> PhotonicState:
    """First-quantized evolution: expand every photon over all modes.

    Each input photon in mode i becomes sum_j U[j,i] a_j^dagger; the
    m^n-term expansion is collected by output occupation with the
    sqrt(n!) ladder factors.  Exponential and permanent-free, so it is an
    independent check of the Ryser-based path.
    """
    m = state.mode_count
    out: dict[tuple[int, ...], complex] = {}
    for occ, amp in state.terms.items():
        photons = [i for i, c in enumerate(occ) for _ in range(c)]
        n = len(photons)
        in_norm = math.sqrt(np.prod([math.factorial(c) for c in occ]))
        for assignment in itertools.product(range(m), repeat=n):
            coeff = amp / in_norm
            for photon_mode, out_mode in zip(photons, assignment):
                coeff *= u[out_mode, photon_mode]
            target = [0] * m
            for j in assignment:
                target[j] += 1
            key = tuple(target)
            out[key] = out.get(key, 0j) + coeff
    final = {}
    for occ, amp in out.items():
        norm = math.sqrt(np.prod([math.factorial(c) for c in occ]))
        final[occ] = amp * norm
    return PhotonicState(m, final)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-ish random unitary from the QR of a complex Ginibre matrix."""
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_logical_amps(rng: np.random.Generator, n_qubits: int) -> np.ndarray:
    v = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)
