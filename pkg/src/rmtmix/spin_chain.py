"""Disordered spin-1/2 Heisenberg ring in fixed-magnetization sectors.

    H = sum_k S_k . S_{k+1} + sum_k h_k S^z_k        (periodic, S_{L} . S_0 closing the ring)

Random fields h_k are drawn uniformly from (-h, h).  Basis states of a
sector are computational bitstrings (bit k = site k, set bit = up spin)
enumerated in ascending integer order, so e.g. the L = 4, one-up sector is
0001, 0010, 0100, 1000.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np


@dataclass(frozen=True)
class SubspaceBasis:
    """Fixed-magnetization sector: bitstring states in ascending order."""

    length: int
    n_up: int
    states: tuple
    index: dict

    @property
    def dimension(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class DisorderRealization:
    """One draw of the on-site fields."""

    fields: np.ndarray
    strength: float


def build_basis(length: int, n_up: int) -> SubspaceBasis:
    """Enumerate the sector with n_up up spins on a ring of given length."""
    if length < 2:
        raise ValueError(f"chain length must be >= 2, got {length}")
    if not 0 <= n_up <= length:
        raise ValueError(f"n_up must lie in [0, {length}], got {n_up}")
    states = sorted(sum(1 << p for p in sites) for sites in combinations(range(length), n_up))
    index = {s: i for i, s in enumerate(states)}
    return SubspaceBasis(length=length, n_up=n_up, states=tuple(states), index=index)


def sample_disorder(length: int, strength: float, rng: np.random.Generator) -> DisorderRealization:
    """Fields drawn uniformly from the open interval (-strength, strength)."""
    if strength < 0:
        raise ValueError(f"disorder strength must be >= 0, got {strength}")
    fields = rng.uniform(-strength, strength, size=length)
    while strength > 0 and np.any(np.abs(fields) >= strength):
        bad = np.abs(fields) >= strength
        fields[bad] = rng.uniform(-strength, strength, size=int(bad.sum()))
    return DisorderRealization(fields=fields, strength=float(strength))


def heisenberg(basis: SubspaceBasis, disorder: DisorderRealization) -> np.ndarray:
    """Dense sector Hamiltonian for one disorder realization."""
    fields = np.asarray(disorder.fields, dtype=float)
    if fields.shape != (basis.length,):
        raise ValueError(
            f"disorder has {fields.shape[0] if fields.ndim == 1 else fields.shape} fields, "
            f"chain length is {basis.length}"
        )
    length = basis.length
    dim = basis.dimension
    h = np.zeros((dim, dim))
    for i, s in enumerate(basis.states):
        diag = 0.0
        for k in range(length):
            k2 = (k + 1) % length
            b1 = (s >> k) & 1
            b2 = (s >> k2) & 1
            if b1 == b2:
                diag += 0.25
            else:
                diag -= 0.25
                flipped = s ^ ((1 << k) | (1 << k2))
                h[i, basis.index[flipped]] += 0.5
            diag += fields[k] * (0.5 if b1 else -0.5)
        h[i, i] = diag
    return h


def one_excitation_hamiltonian(length: int, disorder: DisorderRealization) -> np.ndarray:
    """Single-flipped-spin sector Hamiltonian, built directly in position space.

    State j is the up spin at site j on an otherwise down ring (the same
    ordering build_basis(length, 1) produces).  Evaluating the ring terms
    for these states gives diagonal (length/4 - 1) + h_j/2 - (1/2) sum_{k != j} h_k
    and hopping 1/2 between neighboring sites.
    """
    fields = np.asarray(disorder.fields, dtype=float)
    if fields.shape != (length,):
        raise ValueError(f"disorder has shape {fields.shape}, chain length is {length}")
    h = np.zeros((length, length))
    total_field = float(fields.sum())
    for k in range(length):
        k2 = (k + 1) % length
        h[k, k2] += 0.5
        h[k2, k] += 0.5
    # bond (k, k2) contributes +1/4 unless it touches the flipped site, then -1/4;
    # each site sits on two bonds, so the zz sum is length/4 - 1 for every j
    for j in range(length):
        h[j, j] += (length - 4) / 4.0 + 0.5 * fields[j] - 0.5 * (total_field - fields[j])
    return h


def one_magnon_dispersion(length: int) -> np.ndarray:
    """Clean-ring (h = 0) one-excitation eigenvalues, ascending."""
    j = np.arange(length)
    return np.sort((length / 4.0 - 1.0) + np.cos(2.0 * np.pi * j / length))
