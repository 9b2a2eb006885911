"""Unitary evolution of a pure state under an ensemble of Hamiltonians.

Each Hamiltonian is diagonalized once; evolution to any time is then a
phase rotation in its eigenbasis.  The mixed state is the equal-weight
average of the evolved projectors,

    rho(t) = (1/M) sum_l |psi_l(t)><psi_l(t)| ,

assembled as a Gram product of the evolved columns and re-Hermitized to
absorb roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DiagonalizationError


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and eigenvector columns of a Hermitian matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dimension(self) -> int:
        return self.eigenvalues.shape[0]


def decompose(h: np.ndarray) -> SpectralDecomposition:
    """Full eigendecomposition of a Hermitian matrix.

    Raises DiagonalizationError if the solver fails to converge, ValueError
    if the input is not square Hermitian.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    scale = np.max(np.abs(h)) or 1.0
    if not np.allclose(h, h.conj().T, atol=1e-10 * scale):
        raise ValueError("matrix is not Hermitian")
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise DiagonalizationError(
            f"eigensolver failed on a {h.shape[0]} x {h.shape[1]} matrix "
            f"(max |entry| = {scale:.3e}): {exc}"
        ) from exc
    return SpectralDecomposition(eigenvalues=w, eigenvectors=v)


def _rotate(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    # real eigenvector matrices stay in dgemv; one complex product otherwise
    if np.isrealobj(v):
        return v @ w.real + 1j * (v @ w.imag)
    return v @ w


def propagate(d: SpectralDecomposition, psi0: np.ndarray, t: float) -> np.ndarray:
    """Evolved state exp(-i H t) |psi0> from the decomposition of H."""
    psi0 = np.asarray(psi0)
    if psi0.shape != (d.dimension,):
        raise ValueError(f"state shape {psi0.shape} does not match dimension {d.dimension}")
    c = d.eigenvectors.conj().T @ psi0
    return _rotate(d.eigenvectors, np.exp(-1j * d.eigenvalues * t) * c)


def propagate_grid(d: SpectralDecomposition, psi0: np.ndarray, times) -> np.ndarray:
    """Columns exp(-i H t_k) |psi0> for every t_k.

    Each column is produced by exactly the per-time operations of
    ``propagate``, so a grid pass and independent single-time calls agree
    bit for bit.
    """
    psi0 = np.asarray(psi0)
    if psi0.shape != (d.dimension,):
        raise ValueError(f"state shape {psi0.shape} does not match dimension {d.dimension}")
    times = np.asarray(times, dtype=float)
    c = d.eigenvectors.conj().T @ psi0
    out = np.empty((d.dimension, times.size), dtype=complex)
    for k, t in enumerate(times):
        out[:, k] = _rotate(d.eigenvectors, np.exp(-1j * d.eigenvalues * t) * c)
    return out


def state_matrix_to_density(psis: np.ndarray) -> np.ndarray:
    """Equal-weight density matrix from evolved states stacked as columns."""
    m = psis.shape[1]
    rho = psis @ (psis.conj().T / m)
    return 0.5 * (rho + rho.conj().T)


def mixed_state(
    decompositions,
    psi0: np.ndarray,
    t: float,
    allow_any_size: bool = False,
) -> np.ndarray:
    """Ensemble-averaged density matrix at time t.

    The ensemble size is pinned to the Hilbert dimension (one member per
    basis direction of randomness); pass allow_any_size=True only for
    sensitivity studies that deliberately decouple the two.
    """
    decompositions = list(decompositions)
    if not decompositions:
        raise ConfigError("ensemble is empty")
    n = np.asarray(psi0).shape[0]
    if len(decompositions) != n and not allow_any_size:
        raise ConfigError(
            f"ensemble size {len(decompositions)} != Hilbert dimension {n}; "
            "pass allow_any_size=True to override"
        )
    psis = np.empty((n, len(decompositions)), dtype=complex)
    for l, d in enumerate(decompositions):
        psis[:, l] = propagate(d, psi0, t)
    return state_matrix_to_density(psis)


def purity(rho: np.ndarray) -> float:
    """Tr rho^2, via the Frobenius norm of a Hermitian rho."""
    rho = np.asarray(rho)
    return float(np.vdot(rho, rho).real)


def spectrum(rho: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a density matrix."""
    try:
        return np.linalg.eigvalsh(rho)
    except np.linalg.LinAlgError as exc:
        raise DiagonalizationError(f"eigensolver failed on density matrix: {exc}") from exc
