"""Random-matrix ensembles.

Normalization convention: matrix elements carry no dimension-dependent
scaling.  Diagonal entries have unit variance and independent off-diagonal
entries have variance 1/2 (per real component for the Hermitian case), so
the eigenvalue bulk of an n x n sample spans roughly [-R, R] with
R = sqrt(2 n).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

_SQRT_HALF = np.sqrt(0.5)


@lru_cache(maxsize=32)
def _upper_indices(n: int):
    return np.triu_indices(n, k=1)


def _check_dimension(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ValueError(f"matrix dimension must be an integer >= 2, got {n!r}")


def sample_goe(n: int, rng: np.random.Generator) -> np.ndarray:
    """Real symmetric matrix with Var[diag] = 1, Var[offdiag] = 1/2.

    Consumes exactly n (n + 1) / 2 standard normals: n for the diagonal,
    then one per independent upper-triangle entry.
    """
    _check_dimension(n)
    draws = rng.standard_normal(n * (n + 1) // 2)
    h = np.zeros((n, n))
    np.fill_diagonal(h, draws[:n])
    iu, ju = _upper_indices(n)
    off = draws[n:] * _SQRT_HALF
    h[iu, ju] = off
    h[ju, iu] = off
    return h


def sample_antisymmetric(n: int, rng: np.random.Generator) -> np.ndarray:
    """Real antisymmetric matrix, independent entries with variance 1/2.

    Consumes n (n - 1) / 2 standard normals; the diagonal is zero.
    """
    _check_dimension(n)
    a = np.zeros((n, n))
    iu, ju = _upper_indices(n)
    off = rng.standard_normal(n * (n - 1) // 2) * _SQRT_HALF
    a[iu, ju] = off
    a[ju, iu] = -off
    return a


def sample_gue(n: int, rng: np.random.Generator) -> np.ndarray:
    """Complex Hermitian matrix, Var[diag] = 1, Var[Re] = Var[Im] = 1/2 off-diagonal.

    Consumes n + n (n - 1) real standard normals: the real diagonal first,
    then the real parts of the upper triangle, then the imaginary parts.
    """
    _check_dimension(n)
    m = n * (n - 1) // 2
    draws = rng.standard_normal(n + 2 * m)
    h = np.zeros((n, n), dtype=complex)
    np.fill_diagonal(h, draws[:n])
    iu, ju = _upper_indices(n)
    off = (draws[n:n + m] + 1j * draws[n + m:]) * _SQRT_HALF
    h[iu, ju] = off
    h[ju, iu] = off.conj()
    return h


def crossover_hamiltonian(s: np.ndarray, a: np.ndarray, alpha: float) -> np.ndarray:
    """Hermitian interpolation H = S + i alpha A between the symmetric and unitary classes.

    ``s`` must be real symmetric and ``a`` real antisymmetric; alpha = 0
    reproduces ``s`` (as a complex array) and alpha = 1 has maximally broken
    time-reversal symmetry.
    """
    s = np.asarray(s, dtype=float)
    a = np.asarray(a, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError(f"s must be square, got shape {s.shape}")
    if a.shape != s.shape:
        raise ValueError(f"shape mismatch: s is {s.shape}, a is {a.shape}")
    return s + 1j * alpha * a


def semicircle_radius(n: int) -> float:
    """Bulk edge R = sqrt(2 n) for the normalization used here."""
    _check_dimension(n)
    return float(np.sqrt(2.0 * n))


def basis_state(n: int, index: int = 0) -> np.ndarray:
    """Computational basis vector |index> of dimension n."""
    if n < 1:
        raise ValueError(f"state dimension must be >= 1, got {n}")
    if not 0 <= index < n:
        raise IndexError(f"basis index {index} out of range for dimension {n}")
    psi = np.zeros(n)
    psi[index] = 1.0
    return psi


def sample_real_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """Unit vector drawn uniformly from the real sphere in dimension n."""
    if n < 1:
        raise ValueError(f"state dimension must be >= 1, got {n}")
    while True:
        v = rng.standard_normal(n)
        norm = np.linalg.norm(v)
        if norm > 0:
            return v / norm
