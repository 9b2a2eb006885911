"""Short-time expansion of the ensemble-averaged density matrix.

For rho0 = |k><k| and a single Hamiltonian H, the evolved projector expands
as rho(t) = sigma_0 + t sigma_1 + t^2 sigma_2 + t^3 sigma_3 + O(t^4) with

    sigma_0 = rho0
    sigma_1 = i [rho0, H]
    sigma_2 = H rho0 H - (1/2) {H^2, rho0}
    sigma_3 = (i/2) [H rho0 H, H] + (i/6) [H^3, rho0]

Averaged over an ensemble of n Hamiltonians starting from |0>, the block of
the series on indices n, m >= 1 organizes into

    sigma(t) = t^2 / sqrt(2 n) * (B + i t sqrt(n)/2 * D) + (t^2 / 2) * identity

with B and D built from the first column of each H and of H^2.  B has
zero-mean entries with Var[B_nn] = 1 and Var[B_nm] = 1/2; D is real
antisymmetric with Var[D_nm] = 1/2.  The i t D term is the leading
symmetry-breaking correction, so the mixed state's bulk leaves the
time-reversal-symmetric class on the scale t ~ 2/n.
"""

from __future__ import annotations

from dataclasses import dataclass
import warnings

import numpy as np


@dataclass(frozen=True)
class SeriesTerms:
    """Coefficient matrices sigma_0 .. sigma_3 of the t-expansion for one H."""

    sigma0: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    sigma3: np.ndarray


@dataclass(frozen=True)
class CrossoverMatrices:
    """Bulk-block generator matrices (B, D) of the averaged short-time state."""

    b: np.ndarray
    d: np.ndarray

    @property
    def bulk_dimension(self) -> int:
        return self.b.shape[0]


def _projector_index(rho0: np.ndarray) -> int:
    rho0 = np.asarray(rho0)
    if rho0.ndim != 2 or rho0.shape[0] != rho0.shape[1]:
        raise ValueError(f"rho0 must be square, got shape {rho0.shape}")
    k = int(np.argmax(np.abs(np.diag(rho0))))
    expected = np.zeros_like(rho0)
    expected[k, k] = 1.0
    if not np.allclose(rho0, expected, atol=1e-12):
        raise ValueError("rho0 must be a projector onto a single basis state")
    return k


def series_terms(h: np.ndarray, rho0: np.ndarray) -> SeriesTerms:
    """Expansion matrices for one Hamiltonian and a basis-state projector."""
    h = np.asarray(h)
    _projector_index(rho0)
    rho0 = np.asarray(rho0, dtype=h.dtype if np.iscomplexobj(h) else float)
    h2 = h @ h
    h3 = h2 @ h
    hrh = h @ rho0 @ h
    sigma1 = 1j * (rho0 @ h - h @ rho0)
    sigma2 = hrh - 0.5 * (h2 @ rho0 + rho0 @ h2)
    sigma3 = 0.5j * (hrh @ h - h @ hrh) + (1j / 6.0) * (h3 @ rho0 - rho0 @ h3)
    return SeriesTerms(sigma0=rho0.astype(complex), sigma1=sigma1.astype(complex),
                       sigma2=sigma2.astype(complex), sigma3=sigma3.astype(complex))


def series_density(hamiltonians, rho0: np.ndarray, t: float) -> np.ndarray:
    """Ensemble-averaged series state rho(t) through O(t^3)."""
    hamiltonians = list(hamiltonians)
    if not hamiltonians:
        raise ValueError("ensemble is empty")
    n = hamiltonians[0].shape[0]
    acc1 = np.zeros((n, n), dtype=complex)
    acc2 = np.zeros((n, n), dtype=complex)
    acc3 = np.zeros((n, n), dtype=complex)
    for h in hamiltonians:
        terms = series_terms(h, rho0)
        acc1 += terms.sigma1
        acc2 += terms.sigma2
        acc3 += terms.sigma3
    m = len(hamiltonians)
    rho = np.asarray(rho0, dtype=complex) + (t / m) * acc1 + (t * t / m) * acc2 + (t ** 3 / m) * acc3
    return rho


def build_crossover_matrices(hamiltonians) -> CrossoverMatrices:
    """B and D from an ensemble of Hamiltonians, initial state |0>.

    B_nm = sqrt(2/n) sum_l H_n0 H_0m - sqrt(n/2) delta_nm  (n, m >= 1),
    D_nm = sqrt(2)/n sum_l [ H_n0 (H^2)_0m - (H^2)_n0 H_0m ].

    The normalization assumes ensemble size == matrix dimension n and unit
    diagonal variance of the members; a pooled diagonal variance far from 1
    triggers a warning since B and D lose their calibration.
    """
    iterator = iter(hamiltonians)
    try:
        first = next(iterator)
    except StopIteration:
        raise ValueError("ensemble is empty") from None
    n = first.shape[0]
    if n < 2:
        raise ValueError("need dimension >= 2 to have a bulk block")
    # consumed lazily so large ensembles never need to be materialized at once
    sum_cc = np.zeros((n - 1, n - 1), dtype=complex if np.iscomplexobj(first) else float)
    sum_cq = np.zeros_like(sum_cc)
    diag_sq = 0.0
    m = 0
    h = first
    while True:
        if h.shape != (n, n):
            raise ValueError(f"inconsistent member shape {h.shape}, expected {(n, n)}")
        col = h[:, 0]
        qcol = h @ col  # first column of H^2; hermiticity gives the 0th row as its conjugate
        c = col[1:]
        q = qcol[1:]
        sum_cc += np.outer(c, c.conj())
        sum_cq += np.outer(c, q.conj()) - np.outer(q, c.conj())
        diag_sq += float(np.mean(np.square(np.diagonal(h).real)))
        m += 1
        h = next(iterator, None)
        if h is None:
            break
    diag_var = diag_sq / m
    if not 0.5 < diag_var < 2.0:
        warnings.warn(
            f"pooled diagonal variance {diag_var:.3g} is far from 1; "
            "B and D normalization assumes unit-variance diagonals",
            stacklevel=2,
        )
    b = np.sqrt(2.0 / n) * sum_cc - np.sqrt(n / 2.0) * np.eye(n - 1)
    d = (np.sqrt(2.0) / n) * sum_cq
    return CrossoverMatrices(b=b, d=d)


def sigma_bulk(cm: CrossoverMatrices, t: float, n: int) -> np.ndarray:
    """Traceless bulk block sigma(t) = t^2/sqrt(2n) (B + i t sqrt(n)/2 D)."""
    if cm.bulk_dimension != n - 1:
        raise ValueError(f"matrices are for dimension {cm.bulk_dimension + 1}, got n = {n}")
    return (t * t / np.sqrt(2.0 * n)) * (cm.b + 1j * (t * np.sqrt(n) / 2.0) * cm.d)


def crossover_time(n: int) -> float:
    """Time scale t ~ 2/n where the i t D term overtakes B."""
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    return 2.0 / n


@dataclass(frozen=True)
class VarianceRow:
    """Measured second moment of one matrix-entry family against its target."""

    name: str
    mean: float
    sem: float
    target: float

    @property
    def deviation_se(self) -> float:
        return abs(self.mean - self.target) / self.sem if self.sem > 0 else np.inf


@dataclass(frozen=True)
class ShortTimeReport:
    """Self-check of the short-time construction.

    ``variances`` holds the measured second moments of B and D entries;
    ``slope`` is the log-log scaling of the exact-minus-series error with
    time, which must be 4 for a series truncated after t^3.
    """

    n: int
    ensembles: int
    variances: tuple
    slope: float
    slope_n: int
    slope_times: tuple
    slope_errors: tuple


def short_time_report(n: int = 512, ensembles: int = 200, seed: int = 1,
                      slope_n: int = 32) -> ShortTimeReport:
    """Measure B/D entry variances and the series truncation order.

    Each ensemble draws n symmetric members (streams keyed by the ensemble
    and member indices), builds B and D, and records the mean square of the
    B diagonal, B off-diagonal and D off-diagonal entries; the report
    carries their means and standard errors over ensembles against the
    targets 1, 1/2 and 1/2.
    """
    from . import rng
    from .ensembles import basis_state, sample_goe
    from .evolution import decompose, mixed_state

    if n < 8:
        raise ValueError(f"variance check needs n >= 8, got {n}")
    if ensembles < 2:
        raise ValueError(f"need at least 2 ensembles, got {ensembles}")
    iu = np.triu_indices(n - 1, k=1)
    b_diag, b_off, d_off = [], [], []
    for e in range(ensembles):
        cm = build_crossover_matrices(
            sample_goe(n, rng.stream(seed, rng.PURPOSE_HAMILTONIAN, e, l)) for l in range(n))
        b_diag.append(float(np.mean(np.square(np.diagonal(cm.b)))))
        b_off.append(float(np.mean(np.square(cm.b[iu]))))
        d_off.append(float(np.mean(np.square(cm.d[iu]))))

    def row(name, values, target):
        values = np.asarray(values)
        sem = float(values.std(ddof=1) / np.sqrt(values.size))
        return VarianceRow(name=name, mean=float(values.mean()), sem=sem, target=target)

    variances = (
        row("B diagonal", b_diag, 1.0),
        row("B off-diagonal", b_off, 0.5),
        row("D off-diagonal", d_off, 0.5),
    )

    hams = [sample_goe(slope_n, rng.stream(seed, rng.PURPOSE_GENERIC, 0, l))
            for l in range(slope_n)]
    decs = [decompose(h) for h in hams]
    psi0 = basis_state(slope_n, 0)
    rho0 = np.outer(psi0, psi0)
    times = (0.0025, 0.005, 0.01, 0.02)
    errors = []
    for t in times:
        exact = mixed_state(decs, psi0, t)
        approx = series_density(hams, rho0, t)
        errors.append(float(np.linalg.norm(exact - approx)))
    slope = float(np.polyfit(np.log(times), np.log(errors), 1)[0])
    return ShortTimeReport(n=n, ensembles=ensembles, variances=variances,
                           slope=slope, slope_n=slope_n,
                           slope_times=times, slope_errors=tuple(errors))
