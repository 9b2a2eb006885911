"""Eigenvalue statistics: truncation, unfolding, gap ratios, densities.

The pipeline for one density-matrix spectrum is: truncate away the
numerically empty tail, keep the central bulk, then compute the gap-ratio
statistic on the raw bulk and spacing/number-variance statistics on the
polynomially unfolded bulk.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special, stats

from .errors import UnfoldingError

# gap-ratio reference points: large-matrix fitted values for the two
# symmetry classes, the uncorrelated-spectrum value, and the 3 x 3
# surmise limits of the crossover curve below
R_TILDE_GOE = 0.5307
R_TILDE_GUE = 0.5996
R_TILDE_POISSON = 2.0 * np.log(2.0) - 1.0
R_TILDE_GOE_SURMISE = 4.0 - 2.0 * np.sqrt(3.0)
R_TILDE_GUE_SURMISE = 2.0 * np.sqrt(3.0) / np.pi - 0.5

EULER_GAMMA = float(np.euler_gamma)


def truncate_spectrum(eigenvalues: np.ndarray, tolerance: float = 1e-12) -> np.ndarray:
    """Drop the numerically empty tail of a density-matrix spectrum.

    Sorts descending and keeps the shortest prefix whose sum reaches
    (1 - tolerance) of the total, so only eigenvalues carrying no weight
    are discarded.  Returns the kept values ascending.
    """
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if eigenvalues.size == 0:
        raise ValueError("empty spectrum")
    total = eigenvalues.sum()
    if total <= 0:
        raise ValueError(f"spectrum sum must be positive, got {total!r}")
    desc = np.sort(eigenvalues)[::-1]
    csum = np.cumsum(desc)
    k = int(np.searchsorted(csum, (1.0 - tolerance) * total)) + 1
    k = min(k, desc.size)
    return desc[:k][::-1].copy()


def central_bulk(values: np.ndarray, fraction: float = 0.6) -> np.ndarray:
    """Keep ceil(fraction * len) contiguous central values of a sorted array.

    When the number to drop is odd, the lower end loses the extra value.
    """
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    values = np.asarray(values)
    keep = int(np.ceil(fraction * values.size))
    drop = values.size - keep
    lo = drop - drop // 2
    return values[lo:lo + keep]


def r_tilde_values(levels: np.ndarray):
    """Gap ratios r~_i = min(r_i, 1/r_i) with r_i = gap_i / gap_{i-1}.

    Pairs involving a zero gap are excluded; returns (values, n_excluded).
    """
    levels = np.asarray(levels, dtype=float)
    if levels.size < 3:
        raise ValueError(f"need at least 3 levels for a gap ratio, got {levels.size}")
    gaps = np.diff(levels)
    if np.any(gaps < 0):
        raise ValueError("levels must be sorted ascending")
    lead, lag = gaps[1:], gaps[:-1]
    ok = (lead > 0) & (lag > 0)
    r = lead[ok] / lag[ok]
    return np.minimum(r, 1.0 / r), int((~ok).sum())


def mean_r_tilde(levels: np.ndarray):
    """Mean gap ratio of one spectrum; returns (mean, n_used, n_excluded)."""
    vals, skipped = r_tilde_values(levels)
    if vals.size == 0:
        raise ValueError("no usable gap ratios (all spacings degenerate)")
    return float(vals.mean()), int(vals.size), skipped


@dataclass(frozen=True)
class UnfoldResult:
    """Unfolded levels plus staircase-fit diagnostics."""

    unfolded: np.ndarray
    residual_rms: float
    condition: float


def unfold(levels: np.ndarray, degree: int = 7) -> UnfoldResult:
    """Map levels through a polynomial fit of the spectral staircase.

    Fits counts (i - 1/2) against the levels with a least-squares
    polynomial on a centered and rescaled abscissa, then evaluates it at
    the levels.  The result has unit mean spacing by construction.
    """
    levels = np.sort(np.asarray(levels, dtype=float))
    if levels.size < degree + 2:
        raise UnfoldingError(f"need at least {degree + 2} levels for degree {degree}, got {levels.size}")
    span = levels[-1] - levels[0]
    if span <= 0:
        raise UnfoldingError("levels are all equal; nothing to unfold")
    u = (levels - levels[0]) / span * 2.0 - 1.0
    design = np.vander(u, degree + 1, increasing=True)
    target = np.arange(levels.size) + 0.5
    coeff, _, rank, sv = np.linalg.lstsq(design, target, rcond=None)
    condition = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if rank < degree + 1 or condition > 1e12:
        raise UnfoldingError(
            f"staircase fit is rank deficient or ill conditioned (cond = {condition:.3g}); "
            "rescale or deduplicate the levels"
        )
    unfolded = design @ coeff
    residual = float(np.sqrt(np.mean((unfolded - target) ** 2)))
    return UnfoldResult(unfolded=np.sort(unfolded), residual_rms=residual, condition=condition)


def spacings(unfolded: np.ndarray) -> np.ndarray:
    """Nearest-neighbor spacings of an unfolded spectrum."""
    unfolded = np.asarray(unfolded, dtype=float)
    if unfolded.size < 2:
        raise ValueError("need at least 2 levels")
    return np.diff(unfolded)


def number_count_moments(unfolded: np.ndarray, lengths):
    """Window count moments for the number variance.

    Windows of each length ell start at the lowest unfolded level and
    advance by ell / 4.  Returns rows (ell, n_windows, sum_n, sum_n_sq);
    lengths longer than a quarter of the span are skipped with a warning.
    """
    unfolded = np.sort(np.asarray(unfolded, dtype=float))
    span = unfolded[-1] - unfolded[0]
    rows = []
    for ell in lengths:
        if ell <= 0:
            raise ValueError(f"window length must be positive, got {ell}")
        if ell > span / 4.0:
            warnings.warn(f"window length {ell} exceeds a quarter of the unfolded span {span:.3g}; skipped",
                          stacklevel=2)
            rows.append((float(ell), 0, 0.0, 0.0))
            continue
        starts = np.arange(unfolded[0], unfolded[-1] - ell, ell / 4.0)
        lo = np.searchsorted(unfolded, starts, side="left")
        hi = np.searchsorted(unfolded, starts + ell, side="left")
        counts = (hi - lo).astype(float)
        rows.append((float(ell), int(counts.size), float(counts.sum()), float(np.square(counts).sum())))
    return rows


def number_variance(unfolded: np.ndarray, lengths):
    """Sigma^2(ell) from overlapping windows of one unfolded spectrum.

    Returns rows (ell, sigma2, n_windows).
    """
    out = []
    for ell, nw, s1, s2 in number_count_moments(unfolded, lengths):
        if nw == 0:
            out.append((ell, np.nan, 0))
            continue
        mean = s1 / nw
        out.append((ell, s2 / nw - mean * mean, nw))
    return out


def number_variance_reference(ell, kind: str):
    """Large-ell logarithmic number variance of the two symmetry classes."""
    ell = np.asarray(ell, dtype=float)
    core = np.log(2.0 * np.pi * ell) + EULER_GAMMA + 1.0
    if kind == "goe":
        return (2.0 / np.pi ** 2) * (core - np.pi ** 2 / 8.0)
    if kind == "gue":
        return core / np.pi ** 2
    raise ValueError(f"unknown kind {kind!r}; expected 'goe' or 'gue'")


def wigner_surmise(s, kind: str):
    """Nearest-neighbor spacing density of the 2 x 2 surmise."""
    s = np.asarray(s, dtype=float)
    if kind == "goe":
        return (np.pi / 2.0) * s * np.exp(-np.pi * s * s / 4.0)
    if kind == "gue":
        return (32.0 / np.pi ** 2) * s * s * np.exp(-4.0 * s * s / np.pi)
    raise ValueError(f"unknown kind {kind!r}; expected 'goe' or 'gue'")


def wigner_surmise_cdf(s, kind: str):
    """Cumulative distribution of the spacing surmise."""
    s = np.asarray(s, dtype=float)
    if kind == "goe":
        return 1.0 - np.exp(-np.pi * s * s / 4.0)
    if kind == "gue":
        return special.erf(2.0 * s / np.sqrt(np.pi)) - (4.0 * s / np.pi) * np.exp(-4.0 * s * s / np.pi)
    raise ValueError(f"unknown kind {kind!r}; expected 'goe' or 'gue'")


def poisson_spacing_cdf(s):
    """Cumulative spacing distribution of an uncorrelated spectrum."""
    return 1.0 - np.exp(-np.asarray(s, dtype=float))


def marchenko_pastur_density(lam):
    """Square-case Marchenko-Pastur density with unit mean, support (0, 4]."""
    lam = np.asarray(lam, dtype=float)
    out = np.zeros_like(lam)
    inside = (lam > 0) & (lam <= 4.0)
    out[inside] = np.sqrt(4.0 / lam[inside] - 1.0) / (2.0 * np.pi)
    return out


@lru_cache(maxsize=None)
def _mp_cdf_scalar(x: float) -> float:
    if x <= 0:
        return 0.0
    if x >= 4.0:
        return 1.0
    val, _ = integrate.quad(lambda t: np.sqrt(4.0 / t - 1.0) / (2.0 * np.pi), 0.0, x, limit=200)
    return float(val)


def marchenko_pastur_cdf(lam):
    """Cumulative Marchenko-Pastur distribution (square case, unit mean)."""
    lam = np.asarray(lam, dtype=float)
    return np.vectorize(_mp_cdf_scalar)(lam)


def quarter_circle_density(y):
    """Density of y = sqrt(lam) when lam is Marchenko-Pastur: (1/pi) sqrt(4 - y^2)."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    inside = (y >= 0) & (y <= 2.0)
    out[inside] = np.sqrt(4.0 - y[inside] ** 2) / np.pi
    return out


def semicircle_density(x, radius: float):
    """Eigenvalue density (2 / pi R^2) sqrt(R^2 - x^2) on [-R, R]."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) <= radius
    out[inside] = 2.0 / (np.pi * radius ** 2) * np.sqrt(radius ** 2 - x[inside] ** 2)
    return out


def crossover_r_tilde(tau):
    """Mean gap ratio of the 3 x 3 symmetric-to-unitary crossover surmise.

    tau = 0 gives 4 - 2 sqrt(3), tau = 1 gives 2 sqrt(3)/pi - 1/2.  The
    expression has a removable singularity at tau = 1 where two terms
    cancel to O(1/(1 - tau)); evaluation clamps tau to [1e-12, 1 - 1e-6],
    which keeps the absolute error below ~1e-9.  Values tau > 1 saturate
    at the tau = 1 limit.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be >= 0")
    t = np.clip(tau, 1e-12, 1.0 - 1e-6)
    t2 = t * t
    one = 1.0 - t2
    val = (
        4.0 * (2.0 + t2) / (np.pi * one) * np.arctan(np.sqrt(3.0) * (1.0 + t2) / (2.0 * t))
        - 4.0 * np.sqrt(3.0) / (np.pi * one ** 1.5) * np.arctan(one ** 1.5 / (t * (3.0 + t2)))
        - (17.0 + 7.0 * t2) / (np.pi * one) * np.arctan(t / np.sqrt(3.0))
        - np.arctan(np.sqrt(3.0) * t) / np.pi
    )
    val = np.where(tau >= 1.0, R_TILDE_GUE_SURMISE, val)
    val = np.where(tau == 0.0, R_TILDE_GOE_SURMISE, val)
    return val if val.ndim else float(val)


def rescale_eigenvalues(eigenvalues: np.ndarray, n: int) -> np.ndarray:
    """Multiply density-matrix eigenvalues by the dimension (unit-mean scale)."""
    return np.asarray(eigenvalues, dtype=float) * n


def split_separated_top(eigenvalues: np.ndarray):
    """Split off the largest eigenvalue when it is separated from the bulk.

    The top value counts as separated when it exceeds twice the runner-up.
    Returns (bulk ascending, separated or None).
    """
    desc = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
    if desc.size >= 2 and desc[0] > 2.0 * desc[1]:
        return desc[1:][::-1].copy(), float(desc[0])
    return desc[::-1].copy(), None


def bulk_normalized(eigenvalues: np.ndarray):
    """Bulk spectrum rescaled to unit mean, with any separated top removed.

    Returns (normalized bulk ascending, separated or None).
    """
    bulk, top = split_separated_top(eigenvalues)
    mean = bulk.mean()
    if mean <= 0:
        raise ValueError("bulk mean must be positive")
    return bulk / mean, top


def chi_squared_counts(observed, expected_probs, ddof: int = 0):
    """Pearson chi^2 of histogram counts against model bin probabilities.

    Bins with expected count below 5 are merged into their left neighbor
    before the test.  Returns (statistic, p_value, dof).
    """
    observed = np.asarray(observed, dtype=float)
    expected_probs = np.asarray(expected_probs, dtype=float)
    if observed.shape != expected_probs.shape:
        raise ValueError("observed and expected shapes differ")
    if np.any(expected_probs < 0):
        raise ValueError("expected probabilities must be >= 0")
    psum = expected_probs.sum()
    if not 0.99 < psum < 1.01:
        raise ValueError(f"expected probabilities sum to {psum:.4g}, not 1")
    total = observed.sum()
    obs, probs = [], []
    for o, p in zip(observed, expected_probs):
        if probs and probs[-1] * total < 5.0:
            obs[-1] += o
            probs[-1] += p
        else:
            obs.append(float(o))
            probs.append(float(p))
    # a trailing thin bin merges leftward too
    while len(obs) > 1 and probs[-1] * total < 5.0:
        obs[-2] += obs[-1]
        probs[-2] += probs[-1]
        obs.pop()
        probs.pop()
    dof = len(obs) - 1 - ddof
    if dof < 1:
        raise ValueError("not enough bins for a chi^2 test after merging")
    obs = np.array(obs)
    expected = np.array(probs) * total
    stat = float(np.sum((obs - expected) ** 2 / expected))
    return stat, float(stats.chi2.sf(stat, dof)), dof


def histogram_bin_probs(edges: np.ndarray, cdf) -> np.ndarray:
    """Model probabilities for the full histogram partition.

    Returns nbins + 2 entries: the mass below the first edge, one entry
    per bin, and the mass above the last edge, so the result pairs with
    counts laid out as [below, bins..., above] and sums to one.
    """
    edges = np.asarray(edges, dtype=float)
    c = np.asarray(cdf(edges), dtype=float)
    probs = np.diff(c)
    return np.concatenate([[max(c[0], 0.0)], probs, [max(1.0 - c[-1], 0.0)]])


def chi_squared_window(counts, edges, cdf, ddof: int = 0):
    """Chi^2 of in-window histogram counts against a model cdf.

    Tests the distribution shape conditioned on the histogram window: the
    model mass is renormalized over [edges[0], edges[-1]], so samples
    outside the window (spectral-edge stragglers the asymptotic laws do
    not describe) neither enter the counts nor distort the comparison.
    Returns (statistic, p_value, dof).
    """
    edges = np.asarray(edges, dtype=float)
    c = np.asarray(cdf(edges), dtype=float)
    window_mass = c[-1] - c[0]
    if window_mass <= 0:
        raise ValueError("model puts no mass on the histogram window")
    return chi_squared_counts(counts, np.diff(c) / window_mass, ddof=ddof)
