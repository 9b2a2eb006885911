"""Tests for spectral statistics: truncation, gap ratios, unfolding, references."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from rmtmix import ensembles, evolution, rng, spectra
from rmtmix.errors import UnfoldingError


def _goe_levels(n: int, seed: int = 7) -> np.ndarray:
    gen = rng.stream(seed, rng.PURPOSE_HAMILTONIAN, 0, 0)
    h = ensembles.sample_goe(n, gen)
    return np.linalg.eigvalsh(h)


# ---------------------------------------------------------------------------
# truncate_spectrum


def test_truncate_keeps_dominant_weight():
    vals = np.array([0.5, 0.5, 1e-20])
    kept = spectra.truncate_spectrum(vals)
    assert kept.size == 2
    assert np.allclose(np.sort(kept), [0.5, 0.5])


def test_truncate_returns_ascending():
    vals = np.array([0.3, 0.1, 0.6])
    kept = spectra.truncate_spectrum(vals, tolerance=0.0)
    assert np.array_equal(kept, np.array([0.1, 0.3, 0.6]))


def test_truncate_rejects_empty_and_nonpositive():
    with pytest.raises(ValueError):
        spectra.truncate_spectrum(np.array([]))
    with pytest.raises(ValueError):
        spectra.truncate_spectrum(np.array([0.0, 0.0]))


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(min_value=1e-12, max_value=1.0), min_size=1, max_size=40),
    st.floats(min_value=1e-12, max_value=0.5),
)
def test_truncate_weight_property(values, tol):
    vals = np.asarray(values)
    kept = spectra.truncate_spectrum(vals, tolerance=tol)
    assert kept.size >= 1
    assert kept.sum() >= (1.0 - tol) * vals.sum() - 1e-15
    # kept levels are the largest ones
    assert kept.min() >= np.sort(vals)[::-1][kept.size - 1] - 1e-15


# ---------------------------------------------------------------------------
# central_bulk


def test_central_bulk_even_drop():
    vals = np.arange(10.0)
    out = spectra.central_bulk(vals, fraction=0.6)
    assert np.array_equal(out, np.arange(2.0, 8.0))


def test_central_bulk_odd_drop_favors_upper_cut():
    vals = np.arange(9.0)
    out = spectra.central_bulk(vals, fraction=0.6)
    # keep ceil(5.4) = 6, drop 3: two from the bottom, one from the top
    assert np.array_equal(out, np.arange(2.0, 8.0))


def test_central_bulk_full_fraction_is_identity():
    vals = np.arange(5.0)
    assert np.array_equal(spectra.central_bulk(vals, fraction=1.0), vals)


def test_central_bulk_rejects_bad_fraction():
    for frac in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            spectra.central_bulk(np.arange(4.0), fraction=frac)


# ---------------------------------------------------------------------------
# gap ratios


def test_r_tilde_hand_example():
    levels = np.array([0.0, 1.0, 3.0, 4.0])
    values, excluded = spectra.r_tilde_values(levels)
    assert excluded == 0
    assert np.allclose(values, [0.5, 0.5])


def test_r_tilde_excludes_zero_gaps():
    levels = np.array([0.0, 0.0, 1.0, 2.0])
    values, excluded = spectra.r_tilde_values(levels)
    assert excluded == 1
    assert np.allclose(values, [1.0])


def test_r_tilde_requires_sorted_input():
    with pytest.raises(ValueError, match="ascending"):
        spectra.r_tilde_values(np.array([1.0, 0.0, 2.0]))


def test_r_tilde_requires_three_levels():
    with pytest.raises(ValueError):
        spectra.r_tilde_values(np.array([0.0, 1.0]))


def test_mean_r_tilde_poisson_limit():
    # iid exponential gaps: consecutive-gap ratio mean is 2 ln 2 - 1 exactly
    gen = np.random.default_rng(11)
    levels = np.cumsum(gen.exponential(size=1_000_000))
    mean, used, skipped = spectra.mean_r_tilde(levels)
    assert skipped == 0
    assert used == levels.size - 2
    assert abs(mean - spectra.R_TILDE_POISSON) < 2e-3


@settings(max_examples=40, deadline=None)
@given(
    st.floats(min_value=1e-3, max_value=1e3),
    st.floats(min_value=-50.0, max_value=50.0),
)
def test_r_tilde_affine_invariance(scale, shift):
    levels = np.sort(_goe_levels(24))
    base, _ = spectra.r_tilde_values(levels)
    moved, _ = spectra.r_tilde_values(scale * levels + shift)
    assert np.allclose(moved, base, rtol=1e-9, atol=1e-12)


# ---------------------------------------------------------------------------
# unfolding


def test_unfold_unit_mean_spacing():
    levels = np.sort(_goe_levels(400))
    central = spectra.central_bulk(levels, fraction=0.6)
    result = spectra.unfold(central)
    gaps = spectra.spacings(result.unfolded)
    assert abs(gaps.mean() - 1.0) < 0.02
    assert result.condition < 1e12
    assert np.all(np.diff(result.unfolded) >= 0)


def test_unfold_rejects_too_few_levels():
    with pytest.raises(UnfoldingError):
        spectra.unfold(np.arange(5.0), degree=7)


def test_unfold_rejects_degenerate_span():
    with pytest.raises(UnfoldingError):
        spectra.unfold(np.full(20, 1.0))


def test_spacings_requires_two_levels():
    with pytest.raises(ValueError):
        spectra.spacings(np.array([1.0]))


# ---------------------------------------------------------------------------
# number variance


def test_number_variance_zero_on_integer_lattice():
    # windows of length 4 starting on integers always hold exactly 4 levels
    unfolded = np.arange(100.0)
    rows = spectra.number_variance(unfolded, lengths=[4.0])
    ell, sigma2, nw = rows[0]
    assert ell == 4.0
    assert nw > 0
    assert sigma2 == pytest.approx(0.0, abs=1e-12)


def test_number_variance_poisson_scales_linearly():
    gen = np.random.default_rng(3)
    unfolded = np.cumsum(gen.exponential(size=20_000))
    rows = spectra.number_variance(unfolded, lengths=[5.0])
    _, sigma2, _ = rows[0]
    # Poisson statistics: variance of the window count equals its mean
    assert abs(sigma2 - 5.0) < 1.0


def test_number_variance_rejects_nonpositive_length():
    with pytest.raises(ValueError):
        spectra.number_count_moments(np.arange(30.0), [0.0])


def test_number_variance_reference_frozen_values():
    goe = spectra.number_variance_reference([1.0, 10.0], kind="goe")
    gue = spectra.number_variance_reference([1.0], kind="gue")
    assert goe[0] == pytest.approx(0.4420424755695247, rel=1e-12)
    assert goe[1] == pytest.approx(0.9086437696882431, rel=1e-12)
    assert gue[0] == pytest.approx(0.3460212377847624, rel=1e-12)


def test_number_variance_reference_orders():
    # GUE spectra are stiffer than GOE at every window length
    lengths = np.array([1.0, 2.0, 5.0, 10.0])
    goe = spectra.number_variance_reference(lengths, kind="goe")
    gue = spectra.number_variance_reference(lengths, kind="gue")
    assert np.all(gue < goe)
    assert np.all(np.diff(goe) > 0)


# ---------------------------------------------------------------------------
# reference densities and spacing laws


@pytest.mark.parametrize("kind", ["goe", "gue"])
def test_wigner_surmise_normalized_with_unit_mean(kind):
    total, _ = integrate.quad(lambda s: spectra.wigner_surmise(s, kind=kind), 0, 20)
    mean, _ = integrate.quad(lambda s: s * spectra.wigner_surmise(s, kind=kind), 0, 20)
    assert total == pytest.approx(1.0, abs=1e-9)
    assert mean == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("kind", ["goe", "gue"])
def test_wigner_surmise_cdf_matches_density(kind):
    for s in (0.3, 0.8, 1.7):
        direct, _ = integrate.quad(
            lambda x: spectra.wigner_surmise(x, kind=kind), 0, s
        )
        assert spectra.wigner_surmise_cdf(s, kind=kind) == pytest.approx(
            direct, abs=1e-10
        )
    assert spectra.wigner_surmise_cdf(0.0, kind=kind) == 0.0


def test_poisson_spacing_cdf():
    s = np.array([0.0, 1.0, 3.0])
    assert np.allclose(spectra.poisson_spacing_cdf(s), 1.0 - np.exp(-s))


def test_marchenko_pastur_normalized_unit_mean():
    total, _ = integrate.quad(spectra.marchenko_pastur_density, 0, 4, limit=200)
    mean, _ = integrate.quad(
        lambda x: x * spectra.marchenko_pastur_density(x), 0, 4, limit=200
    )
    assert total == pytest.approx(1.0, abs=1e-8)
    assert mean == pytest.approx(1.0, abs=1e-8)
    assert spectra.marchenko_pastur_density(4.0) == 0.0
    assert spectra.marchenko_pastur_density(-0.5) == 0.0


def test_quarter_circle_matches_transformed_density():
    total, _ = integrate.quad(spectra.quarter_circle_density, 0, 2)
    assert total == pytest.approx(1.0, abs=1e-10)
    y = np.linspace(0.1, 1.9, 13)
    direct = spectra.quarter_circle_density(y)
    via_mp = 2.0 * y * np.array(
        [spectra.marchenko_pastur_density(v) for v in y**2]
    )
    assert np.allclose(direct, via_mp, rtol=1e-12)


def test_semicircle_normalized():
    radius = 3.0
    total, _ = integrate.quad(
        lambda x: spectra.semicircle_density(x, radius), -radius, radius
    )
    assert total == pytest.approx(1.0, abs=1e-10)
    assert spectra.semicircle_density(radius + 0.1, radius) == 0.0


# ---------------------------------------------------------------------------
# crossover curve


def test_crossover_curve_endpoints():
    assert spectra.crossover_r_tilde(0.0) == pytest.approx(
        spectra.R_TILDE_GOE_SURMISE, rel=1e-12
    )
    assert spectra.crossover_r_tilde(1.0) == pytest.approx(
        spectra.R_TILDE_GUE_SURMISE, rel=1e-12
    )
    # saturates beyond full breaking
    assert spectra.crossover_r_tilde(3.0) == spectra.crossover_r_tilde(1.0)


def test_crossover_curve_monotone():
    tau = np.linspace(0.0, 1.0, 101)
    vals = spectra.crossover_r_tilde(tau)
    assert np.all(np.diff(vals) > 0)


def test_crossover_curve_midpoint_frozen():
    mid = 0.5 * (spectra.R_TILDE_GOE_SURMISE + spectra.R_TILDE_GUE_SURMISE)
    assert spectra.crossover_r_tilde(0.28440515) == pytest.approx(mid, abs=5e-8)


def test_crossover_curve_rejects_negative():
    with pytest.raises(ValueError):
        spectra.crossover_r_tilde(-0.1)


def test_crossover_curve_scalar_returns_float():
    out = spectra.crossover_r_tilde(0.5)
    assert isinstance(out, float)


# ---------------------------------------------------------------------------
# eigenvalue bookkeeping helpers


def test_rescale_eigenvalues():
    vals = np.array([0.1, 0.2])
    assert np.allclose(spectra.rescale_eigenvalues(vals, 256), vals * 256)


def test_split_separated_top():
    bulk, top = spectra.split_separated_top(np.array([0.1, 0.2, 0.5]))
    assert top == 0.5
    assert np.allclose(bulk, [0.1, 0.2])


def test_split_separated_top_boundary_not_separated():
    # exactly twice the runner-up does not count as separated
    bulk, top = spectra.split_separated_top(np.array([0.1, 0.2, 0.4]))
    assert top is None
    assert bulk.size == 3


def test_bulk_normalized_unit_mean():
    vals = np.array([1.0, 2.0, 3.0])
    out, top = spectra.bulk_normalized(vals)
    assert top is None
    assert out.mean() == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        spectra.bulk_normalized(np.array([-1.0, 1.0]))


# ---------------------------------------------------------------------------
# chi-squared machinery


def test_histogram_bin_probs_full_partition():
    edges = np.linspace(0.05, 4.0, 41)
    probs = spectra.histogram_bin_probs(edges, spectra.marchenko_pastur_cdf)
    assert probs.size == edges.size + 1
    assert probs.sum() == pytest.approx(1.0, abs=1e-9)
    # mass below the first edge is the CDF there
    assert probs[0] == pytest.approx(float(spectra.marchenko_pastur_cdf(0.05)), abs=1e-12)
    assert np.all(probs >= 0)


def test_chi_squared_uniform_on_exact_model():
    gen = np.random.default_rng(5)
    probs = np.full(8, 0.125)
    counts = gen.multinomial(4000, probs)
    stat, p, dof = spectra.chi_squared_counts(counts, probs)
    assert dof == 7
    assert p > 1e-3


def test_chi_squared_rejects_wrong_model():
    gen = np.random.default_rng(6)
    probs = np.full(8, 0.125)
    skewed = np.linspace(1.0, 3.0, 8)
    skewed /= skewed.sum()
    counts = gen.multinomial(4000, skewed)
    _, p, _ = spectra.chi_squared_counts(counts, probs)
    assert p < 1e-6


def test_chi_squared_merges_small_expected_bins():
    probs = np.array([0.4, 0.001, 0.199, 0.4])
    counts = np.array([400, 1, 199, 400])
    _, _, dof = spectra.chi_squared_counts(counts, probs)
    # the 0.1%-bin folds into a neighbor: 3 effective bins, dof 2
    assert dof == 2


def test_chi_squared_ddof_reduces_dof():
    probs = np.full(6, 1.0 / 6.0)
    counts = np.full(6, 100)
    _, _, dof0 = spectra.chi_squared_counts(counts, probs)
    _, _, dof2 = spectra.chi_squared_counts(counts, probs, ddof=2)
    assert dof0 - dof2 == 2


def test_chi_squared_window_conditions_on_range():
    gen = np.random.default_rng(12)
    edges = np.linspace(0.05, 4.0, 21)
    # draw exactly from MP conditioned on the window, then add out-of-range
    # stragglers; the windowed test must stay calm regardless
    window_mass = float(spectra.marchenko_pastur_cdf(4.0) - spectra.marchenko_pastur_cdf(0.05))
    probs = np.diff(np.vectorize(spectra._mp_cdf_scalar)(edges)) / window_mass
    counts = gen.multinomial(8000, probs)
    _, p, dof = spectra.chi_squared_window(counts, edges, spectra.marchenko_pastur_cdf)
    assert p > 1e-3
    assert dof == 19
    # same counts against a wrong model are rejected
    _, p_bad, _ = spectra.chi_squared_window(
        counts, edges, lambda x: np.clip(np.asarray(x) / 4.0, 0.0, 1.0))
    assert p_bad < 1e-12


def test_chi_squared_window_rejects_empty_window():
    with pytest.raises(ValueError, match="no mass"):
        spectra.chi_squared_window(np.array([1, 2]), np.array([5.0, 6.0, 7.0]),
                                   spectra.marchenko_pastur_cdf)


def test_chi_squared_validates_inputs():
    with pytest.raises(ValueError):
        spectra.chi_squared_counts(np.array([1, 2]), np.array([0.5, 0.3, 0.2]))
    with pytest.raises(ValueError, match="sum"):
        spectra.chi_squared_counts(np.array([1, 2]), np.array([0.3, 0.3]))
    with pytest.raises(ValueError):
        spectra.chi_squared_counts(np.array([1, 2]), np.array([-0.2, 1.2]))


# ---------------------------------------------------------------------------
# behaviour on an evolved mixed state (end-to-end sanity)


def test_mixed_state_spectrum_statistics_pipeline():
    n = 64
    seed = 19
    psi0 = ensembles.basis_state(n, 0)
    decs = []
    for member in range(n):
        gen = rng.stream(seed, rng.PURPOSE_HAMILTONIAN, 0, member)
        decs.append(evolution.decompose(ensembles.sample_goe(n, gen)))
    rho = evolution.mixed_state(decs, psi0, t=10.0 / n)
    vals = evolution.spectrum(rho)
    kept = spectra.truncate_spectrum(vals)
    assert kept.size > 10
    bulk, top = spectra.split_separated_top(kept)
    rescaled = spectra.rescale_eigenvalues(
        bulk if top is None else np.append(bulk, top), n
    )
    assert rescaled.sum() == pytest.approx(n * vals.sum(), rel=1e-9)
    central = spectra.central_bulk(kept, fraction=0.6)
    mean, used, _ = spectra.mean_r_tilde(central)
    assert 0.3 < mean < 0.8
    assert used == central.size - 2
