import numpy as np
import pytest

from rmtmix import ensembles, evolution, rng, short_time


def _goe_ensemble(n, m=None, seed=7):
    m = n if m is None else m
    return [ensembles.sample_goe(n, rng.stream(seed, rng.PURPOSE_HAMILTONIAN, 0, k))
            for k in range(m)]


def _projector(n, k=0):
    rho = np.zeros((n, n))
    rho[k, k] = 1.0
    return rho


def test_series_terms_are_hermitian_and_traceless():
    n = 10
    h = ensembles.sample_goe(n, rng.stream(1, rng.PURPOSE_GENERIC))
    terms = short_time.series_terms(h, _projector(n))
    for sig in (terms.sigma1, terms.sigma2, terms.sigma3):
        assert np.allclose(sig, sig.conj().T, atol=1e-12)
        assert abs(np.trace(sig)) < 1e-12
    assert np.trace(terms.sigma0) == pytest.approx(1.0)


def test_series_terms_reject_non_projector():
    n = 6
    h = ensembles.sample_goe(n, rng.stream(1, rng.PURPOSE_GENERIC))
    with pytest.raises(ValueError):
        short_time.series_terms(h, np.eye(n) / n)
    with pytest.raises(ValueError):
        short_time.series_terms(h, np.zeros((n, n + 1)))


def test_series_matches_exact_evolution_at_small_t():
    n = 8
    hams = _goe_ensemble(n)
    rho0 = _projector(n)
    psi0 = ensembles.basis_state(n)
    decs = [evolution.decompose(h) for h in hams]
    t = 0.004
    exact = evolution.mixed_state(decs, psi0, t)
    series = short_time.series_density(hams, rho0, t)
    assert np.max(np.abs(series - exact)) < 50 * t ** 4


def test_series_error_scales_as_fourth_power():
    n = 32
    hams = _goe_ensemble(n)
    rho0 = _projector(n)
    psi0 = ensembles.basis_state(n)
    decs = [evolution.decompose(h) for h in hams]

    def err(t):
        exact = evolution.mixed_state(decs, psi0, t)
        series = short_time.series_density(hams, rho0, t)
        return np.linalg.norm(series - exact)

    # truncating after t^3 leaves a residual of order t^4: halving t
    # divides the error by 2^4 = 16
    ratios = [err(2 * t) / err(t) for t in (0.0025, 0.005, 0.01)]
    for ratio in ratios:
        assert 13.0 < ratio < 19.0


def test_bulk_identity_series_equals_sigma_plus_diagonal():
    # the averaged series state restricted to rows/columns >= 1 equals
    # sigma(t) plus the uniform diagonal t^2/2, exactly
    n = 24
    hams = _goe_ensemble(n)
    rho0 = _projector(n)
    t = 0.013
    bulk = short_time.series_density(hams, rho0, t)[1:, 1:]
    cm = short_time.build_crossover_matrices(hams)
    resid = bulk - short_time.sigma_bulk(cm, t, n)
    off = resid - np.diag(np.diag(resid))
    assert np.max(np.abs(off)) < 1e-15
    assert np.allclose(np.diag(resid), t * t / 2.0, atol=1e-15)


def test_crossover_matrix_structure():
    n = 16
    cm = short_time.build_crossover_matrices(_goe_ensemble(n))
    assert cm.bulk_dimension == n - 1
    assert np.allclose(cm.b, cm.b.conj().T, atol=1e-12)
    assert np.allclose(cm.d, -cm.d.conj().T, atol=1e-12)  # D enters as i t D, antisymmetric


def test_crossover_matrices_accept_iterators_and_reject_empty():
    n = 8
    gen = (h for h in _goe_ensemble(n))
    cm = short_time.build_crossover_matrices(gen)
    assert cm.bulk_dimension == n - 1
    with pytest.raises(ValueError):
        short_time.build_crossover_matrices(iter([]))
    bad = _goe_ensemble(n)
    bad[3] = np.zeros((n + 1, n + 1))
    with pytest.raises(ValueError):
        short_time.build_crossover_matrices(bad)


def test_variance_calibration_of_b_and_d():
    # entry variances approach <B_nn^2> = 1, <B_nm^2> = <D_nm^2> = 1/2
    n, reps = 48, 60
    bd_diag, bd_off, dd_off = [], [], []
    for r in range(reps):
        hams = [ensembles.sample_goe(n, rng.stream(11, rng.PURPOSE_HAMILTONIAN, r, k))
                for k in range(n)]
        cm = short_time.build_crossover_matrices(hams)
        iu = np.triu_indices(n - 1, k=1)
        bd_diag.append(np.mean(np.abs(np.diag(cm.b)) ** 2))
        bd_off.append(np.mean(np.abs(cm.b[iu]) ** 2))
        dd_off.append(np.mean(np.abs(cm.d[iu]) ** 2))
    for sample, target in [(bd_diag, 1.0), (bd_off, 0.5), (dd_off, 0.5)]:
        sample = np.array(sample)
        se = sample.std(ddof=1) / np.sqrt(reps)
        assert abs(sample.mean() - target) < 5 * se, (sample.mean(), target, se)


def test_sigma_bulk_dimension_check_and_scale():
    n = 12
    cm = short_time.build_crossover_matrices(_goe_ensemble(n))
    with pytest.raises(ValueError):
        short_time.sigma_bulk(cm, 0.1, n + 1)
    t = 0.02
    sig = short_time.sigma_bulk(cm, t, n)
    expected = (t * t / np.sqrt(2 * n)) * (cm.b + 1j * (t * np.sqrt(n) / 2) * cm.d)
    assert np.array_equal(sig, expected)


def test_crossover_time():
    assert short_time.crossover_time(256) == pytest.approx(2.0 / 256)
    with pytest.raises(ValueError):
        short_time.crossover_time(1)


def test_report_smoke():
    report = short_time.short_time_report(n=32, ensembles=30, seed=3, slope_n=16)
    assert len(report.variances) == 3
    assert [row.target for row in report.variances] == [1.0, 0.5, 0.5]
    for row in report.variances:
        assert row.sem > 0
        assert np.isfinite(row.deviation_se)
    assert 2.5 < report.slope < 5.5
    assert len(report.slope_errors) == len(report.slope_times)
