"""Tests for the disordered Heisenberg ring sectors."""

import math

import numpy as np
import pytest

from rmtmix import rng, spectra, spin_chain


def _disorder(length: int, strength: float, seed: int = 3) -> spin_chain.DisorderRealization:
    gen = rng.stream(seed, rng.PURPOSE_DISORDER, 0, 0)
    return spin_chain.sample_disorder(length, strength, gen)


def test_basis_enumeration_one_up_l4():
    basis = spin_chain.build_basis(4, 1)
    assert basis.states == (0b0001, 0b0010, 0b0100, 0b1000)
    assert basis.dimension == 4
    assert basis.index[0b0100] == 2


def test_basis_dimension_is_binomial():
    for length, n_up in [(6, 3), (8, 4), (10, 5), (7, 2)]:
        basis = spin_chain.build_basis(length, n_up)
        assert basis.dimension == math.comb(length, n_up)


def test_basis_validation():
    with pytest.raises(ValueError):
        spin_chain.build_basis(1, 0)
    with pytest.raises(ValueError):
        spin_chain.build_basis(4, 5)


def test_disorder_fields_within_open_interval():
    real = _disorder(200, 0.5)
    assert real.fields.shape == (200,)
    assert np.all(np.abs(real.fields) < 0.5)
    zero = _disorder(10, 0.0)
    assert np.all(zero.fields == 0.0)
    with pytest.raises(ValueError):
        spin_chain.sample_disorder(4, -0.1, np.random.default_rng(0))


def test_heisenberg_hermitian_and_magnetization_blocked():
    basis = spin_chain.build_basis(8, 4)
    h = spin_chain.heisenberg(basis, _disorder(8, 0.5))
    assert np.array_equal(h, h.T)
    # row sums of off-diagonal flips: each state has one hop per
    # antiparallel bond, each with amplitude 1/2
    s = basis.states[0]
    bonds = sum(((s >> k) & 1) != ((s >> ((k + 1) % 8)) & 1) for k in range(8))
    assert np.count_nonzero(h[0]) - 1 <= bonds


def test_heisenberg_clean_ground_state_energy_l4():
    # clean 4-site Heisenberg ring at half filling: ground state energy -2
    basis = spin_chain.build_basis(4, 2)
    h = spin_chain.heisenberg(basis, _disorder(4, 0.0))
    vals = np.linalg.eigvalsh(h)
    assert vals[0] == pytest.approx(-2.0, abs=1e-12)


def test_heisenberg_diagonal_example():
    # state 0101 on a 4-ring: all bonds antiparallel, zz sum = -1
    basis = spin_chain.build_basis(4, 2)
    fields = np.array([0.3, -0.2, 0.1, 0.4])
    h = spin_chain.heisenberg(basis, spin_chain.DisorderRealization(fields, 0.5))
    i = basis.index[0b0101]
    field_term = 0.5 * (fields[0] - fields[1] + fields[2] - fields[3])
    assert h[i, i] == pytest.approx(-1.0 + field_term, rel=1e-12)


def test_heisenberg_validates_field_count():
    basis = spin_chain.build_basis(6, 3)
    with pytest.raises(ValueError):
        spin_chain.heisenberg(basis, spin_chain.DisorderRealization(np.zeros(5), 0.1))


def test_one_excitation_matches_generic_builder():
    length = 8
    real = _disorder(length, 0.3)
    direct = spin_chain.one_excitation_hamiltonian(length, real)
    generic = spin_chain.heisenberg(spin_chain.build_basis(length, 1), real)
    assert np.allclose(direct, generic, atol=1e-13)


def test_one_excitation_validates_field_count():
    with pytest.raises(ValueError):
        spin_chain.one_excitation_hamiltonian(6, spin_chain.DisorderRealization(np.zeros(4), 0.1))


def test_one_magnon_dispersion_exact():
    length = 16
    clean = spin_chain.DisorderRealization(np.zeros(length), 0.0)
    h = spin_chain.one_excitation_hamiltonian(length, clean)
    vals = np.linalg.eigvalsh(h)
    expected = spin_chain.one_magnon_dispersion(length)
    assert np.allclose(vals, expected, atol=1e-10)
    # dispersion formula: (L/4 - 1) + cos(2 pi j / L)
    j = np.arange(length)
    assert np.allclose(np.sort((length / 4 - 1) + np.cos(2 * np.pi * j / length)),
                       expected, atol=1e-12)


def test_half_filling_hamiltonian_levels_are_goe_like():
    # h = 0.5 puts the half-filling sector in the correlated regime: the
    # consecutive-gap ratio of the Hamiltonian itself sits near the GOE value
    basis = spin_chain.build_basis(10, 5)
    pooled = []
    for m in range(8):
        gen = rng.stream(77, rng.PURPOSE_DISORDER, m, 0)
        real = spin_chain.sample_disorder(10, 0.5, gen)
        vals = np.linalg.eigvalsh(spin_chain.heisenberg(basis, real))
        central = spectra.central_bulk(np.sort(vals), 0.6)
        values, _ = spectra.r_tilde_values(central)
        pooled.extend(values)
    mean = float(np.mean(pooled))
    assert abs(mean - spectra.R_TILDE_GOE) < 0.03


def test_one_excitation_disorder_breaks_degeneracy():
    length = 64
    real = _disorder(length, 0.1)
    vals = np.linalg.eigvalsh(spin_chain.one_excitation_hamiltonian(length, real))
    gaps = np.diff(np.sort(vals))
    assert np.all(gaps > 0)
