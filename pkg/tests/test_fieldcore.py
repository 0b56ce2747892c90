"""Grid, spectral fields, multipliers and the n <-> n± change of variables."""

import math

import numpy as np
import pytest

from src.fieldcore.fields import (
    NonFiniteFieldError,
    SimState,
    SpectralField,
    dealias,
    decompose_n,
    derivative,
    inverse_a,
    reconstruct_n,
    sobolev_multiplier,
)
from src.fieldcore.grid import Grid
from src.fieldcore.symbols import DispersionSymbol


def _random_field(grid, rng, real=False):
    values = rng.standard_normal(grid.num_points)
    if not real:
        values = values + 1j * rng.standard_normal(grid.num_points)
    return SpectralField(grid, values)


# ─── Grid ─────────────────────────────────────────────────────────────────────

@pytest.mark.parametrize("n", [7, 6, 9, 0])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ValueError):
        Grid.create(n, 10.0)


def test_grid_rejects_nonpositive_length():
    with pytest.raises(ValueError):
        Grid.create(16, 0.0)
    with pytest.raises(ValueError):
        Grid.create(16, math.inf)


def test_grid_nodes_and_wavenumbers(grid):
    assert grid.x[0] == pytest.approx(-grid.domain_length / 2)
    assert np.allclose(np.diff(grid.x), grid.dx)
    assert grid.k[0] == 0.0
    assert grid.k[1] == pytest.approx(2 * math.pi / grid.domain_length)
    assert grid.mode_index[grid.nyquist_index] == -grid.num_points // 2


def test_grid_arrays_are_cached_and_read_only(grid):
    assert grid.k is Grid.create(grid.num_points, grid.domain_length).k
    with pytest.raises(ValueError):
        grid.k[0] = 1.0


def test_dealias_mask_keeps_lower_two_thirds():
    grid = Grid.create(12, 2 * math.pi)
    kept = sorted(int(j) for j in grid.mode_index[grid.dealias_mask])
    assert kept == [-3, -2, -1, 0, 1, 2, 3]


# ─── SpectralField ────────────────────────────────────────────────────────────

def test_shape_mismatch_rejected(grid):
    with pytest.raises(ValueError):
        SpectralField(grid, np.zeros(grid.num_points + 2))


def test_round_trip_and_plancherel(grid, rng):
    for _ in range(100):
        f = _random_field(grid, rng)
        back = SpectralField.from_spectrum(grid, f.spectrum)
        assert np.allclose(back.values, f.values, atol=1e-12)
        physical = grid.dx * np.sum(np.abs(f.values) ** 2)
        spectral = grid.domain_length * np.sum(np.abs(f.spectrum) ** 2)
        assert physical == pytest.approx(spectral, rel=1e-12)


def test_fields_are_immutable(grid, rng):
    f = _random_field(grid, rng)
    with pytest.raises(ValueError):
        f.values[0] = 0.0


def test_sobolev_multiplier_zero_is_identity(grid, rng):
    f = _random_field(grid, rng)
    assert sobolev_multiplier(f, 0) is f


def test_sobolev_multiplier_on_plane_wave(grid):
    k0 = 2 * math.pi * 3 / grid.domain_length
    f = SpectralField.from_function(grid, lambda x: np.exp(1j * k0 * x))
    g = sobolev_multiplier(f, 1.0)
    assert np.allclose(g.values, math.sqrt(1 + k0 ** 2) * f.values, atol=1e-12)


def test_sobolev_multiplier_inverse_pair(grid, rng):
    for s in (-1.0, -0.5, 0.5, 2.0):
        f = _random_field(grid, rng)
        back = sobolev_multiplier(sobolev_multiplier(f, s), -s)
        assert np.allclose(back.values, f.values, atol=1e-12)


def test_multiplier_keeps_real_fields_real(grid, rng):
    f = _random_field(grid, rng, real=True)
    assert np.max(np.abs(inverse_a(f).values.imag)) < 1e-13
    assert np.max(np.abs(derivative(f).values.imag)) < 1e-12


def test_derivative_of_sine(grid):
    k0 = 2 * math.pi * 2 / grid.domain_length
    f = SpectralField.from_function(grid, lambda x: np.sin(k0 * x))
    assert np.allclose(derivative(f).values, k0 * np.cos(k0 * grid.x), atol=1e-12)


def test_non_finite_input_reports_index(grid):
    values = np.ones(grid.num_points, dtype=complex)
    values[3] = np.nan
    with pytest.raises(NonFiniteFieldError, match="index 3"):
        sobolev_multiplier(SpectralField(grid, values), 1.0)


def test_dealias_removes_high_modes(grid):
    j = grid.num_points // 2 - 1
    k_high = 2 * math.pi * j / grid.domain_length
    f = SpectralField.from_function(grid, lambda x: np.exp(1j * k_high * x) + 1.0)
    assert np.allclose(dealias(f).values, 1.0, atol=1e-12)


# ─── n <-> n± ─────────────────────────────────────────────────────────────────

def test_decompose_zero_data(grid):
    zero = SpectralField.zeros(grid)
    plus, minus = decompose_n(zero, zero)
    assert plus.max_abs == 0.0 and minus.max_abs == 0.0


def test_decompose_static_data_halves_n0(grid):
    n0 = SpectralField.from_function(grid, lambda x: np.cos(2 * math.pi * x / grid.domain_length))
    plus, minus = decompose_n(n0, SpectralField.zeros(grid))
    assert np.allclose(plus.values, 0.5 * n0.values, atol=1e-14)
    assert np.allclose(minus.values, 0.5 * n0.values, atol=1e-14)


def test_decompose_reconstruct_inverse(grid, rng):
    for _ in range(20):
        n0 = _random_field(grid, rng, real=True)
        n1 = _random_field(grid, rng, real=True)
        plus, minus = decompose_n(n0, n1)
        assert np.allclose(minus.values, np.conj(plus.values), atol=1e-12)
        n, n_t = reconstruct_n(plus, minus)
        assert np.allclose(n.values, n0.values, atol=1e-12)
        assert np.allclose(n_t.values, n1.values, atol=1e-12)


def test_decompose_rejects_complex_meson(grid):
    n0 = SpectralField.from_function(grid, lambda x: np.exp(1j * x))
    with pytest.raises(ValueError, match="real-valued"):
        decompose_n(n0, SpectralField.zeros(grid))


def test_reconstruct_rejects_grid_mismatch(grid):
    other = Grid.create(grid.num_points, grid.domain_length * 2)
    with pytest.raises(ValueError, match="grid mismatch"):
        reconstruct_n(SpectralField.zeros(grid), SpectralField.zeros(other))


def test_sim_state_reality_defect(state):
    assert state.reality_defect() < 1e-12
    n, n_t = state.meson()
    assert n.imag_defect() < 1e-12


def test_sim_state_rejects_mixed_grids(grid):
    other = Grid.create(grid.num_points + 2, grid.domain_length)
    with pytest.raises(ValueError):
        SimState(SpectralField.zeros(grid), SpectralField.zeros(grid), SpectralField.zeros(other))


# ─── Symbols ──────────────────────────────────────────────────────────────────

def test_dispersion_symbols():
    k = np.array([0.0, 1.0, 2.0])
    assert np.allclose(DispersionSymbol.SCHRODINGER.phi(k), [0.0, -1.0, -4.0])
    assert np.allclose(DispersionSymbol.PLUS.phi(k), np.sqrt(1 + k ** 2))
    assert np.allclose(DispersionSymbol.MINUS.phi(k), -np.sqrt(1 + k ** 2))
