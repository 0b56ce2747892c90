"""Space-time fields, the ψ_δ window and discrete X^{s,b} norms."""

import math

import numpy as np
import pytest

from src.fieldcore.fields import SpectralField
from src.fieldcore.grid import Grid
from src.fieldcore.symbols import DispersionSymbol
from src.xsb.estimates import default_profile, homogeneous_estimate_check
from src.xsb.norms import (
    SpaceTimeField,
    bump_window,
    free_wave_field,
    lp_hs_norm,
    lq_lr_norm,
    xsb_norm,
)

GRID = Grid.create(32, 2 * math.pi * 4)


def _random_field(rng, num_times=32, span=(-1.0, 1.0)):
    shape = (num_times, GRID.num_points)
    values = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return SpaceTimeField(GRID, span, values)


# ─── ψ_δ ──────────────────────────────────────────────────────────────────────

def test_bump_window_profile():
    delta = 0.25
    t = np.linspace(-1.0, 1.0, 801)
    psi = bump_window(delta, t)
    assert np.all((psi >= 0) & (psi <= 1))
    assert np.all(psi[np.abs(t) <= delta] == 1.0)
    assert np.all(psi[np.abs(t) >= 2 * delta] == 0.0)
    assert np.allclose(psi, psi[::-1], atol=1e-12)
    assert bump_window(delta, np.array([0.0]))[0] == 1.0


def test_bump_window_rejects_bad_delta():
    with pytest.raises(ValueError):
        bump_window(1.5, np.zeros(3))
    with pytest.raises(ValueError):
        bump_window(0.0, np.zeros(3))


# ─── SpaceTimeField ───────────────────────────────────────────────────────────

def test_space_time_field_validation(rng):
    with pytest.raises(ValueError, match="num_times"):
        SpaceTimeField(GRID, (0.0, 1.0), np.zeros((8, GRID.num_points)))
    with pytest.raises(ValueError, match="shape"):
        SpaceTimeField(GRID, (0.0, 1.0), np.zeros((16, GRID.num_points + 1)))
    with pytest.raises(ValueError, match="t_span"):
        SpaceTimeField(GRID, (1.0, 1.0), np.zeros((16, GRID.num_points)))


def test_space_time_field_lattice():
    f = SpaceTimeField.from_function(GRID, (0.0, 2.0), 16, lambda x, t: x + 0 * t)
    assert f.dt == pytest.approx(0.125)
    assert f.times[-1] == pytest.approx(2.0 - 0.125)
    assert f.tau[1] == pytest.approx(2 * math.pi / 2.0)
    assert np.allclose(f.slice(3).values, GRID.x)


# ─── Norms ────────────────────────────────────────────────────────────────────

def test_xsb_rejects_b_outside_range(rng):
    f = _random_field(rng)
    with pytest.raises(ValueError):
        xsb_norm(f, 0.0, 1.0, "schrodinger")


@pytest.mark.parametrize("s", [-0.5, 0.0, 0.5])
def test_xsb_with_b_zero_is_l2_hs(rng, s):
    for _ in range(50):
        f = _random_field(rng)
        assert xsb_norm(f, s, 0.0, DispersionSymbol.SCHRODINGER) == pytest.approx(lp_hs_norm(f, 2, s), rel=1e-12)


def test_xsb_zero_indices_is_space_time_l2(rng):
    f = _random_field(rng)
    direct = math.sqrt(GRID.dx * f.dt * np.sum(np.abs(f.values) ** 2))
    assert xsb_norm(f, 0.0, 0.0, "plus") == pytest.approx(direct, rel=1e-12)
    assert lq_lr_norm(f, 2, 2) == pytest.approx(direct, rel=1e-12)


def test_xsb_b_zero_ignores_the_symbol(rng):
    f = _random_field(rng)
    values = {xsb_norm(f, 0.5, 0.0, symbol) for symbol in DispersionSymbol}
    assert max(values) == pytest.approx(min(values), rel=1e-14)


def test_xsb_monotone_in_s_and_b(rng):
    f = _random_field(rng)
    assert xsb_norm(f, 0.0, 0.3, "minus") <= xsb_norm(f, 0.5, 0.3, "minus")
    assert xsb_norm(f, 0.5, 0.1, "minus") <= xsb_norm(f, 0.5, 0.4, "minus")
    assert xsb_norm(f, 0.5, -0.4, "minus") <= xsb_norm(f, 0.5, 0.0, "minus")


def test_free_wave_norm_matches_one_dimensional_transform():
    s, b, delta = 0.5, 0.3, 0.5
    k0 = 2 * math.pi * 3 / GRID.domain_length
    symbol = DispersionSymbol.PLUS
    profile = SpectralField.from_function(GRID, lambda x: np.exp(1j * k0 * x))
    wave = free_wave_field(profile, symbol, (-2.5 * delta, 2.5 * delta), 64, delta=delta)

    phi = float(symbol.phi(k0))
    psi = bump_window(delta, wave.times) * np.exp(1j * phi * wave.times)
    coeffs = np.fft.fft(psi, norm="forward")
    weights = (1 + (wave.tau - phi) ** 2) ** b
    expected = math.sqrt(
        GRID.domain_length * wave.span * (1 + k0 ** 2) ** s * np.sum(weights * np.abs(coeffs) ** 2)
    )
    assert xsb_norm(wave, s, b, symbol) == pytest.approx(expected, rel=1e-10)


def test_free_wave_field_requires_valid_window():
    profile = default_profile(GRID)
    with pytest.raises(ValueError):
        free_wave_field(profile, "schrodinger", (-1.0, 1.0), 16, delta=2.0)


def test_lq_lr_norm_with_infinite_exponents(rng):
    f = _random_field(rng)
    assert lq_lr_norm(f, math.inf, math.inf) == pytest.approx(np.max(np.abs(f.values)))


def test_non_finite_space_time_field_is_reported():
    values = np.zeros((16, GRID.num_points), dtype=complex)
    values[2, 5] = np.inf
    f = SpaceTimeField(GRID, (0.0, 1.0), values)
    with pytest.raises(ValueError, match=r"t=2, x=5"):
        xsb_norm(f, 0.0, 0.0, "plus")


# ─── δ-scaling of the windowed free wave ──────────────────────────────────────

def test_homogeneous_slope_at_b_zero_is_exact():
    report = homogeneous_estimate_check(0.0, deltas=(1.0, 0.5, 0.25, 0.125))
    assert report.slope == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("b", [0.0, 0.25, 0.45])
@pytest.mark.parametrize("symbol", ["schrodinger", "plus"])
def test_homogeneous_slope_tracks_half_minus_b(b, symbol):
    report = homogeneous_estimate_check(b, symbol=symbol)
    assert report.slope_error <= 0.1
    frame = report.to_frame()
    assert list(frame["delta"]) == report.deltas
    assert (frame["expected_slope"] == 0.5 - b).all()


def test_large_time_exponent_does_not_overflow(rng):
    f = SpaceTimeField(GRID, (-1.0, 1.0), 1e3 * _random_field(rng).values)
    value = lp_hs_norm(f, 1000, 0.5)
    assert math.isfinite(value)
    assert value == pytest.approx(lp_hs_norm(f, math.inf, 0.5), rel=0.05)
