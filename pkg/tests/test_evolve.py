"""Linear propagators, the nonlinear subflow and Strang composition."""

import math

import numpy as np
import pytest

from src.diagnostics.conserved import mass, sobolev_norm
from src.evolve.propagators import (
    Propagator,
    PropagatorKind,
    integrate,
    linear_step,
    nonlinear_substep,
    strang_step,
)
from src.fieldcore.fields import SimState, SpectralField, inverse_a

from tests.helpers import make_state


def _random_state(grid, rng):
    x = grid.x
    u = SpectralField(grid, (rng.standard_normal(grid.num_points) + 1j * rng.standard_normal(grid.num_points))
                      * np.exp(-(x / 8.0) ** 2))
    n0 = SpectralField(grid, rng.standard_normal(grid.num_points) * np.exp(-(x / 8.0) ** 2))
    n1 = SpectralField(grid, rng.standard_normal(grid.num_points) * np.exp(-(x / 8.0) ** 2))
    return SimState.from_data(u, n0, n1)


def _gap(a, b):
    return max(
        np.max(np.abs(a.u.values - b.u.values)),
        np.max(np.abs(a.n_plus.values - b.n_plus.values)),
        np.max(np.abs(a.n_minus.values - b.n_minus.values)),
    )


def _l2_gap(a, b):
    return math.sqrt(sum(
        mass(SpectralField(a.grid, fa.values - fb.values)) ** 2
        for fa, fb in ((a.u, b.u), (a.n_plus, b.n_plus), (a.n_minus, b.n_minus))
    ))


# ─── Linear flow ──────────────────────────────────────────────────────────────

@pytest.mark.parametrize("kind", list(PropagatorKind))
def test_propagator_has_unit_modulus(grid, kind):
    factor = Propagator(kind, 0.37).factor(grid)
    assert np.max(np.abs(np.abs(factor) - 1.0)) < 1e-15


def test_linear_step_zero_dt_is_identity(state):
    assert linear_step(state, 0.0) is state


def test_linear_step_rejects_non_finite_dt(state):
    with pytest.raises(ValueError):
        linear_step(state, math.nan)


def test_plane_wave_phase(grid):
    k0 = 2 * math.pi * 4 / grid.domain_length
    t = 0.8
    u = SpectralField.from_function(grid, lambda x: np.exp(1j * k0 * x))
    zero = SpectralField.zeros(grid)
    out = linear_step(SimState(u, zero, zero), t)
    assert np.allclose(out.u.values, np.exp(-1j * k0 ** 2 * t) * u.values, atol=1e-12)
    assert out.time == pytest.approx(t)


def test_half_wave_rotation(grid):
    k0 = 2 * math.pi * 2 / grid.domain_length
    t = 0.5
    wave = SpectralField.from_function(grid, lambda x: np.exp(1j * k0 * x))
    zero = SpectralField.zeros(grid)
    out = linear_step(SimState(zero, wave, wave), t)
    bracket = math.sqrt(1 + k0 ** 2)
    assert np.allclose(out.n_plus.values, np.exp(1j * bracket * t) * wave.values, atol=1e-12)
    assert np.allclose(out.n_minus.values, np.exp(-1j * bracket * t) * wave.values, atol=1e-12)


def test_linear_group_property_and_isometry(grid, rng):
    for _ in range(10):
        state = _random_state(grid, rng)
        dt = rng.uniform(-2.0, 2.0)
        back = linear_step(linear_step(state, dt), -dt)
        assert _gap(back, state) < 1e-12
        moved = linear_step(state, dt)
        for s in (-0.5, 0.0, 0.5, 1.0):
            assert sobolev_norm(moved.u, s) == pytest.approx(sobolev_norm(state.u, s), rel=1e-12)
            assert sobolev_norm(moved.n_plus, s) == pytest.approx(sobolev_norm(state.n_plus, s), rel=1e-12)


# ─── Nonlinear subflow ────────────────────────────────────────────────────────

def test_nonlinear_substep_with_zero_u(grid):
    state = make_state(grid, u_amp=0.0)
    out = nonlinear_substep(state, 0.1, 1.5)
    assert out.u.max_abs == 0.0
    assert np.array_equal(out.n_plus.values, state.n_plus.values)


def test_nonlinear_substep_with_zero_n_only_kicks_the_wave(grid):
    state = make_state(grid, n_amp=0.0)
    dt = 0.05
    out = nonlinear_substep(state, dt, 1.0)
    assert np.allclose(out.u.values, state.u.values, atol=1e-15)
    kick = inverse_a(SpectralField(grid, np.abs(state.u.values) ** 2)).values
    assert np.allclose(out.n_plus.values, -0.5j * dt * kick, atol=1e-15)
    assert np.allclose(out.n_minus.values, 0.5j * dt * kick, atol=1e-15)


@pytest.mark.parametrize("m", [1.0, 1.5, 1.75])
def test_nonlinear_substep_invariants(grid, rng, m):
    state = _random_state(grid, rng)
    dt = 0.03
    out = nonlinear_substep(state, dt, m)
    assert np.allclose(np.abs(out.u.values), np.abs(state.u.values), atol=1e-13)
    n_before, nt_before = state.meson()
    n_after, nt_after = out.meson()
    assert np.allclose(n_after.values, n_before.values, atol=1e-12)
    density = SpectralField(grid, (np.abs(state.u.values) ** 2) ** m)
    assert np.allclose(nt_after.values - nt_before.values, dt * density.values, atol=1e-12)


def test_nonlinear_substep_rejects_small_m(state):
    with pytest.raises(ValueError):
        nonlinear_substep(state, 0.1, 0.5)


# ─── Strang ───────────────────────────────────────────────────────────────────

def test_strang_without_coupling_is_linear(grid, rng):
    state = _random_state(grid, rng)
    out = strang_step(state, 0.01, 1.0, coupling=0.0, dealias=False)
    assert _gap(out, linear_step(state, 0.01)) < 1e-12


def test_strang_time_reversal(state):
    dt = 1e-2
    forward = strang_step(state, dt, 1.0, dealias=False)
    back = strang_step(forward, -dt, 1.0, dealias=False)
    assert _gap(back, state) < 1e-10


def test_strang_conserves_mass(state):
    out = integrate(state, 1.0, 1e-2, 1.0)
    assert mass(out.u) == pytest.approx(mass(state.u), rel=1e-12)


def test_integrate_lands_on_final_time(state):
    out = integrate(state, 0.35, 0.1, 1.0)
    assert out.time == 0.35


def test_integrate_rejects_nonpositive_dt(state):
    with pytest.raises(ValueError):
        integrate(state, 1.0, 0.0, 1.0)


def test_strang_is_second_order(state):
    """Self-convergence: halving dt divides the successive differences by about 4."""
    runs = [integrate(state, 1.0, dt, 1.0, dealias=False) for dt in (4e-3, 2e-3, 1e-3)]
    ratio = _l2_gap(runs[0], runs[1]) / _l2_gap(runs[1], runs[2])
    assert 3.5 <= ratio <= 4.5
