"""Long-run conservation and convergence checks on the default resolution."""

import numpy as np
import pytest

from src.diagnostics.conserved import state_diagnostics
from src.evolve.propagators import integrate
from src.fieldcore.grid import Grid
from src.harness.run_config import RunConfig
from src.harness.runner import run_global
from tests.helpers import make_state

pytestmark = pytest.mark.slow

GRID = Grid.create(256, 50.0)


def _drifts(dt, m=1.0, T=10.0):
    state = make_state(GRID, n1_amp=0.2)
    start = state_diagnostics(state, m)
    mass_drift, energy_drift = 0.0, 0.0
    for _ in range(int(round(T))):
        state = integrate(state, 1.0, dt, m)
        diag = state_diagnostics(state, m)
        mass_drift = max(mass_drift, abs(diag.mass - start.mass) / start.mass)
        energy_drift = max(energy_drift, abs(diag.energy - start.energy) / abs(start.energy))
    return mass_drift, energy_drift


def test_mass_and_energy_are_conserved():
    mass_drift, energy_drift = _drifts(1e-3)
    assert mass_drift <= 1e-10
    assert energy_drift <= 1e-4


def test_energy_drift_is_second_order():
    _, coarse = _drifts(1e-3)
    _, fine = _drifts(5e-4)
    assert 3.0 <= coarse / fine <= 5.0


@pytest.mark.parametrize("m", [1.0, 1.5])
def test_self_convergence_is_second_order(m):
    state = make_state(GRID)
    runs = [integrate(state, 1.0, dt, m) for dt in (4e-3, 2e-3, 1e-3)]
    diffs = [
        np.max(np.abs(a.u.values - b.u.values)) + np.max(np.abs(a.n_plus.values - b.n_plus.values))
        for a, b in zip(runs, runs[1:])
    ]
    assert 3.5 <= diffs[0] / diffs[1] <= 4.5


def test_global_run_stays_within_the_growth_bound(tmp_path):
    cfg = RunConfig.load(num_points=256, domain_length=50.0, T=10.0, dt=1e-3, out=str(tmp_path))
    history = run_global(cfg)
    assert history.completed
    report = history.growth_report()
    assert report.consistent
    assert report.selected_c_front is not None
    assert report.selected_c_front <= 4.0
