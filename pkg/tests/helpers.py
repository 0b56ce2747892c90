"""Test data builders shared across modules."""

import numpy as np

from src.fieldcore.fields import SimState, SpectralField


def gaussian(x, width, amplitude=1.0, center=0.0):
    return amplitude * np.exp(-((x - center) ** 2) / (2.0 * width ** 2))


def make_state(grid, u_amp=1.0, n_amp=1.0, u_width=2.0, n_width=3.0, n1_amp=0.0, velocity=0.0):
    x = grid.x
    u0 = SpectralField(grid, gaussian(x, u_width, u_amp) * np.exp(1j * velocity * x))
    n0 = SpectralField(grid, gaussian(x, n_width, n_amp))
    n1 = SpectralField(grid, gaussian(x, n_width, n1_amp))
    return SimState.from_data(u0, n0, n1)
