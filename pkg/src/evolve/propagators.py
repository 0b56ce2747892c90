"""
KGS Lab — Split-Step Evolution
===============================
Exact subflows of the reduced system

    i u_t + u_xx = -m (n+ + n-) |u|^{2(m-1)} u
    i ∂t n± ± A n± = ± ½ A^{-1} |u|^{2m}

and their symmetric (Strang) composition.

- linear part: per-mode phase rotations (Propagator)
- nonlinear part: |u| and n = n+ + n- are frozen, so the flow is closed-form
- strang_step: half linear, full nonlinear, half linear; optional 2/3 dealias
  after every nonlinear substep

Usage:
    from src.evolve.propagators import strang_step, integrate
    state = integrate(state, duration=1.0, dt=1e-3, m=1)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from src.fieldcore.fields import SimState, SpectralField, dealias as dealias_field, inverse_a
from src.fieldcore.grid import Grid
from src.fieldcore.symbols import DispersionSymbol

logger = logging.getLogger(__name__)


class PropagatorKind(str, Enum):
    SCHRODINGER = "schrodinger"
    HALF_WAVE_PLUS = "half_wave_plus"
    HALF_WAVE_MINUS = "half_wave_minus"

    @property
    def symbol(self) -> DispersionSymbol:
        return {
            PropagatorKind.SCHRODINGER: DispersionSymbol.SCHRODINGER,
            PropagatorKind.HALF_WAVE_PLUS: DispersionSymbol.PLUS,
            PropagatorKind.HALF_WAVE_MINUS: DispersionSymbol.MINUS,
        }[self]


@lru_cache(maxsize=256)
def _phase_factor(grid: Grid, symbol: DispersionSymbol, dt: float) -> np.ndarray:
    factor = np.exp(1j * symbol.on_grid(grid) * dt)
    factor.setflags(write=False)
    return factor


@dataclass(frozen=True)
class Propagator:
    """e^{i φ(k) dt} acting mode-wise."""
    kind: PropagatorKind
    dt: float

    def factor(self, grid: Grid) -> np.ndarray:
        return _phase_factor(grid, self.kind.symbol, float(self.dt))

    def apply(self, f: SpectralField) -> SpectralField:
        return f.multiply(self.factor(f.grid))


def linear_step(state: SimState, dt: float) -> SimState:
    """Advance every field by its free flow; dt may be negative."""
    if not math.isfinite(dt):
        raise ValueError(f"dt must be finite, got {dt}")
    state.require_finite()
    if dt == 0:
        return state
    return state.replace(
        u=Propagator(PropagatorKind.SCHRODINGER, dt).apply(state.u),
        n_plus=Propagator(PropagatorKind.HALF_WAVE_PLUS, dt).apply(state.n_plus),
        n_minus=Propagator(PropagatorKind.HALF_WAVE_MINUS, dt).apply(state.n_minus),
        time=state.time + dt,
    )


def coupling_terms(u: np.ndarray, n: np.ndarray, m: float) -> tuple[np.ndarray, np.ndarray]:
    """
    (n |u|^{2(m-1)}, |u|^{2m}) pointwise.

    |u|^{2(m-1)} is evaluated as (|u|²)^{m-1}: 1 at u = 0 when m = 1, 0 when m > 1.
    Works on arrays of any shape.
    """
    abs2 = np.abs(u) ** 2
    weight = np.power(abs2, m - 1.0)
    return n * weight, abs2 * weight


def nonlinear_substep(
    state: SimState,
    dt: float,
    m: float,
    coupling: float = 1.0,
    dealias: bool = False,
) -> SimState:
    """
    Exact nonlinear subflow over ``dt``.

    u ← u·exp(i m n |u|^{2(m-1)} dt);  n± ← n± ∓ (i/2) dt A^{-1}|u|^{2m}.
    ``coupling`` scales both right-hand sides (0 turns the nonlinearity off).
    """
    m = float(m)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    state.require_finite()

    u = state.u.values
    n = (state.n_plus.values + state.n_minus.values).real
    rotation, density = coupling_terms(u, n, m)

    new_u = SpectralField(state.grid, u * np.exp(1j * m * coupling * rotation * dt))
    source = inverse_a(SpectralField(state.grid, density))
    kick = (0.5j * coupling * dt) * source.values
    new_plus = SpectralField(state.grid, state.n_plus.values - kick)
    new_minus = SpectralField(state.grid, state.n_minus.values + kick)

    if dealias:
        new_u, new_plus, new_minus = (dealias_field(f) for f in (new_u, new_plus, new_minus))
    return state.replace(u=new_u, n_plus=new_plus, n_minus=new_minus)


def strang_step(
    state: SimState,
    dt: float,
    m: float,
    coupling: float = 1.0,
    dealias: bool = True,
) -> SimState:
    half = linear_step(state, 0.5 * dt)
    mid = nonlinear_substep(half, dt, m, coupling=coupling, dealias=dealias)
    return linear_step(mid, 0.5 * dt)


def integrate(
    state: SimState,
    duration: float,
    dt: float,
    m: float,
    dealias: bool = True,
    coupling: float = 1.0,
) -> SimState:
    """
    Uniform Strang steps covering ``duration``; the step is shrunk so the
    last one lands exactly on ``state.time + duration``.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if duration == 0:
        return state
    steps = max(1, math.ceil(abs(duration) / dt - 1e-9))
    h = duration / steps
    target = state.time + duration
    for _ in range(steps):
        state = strang_step(state, h, m, coupling=coupling, dealias=dealias)
    return state.replace(time=target)
