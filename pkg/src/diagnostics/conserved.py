"""
KGS Lab — Conserved Quantities
===============================
Mass, energy and Sobolev norms of discrete fields, plus the per-row
diagnostics record written to history CSVs.

Column order of a history row: t, mass, energy, n_half, nt_minus_half,
bound_value, doubled, n_pm_half.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from src.fieldcore.fields import SimState, SpectralField, require_real

ENERGY_REALITY_TOL = 1e-8

HISTORY_COLUMNS = [
    "t", "mass", "energy", "n_half", "nt_minus_half", "bound_value", "doubled", "n_pm_half",
]


def sobolev_norm(f: SpectralField, s: float) -> float:
    """sqrt(L · sum (1 + k²)^s |c_k|²)."""
    f.require_finite("sobolev_norm input")
    weights = f.grid.bracket(2.0 * s)
    return float(math.sqrt(f.grid.domain_length * np.sum(weights * np.abs(f.spectrum) ** 2)))


def mass(u: SpectralField) -> float:
    """||u||_{L²}."""
    return sobolev_norm(u, 0.0)


def energy(u: SpectralField, n: SpectralField, n_t: SpectralField, m: float) -> float:
    """
    ||u_x||² + ½(||A n||² + ||n_t||²) - ∫ |u|^{2m} n dx.

    Quadratic terms are spectral; the coupling integral is a physical-side
    sum with weight L/N.
    """
    require_real(n, "n", tol=ENERGY_REALITY_TOL)
    require_real(n_t, "n_t", tol=ENERGY_REALITY_TOL)
    grid = u.grid
    length = grid.domain_length

    kinetic = length * np.sum(grid.k ** 2 * np.abs(u.spectrum) ** 2)
    wave = 0.5 * length * (
        np.sum(grid.bracket(2.0) * np.abs(n.spectrum) ** 2)
        + np.sum(np.abs(n_t.spectrum) ** 2)
    )
    density = (np.abs(u.values) ** 2) ** float(m)
    coupling = grid.dx * np.sum(density * n.values.real)
    return float(kinetic + wave - coupling)


@dataclass(frozen=True)
class StateDiagnostics:
    mass: float
    energy: float
    n_half: float
    nt_minus_half: float
    n_pm_half: float

    @property
    def wave_size(self) -> float:
        """||n||_{H^{1/2}} + ||n_t||_{H^{-1/2}}, the quantity the growth bound controls."""
        return self.n_half + self.nt_minus_half


def state_diagnostics(state: SimState, m: float) -> StateDiagnostics:
    n, n_t = state.meson()
    return StateDiagnostics(
        mass=mass(state.u),
        energy=energy(state.u, n, n_t, m),
        n_half=sobolev_norm(n, 0.5),
        nt_minus_half=sobolev_norm(n_t, -0.5),
        n_pm_half=sobolev_norm(state.n_plus, 0.5),
    )


@dataclass(frozen=True)
class DiagnosticsRow:
    t: float
    mass: float
    energy: float
    n_half: float
    nt_minus_half: float
    bound_value: float
    doubled: bool = False
    n_pm_half: float = 0.0

    def __post_init__(self):
        # bound_value may overflow to +inf for long runs; everything else must be finite
        if math.isnan(self.bound_value):
            raise ValueError("diagnostics field bound_value is NaN")
        for name in ("t", "mass", "energy", "n_half", "nt_minus_half", "n_pm_half"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"diagnostics field {name} is not finite: {value}")
        if self.mass < 0 or self.n_half < 0:
            raise ValueError("mass and n_half must be non-negative")

    @property
    def wave_size(self) -> float:
        return self.n_half + self.nt_minus_half

    def as_record(self) -> dict:
        record = asdict(self)
        return {col: record[col] for col in HISTORY_COLUMNS}
