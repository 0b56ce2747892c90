"""
KGS Lab — Spectral Fields
==========================
Complex fields on a periodic grid with dual physical/Fourier views,
Fourier-multiplier algebra (A^s = (1 - d²/dx²)^{s/2}), and the change of
variables between the meson field (n, n_t) and the half-wave pair (n+, n-).

Usage:
    from src.fieldcore.fields import SpectralField, decompose_n, reconstruct_n
    n_plus, n_minus = decompose_n(n0, n1)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from src.fieldcore.grid import Grid

REALITY_TOL = 1e-12


class NonFiniteFieldError(ValueError):
    """Raised when a field holds NaN or infinite samples."""


def _freeze(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


def first_non_finite(values: np.ndarray) -> Optional[int]:
    bad = np.flatnonzero(~np.isfinite(values))
    return int(bad[0]) if bad.size else None


@dataclass(frozen=True, eq=False)
class SpectralField:
    """One complex field on ``grid``. ``values`` is the physical side."""
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        arr = _freeze(self.values)
        if arr.shape != (self.grid.num_points,):
            raise ValueError(
                f"field has shape {arr.shape}, grid expects ({self.grid.num_points},)"
            )
        object.__setattr__(self, "values", arr)

    @cached_property
    def spectrum(self) -> np.ndarray:
        return _freeze(np.fft.fft(self.values, norm="forward"))

    @classmethod
    def from_spectrum(cls, grid: Grid, spectrum: np.ndarray) -> "SpectralField":
        spec = _freeze(spectrum)
        out = cls(grid, np.fft.ifft(spec, norm="forward"))
        out.__dict__["spectrum"] = spec
        return out

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros(grid.num_points, dtype=np.complex128))

    @classmethod
    def from_function(cls, grid: Grid, func) -> "SpectralField":
        return cls(grid, func(grid.x))

    def multiply(self, multiplier: np.ndarray, zero_nyquist: bool = False) -> "SpectralField":
        """Apply a Fourier multiplier given mode-wise in FFT order."""
        spec = self.spectrum * multiplier
        if zero_nyquist:
            spec[self.grid.nyquist_index] = 0.0
        return SpectralField.from_spectrum(self.grid, spec)

    def conj(self) -> "SpectralField":
        return SpectralField(self.grid, np.conj(self.values))

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _require_same_grid(self, other)
        return SpectralField(self.grid, self.values + other.values)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _require_same_grid(self, other)
        return SpectralField(self.grid, self.values - other.values)

    def scaled(self, factor: complex) -> "SpectralField":
        return SpectralField(self.grid, factor * self.values)

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def imag_defect(self) -> float:
        """max|Im f| relative to max|f| (0 for the zero field)."""
        scale = self.max_abs
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(self.values.imag)) / scale)

    def require_finite(self, name: str = "field") -> None:
        idx = first_non_finite(self.values)
        if idx is not None:
            raise NonFiniteFieldError(
                f"{name} has a non-finite value at index {idx}: {self.values[idx]}"
            )


def _require_same_grid(a: SpectralField, b: SpectralField) -> None:
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


# ─── Multipliers ──────────────────────────────────────────────────────────────

def sobolev_multiplier(f: SpectralField, s: float, zero_nyquist: bool = False) -> SpectralField:
    """
    Multiply mode k by (1 + k²)^{s/2}.

    s = 0 returns ``f`` itself. The weight is even and real, so real fields
    stay real; pass ``zero_nyquist`` to drop the unpaired Nyquist coefficient.
    """
    f.require_finite("sobolev_multiplier input")
    if s == 0:
        return f
    return f.multiply(f.grid.bracket(s), zero_nyquist=zero_nyquist)


def inverse_a(f: SpectralField) -> SpectralField:
    """A^{-1} = (1 - d²/dx²)^{-1/2}."""
    return sobolev_multiplier(f, -1.0)


def derivative(f: SpectralField) -> SpectralField:
    # i k is odd in k: the Nyquist coefficient would turn imaginary for real f.
    return f.multiply(1j * f.grid.k, zero_nyquist=True)


def dealias(f: SpectralField) -> SpectralField:
    return f.multiply(f.grid.dealias_mask.astype(float))


# ─── n <-> n± change of variables ─────────────────────────────────────────────

def require_real(f: SpectralField, name: str, tol: float = REALITY_TOL) -> None:
    defect = f.imag_defect()
    if defect > tol:
        raise ValueError(
            f"{name} must be real-valued; imaginary part is {defect:.3e} of its amplitude"
        )


def decompose_n(n0: SpectralField, n1: SpectralField) -> tuple[SpectralField, SpectralField]:
    """
    n± = ½(n0 ± (1/(iA)) n1), computed mode-wise.

    For real (n0, n1) the result satisfies n+ = conj(n-).
    """
    _require_same_grid(n0, n1)
    require_real(n0, "n0")
    require_real(n1, "n1")
    half_wave = n1.spectrum * n1.grid.bracket(-1.0) / 1j
    plus = 0.5 * (n0.spectrum + half_wave)
    minus = 0.5 * (n0.spectrum - half_wave)
    return (
        SpectralField.from_spectrum(n0.grid, plus),
        SpectralField.from_spectrum(n0.grid, minus),
    )


def reconstruct_n(n_plus: SpectralField, n_minus: SpectralField) -> tuple[SpectralField, SpectralField]:
    """n = n+ + n-,  n_t = iA(n+ - n-)."""
    _require_same_grid(n_plus, n_minus)
    grid = n_plus.grid
    n = SpectralField.from_spectrum(grid, n_plus.spectrum + n_minus.spectrum)
    n_t = SpectralField.from_spectrum(
        grid, 1j * grid.bracket(1.0) * (n_plus.spectrum - n_minus.spectrum)
    )
    return n, n_t


# ─── Reduced-system state ─────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class SimState:
    """(u, n+, n-) at model time ``time``."""
    u: SpectralField
    n_plus: SpectralField
    n_minus: SpectralField
    time: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        _require_same_grid(self.u, self.n_plus)
        _require_same_grid(self.u, self.n_minus)

    @classmethod
    def from_data(
        cls,
        u0: SpectralField,
        n0: SpectralField,
        n1: SpectralField,
        time: float = 0.0,
    ) -> "SimState":
        n_plus, n_minus = decompose_n(n0, n1)
        return cls(u0, n_plus, n_minus, time)

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @property
    def is_finite(self) -> bool:
        return self.u.is_finite and self.n_plus.is_finite and self.n_minus.is_finite

    @property
    def max_abs(self) -> float:
        return max(self.u.max_abs, self.n_plus.max_abs, self.n_minus.max_abs)

    def require_finite(self) -> None:
        self.u.require_finite("u")
        self.n_plus.require_finite("n_plus")
        self.n_minus.require_finite("n_minus")

    def reality_defect(self) -> float:
        """max|n- - conj(n+)| relative to max|n+|; 0 when n+ vanishes."""
        scale = self.n_plus.max_abs
        if scale == 0.0:
            return float(self.n_minus.max_abs)
        return float(np.max(np.abs(self.n_minus.values - np.conj(self.n_plus.values))) / scale)

    def meson(self) -> tuple[SpectralField, SpectralField]:
        return reconstruct_n(self.n_plus, self.n_minus)

    def replace(self, **changes) -> "SimState":
        fields = {
            "u": self.u,
            "n_plus": self.n_plus,
            "n_minus": self.n_minus,
            "time": self.time,
            "meta": self.meta,
        }
        fields.update(changes)
        return SimState(**fields)
