"""
KGS Lab — Space-Time Fields and X^{s,b} Norms
==============================================
Discrete Bourgain norms on an (x, t) rectangle, treated as periodic in both
directions. Fields are expected to be windowed by ψ_δ (``bump_window``) so
that periodization in time is exact.

Normalization: the 2-D transform is forward-normalized on both axes,
    f(x, t) = sum_{k, τ} c(k, τ) e^{i(kx + τt)},
so that ||f||²_{L²_{x,t}} = L·S·sum |c|², with L the torus length and S the
time span. τ runs over 2π·fftfreq(num_times, d=S/num_times).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from src.fieldcore.fields import NonFiniteFieldError, SpectralField, first_non_finite
from src.fieldcore.grid import Grid
from src.fieldcore.symbols import DispersionSymbol

logger = logging.getLogger(__name__)

MIN_TIMES = 16


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Samples f(x_i, t_j) on a uniform (num_times x num_points) lattice over [t0, t1)."""
    grid: Grid
    t_span: tuple[float, float]
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.complex128, copy=True)
        if arr.ndim != 2 or arr.shape[1] != self.grid.num_points:
            raise ValueError(
                f"values must have shape (num_times, {self.grid.num_points}), got {arr.shape}"
            )
        if arr.shape[0] < MIN_TIMES:
            raise ValueError(f"num_times must be >= {MIN_TIMES}, got {arr.shape[0]}")
        t0, t1 = self.t_span
        if not (math.isfinite(t0) and math.isfinite(t1) and t1 > t0):
            raise ValueError(f"t_span must be finite with t1 > t0, got {self.t_span}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "t_span", (float(t0), float(t1)))

    @classmethod
    def from_function(
        cls,
        grid: Grid,
        t_span: tuple[float, float],
        num_times: int,
        func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    ) -> "SpaceTimeField":
        """``func(x, t)`` is called on broadcast grids of shape (num_times, num_points)."""
        t = _uniform_times(t_span, num_times)
        return cls(grid, t_span, func(grid.x[None, :], t[:, None]))

    @property
    def num_times(self) -> int:
        return self.values.shape[0]

    @property
    def span(self) -> float:
        return self.t_span[1] - self.t_span[0]

    @property
    def dt(self) -> float:
        return self.span / self.num_times

    @property
    def times(self) -> np.ndarray:
        return _uniform_times(self.t_span, self.num_times)

    @property
    def tau(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.num_times, d=self.dt)

    def slice(self, i: int) -> SpectralField:
        return SpectralField(self.grid, self.values[i])

    def windowed(self, delta: float) -> "SpaceTimeField":
        return SpaceTimeField(self.grid, self.t_span, self.values * bump_window(delta, self.times)[:, None])

    def __sub__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        if other.grid != self.grid or other.values.shape != self.values.shape:
            raise ValueError("space-time fields live on different lattices")
        return SpaceTimeField(self.grid, self.t_span, self.values - other.values)

    def require_finite(self, name: str = "field") -> None:
        flat = self.values.ravel()
        idx = first_non_finite(flat)
        if idx is not None:
            t_idx, x_idx = divmod(idx, self.grid.num_points)
            raise NonFiniteFieldError(
                f"{name} has a non-finite value at (t={t_idx}, x={x_idx}): {flat[idx]}"
            )


def _uniform_times(t_span: tuple[float, float], num_times: int) -> np.ndarray:
    t0, t1 = t_span
    return t0 + (t1 - t0) * np.arange(num_times) / num_times


# ─── ψ_δ ──────────────────────────────────────────────────────────────────────

def _smooth_step(x: np.ndarray) -> np.ndarray:
    """0 for x <= 0, 1 for x >= 1, C^∞ in between (built from e^{-1/x})."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        left = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        right = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return left / (left + right)


def bump_window(delta: float, times: np.ndarray) -> np.ndarray:
    """
    ψ_δ(t) = ψ(t/δ): even, in [0, 1], ≡ 1 on [-δ, δ], 0 outside (-2δ, 2δ).
    """
    if not (0 < delta <= 1):
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    s = np.abs(np.asarray(times, dtype=float)) / delta
    return _smooth_step(2.0 - s)


# ─── Norms ────────────────────────────────────────────────────────────────────

def xsb_norm(f: SpaceTimeField, s: float, b: float, symbol: DispersionSymbol | str) -> float:
    """|| <k>^s <τ - φ(k)>^b ĉ(k, τ) ||  with the normalization of the module docstring."""
    if not (-1.0 < b < 1.0):
        raise ValueError(f"b must lie in (-1, 1), got {b}")
    f.require_finite("xsb_norm input")
    symbol = DispersionSymbol(symbol)

    coeffs = np.fft.fft2(f.values, norm="forward")
    weight = f.grid.bracket(s)[None, :]
    if b != 0:
        shift = f.tau[:, None] - symbol.on_grid(f.grid)[None, :]
        weight = weight * (1.0 + shift ** 2) ** (b / 2.0)
    total = np.sum(np.abs(weight * coeffs) ** 2)
    return float(math.sqrt(f.grid.domain_length * f.span * total))


def _lebesgue(samples: np.ndarray, p: float, measure: float, axis: int) -> np.ndarray:
    if math.isinf(p):
        return np.max(samples, axis=axis)
    if p <= 0:
        raise ValueError(f"Lebesgue exponent must be > 0, got {p}")
    # scale by the peak so large p does not overflow
    peak = np.max(samples, axis=axis, keepdims=True)
    safe = np.where(peak > 0, peak, 1.0)
    total = np.sum((samples / safe) ** p, axis=axis)
    return np.squeeze(safe, axis=axis) * (measure * total) ** (1.0 / p)


def lq_lr_norm(f: SpaceTimeField, q: float, r: float) -> float:
    """|| ||f(t)||_{L^r_x} ||_{L^q_t}; q or r may be math.inf."""
    f.require_finite("lq_lr_norm input")
    inner = _lebesgue(np.abs(f.values), r, f.grid.dx, axis=1)
    return float(_lebesgue(inner, q, f.dt, axis=0))


def lp_hs_norm(f: SpaceTimeField, p: float, s: float) -> float:
    """|| ||f(t)||_{H^s_x} ||_{L^p_t}, slice by slice."""
    f.require_finite("lp_hs_norm input")
    spectra = np.fft.fft(f.values, axis=1, norm="forward")
    weights = f.grid.bracket(2.0 * s)[None, :]
    inner = np.sqrt(f.grid.domain_length * np.sum(weights * np.abs(spectra) ** 2, axis=1))
    return float(_lebesgue(inner, p, f.dt, axis=0))


def free_wave_field(
    profile: SpectralField,
    symbol: DispersionSymbol | str,
    t_span: tuple[float, float],
    num_times: int,
    delta: Optional[float] = None,
) -> SpaceTimeField:
    """e^{i φ(D) t} applied to ``profile``, optionally multiplied by ψ_δ(t)."""
    symbol = DispersionSymbol(symbol)
    t = _uniform_times(t_span, num_times)
    phases = np.exp(1j * t[:, None] * symbol.on_grid(profile.grid)[None, :])
    values = np.fft.ifft(profile.spectrum[None, :] * phases, axis=1, norm="forward")
    if delta is not None:
        values = values * bump_window(delta, t)[:, None]
    return SpaceTimeField(profile.grid, t_span, values)
