"""
KGS Lab — Periodic Grid
========================
Uniform periodic 1-D grid standing in for the real line.

FFT normalization (used everywhere in the package):
  spectrum c_j = (1/N) sum_n f(x_n) e^{-2πi jn/N}     (numpy ``norm="forward"``)
  f(x_n)     = sum_j c_j e^{i k_j (x_n - x_0)}
  discrete L² norm: ||f||² = (L/N) sum_x |f(x)|² = L sum_j |c_j|²
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator


class Grid(BaseModel):
    """Torus of circumference ``domain_length`` sampled at ``num_points`` nodes."""

    model_config = ConfigDict(frozen=True)

    num_points: int
    domain_length: float

    @field_validator("num_points")
    @classmethod
    def validate_num_points(cls, v: int) -> int:
        if v < 8:
            raise ValueError(f"num_points must be >= 8, got {v}")
        if v % 2:
            raise ValueError(f"num_points must be even, got {v}")
        return v

    @field_validator("domain_length")
    @classmethod
    def validate_domain_length(cls, v: float) -> float:
        if not math.isfinite(v) or v <= 0:
            raise ValueError(f"domain_length must be positive and finite, got {v}")
        return v

    @classmethod
    def create(cls, num_points: int = 256, domain_length: float = 100.0) -> "Grid":
        return cls(num_points=num_points, domain_length=domain_length)

    @property
    def dx(self) -> float:
        return self.domain_length / self.num_points

    @property
    def x(self) -> np.ndarray:
        """Physical nodes on [-L/2, L/2)."""
        return _nodes(self)

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in numpy FFT order; index N/2 is the Nyquist mode."""
        return _wavenumbers(self)

    @property
    def mode_index(self) -> np.ndarray:
        return _mode_index(self)

    @property
    def nyquist_index(self) -> int:
        return self.num_points // 2

    @property
    def dealias_mask(self) -> np.ndarray:
        """2/3 rule: keep |j| < N/3."""
        return _dealias_mask(self)

    def bracket(self, power: float) -> np.ndarray:
        """<k>^power = (1 + k²)^(power/2)."""
        return _bracket(self, float(power))


# Per-grid caches. lru_cache is internally synchronized, so concurrent
# readers on the same grid share one array.

def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=64)
def _nodes(grid: Grid) -> np.ndarray:
    return _readonly(-grid.domain_length / 2 + grid.dx * np.arange(grid.num_points))


@lru_cache(maxsize=64)
def _mode_index(grid: Grid) -> np.ndarray:
    return _readonly(np.fft.fftfreq(grid.num_points, d=1.0 / grid.num_points).round().astype(int))


@lru_cache(maxsize=64)
def _wavenumbers(grid: Grid) -> np.ndarray:
    return _readonly(2.0 * np.pi * _mode_index(grid) / grid.domain_length)


@lru_cache(maxsize=64)
def _dealias_mask(grid: Grid) -> np.ndarray:
    return _readonly(np.abs(_mode_index(grid)) < grid.num_points / 3.0)


@lru_cache(maxsize=256)
def _bracket(grid: Grid, power: float) -> np.ndarray:
    return _readonly((1.0 + _wavenumbers(grid) ** 2) ** (power / 2.0))
