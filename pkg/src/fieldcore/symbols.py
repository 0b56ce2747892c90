"""Dispersion symbols shared by the propagators and the X^{s,b} norms."""

from __future__ import annotations

from enum import Enum

import numpy as np

from src.fieldcore.grid import Grid


class DispersionSymbol(str, Enum):
    SCHRODINGER = "schrodinger"
    PLUS = "plus"
    MINUS = "minus"

    def phi(self, k: np.ndarray) -> np.ndarray:
        """φ(k): -k² for Schrödinger, ±(1 + k²)^{1/2} for the half-wave flows."""
        k = np.asarray(k, dtype=float)
        if self is DispersionSymbol.SCHRODINGER:
            return -(k ** 2)
        bracket = np.sqrt(1.0 + k ** 2)
        return bracket if self is DispersionSymbol.PLUS else -bracket

    def on_grid(self, grid: Grid) -> np.ndarray:
        return self.phi(grid.k)
