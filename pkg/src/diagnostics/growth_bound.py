"""
KGS Lab — Growth Bound
=======================
Evaluates the envelope

    ||n(t)||_{H^{1/2}} + ||n_t(t)||_{H^{-1/2}}
        <= c_front · exp(c_rate · |t| · ||u0||^{4m-2}) · baseline,

baseline = max(||n0||_{H^{1/2}} + ||n1||_{H^{-1/2}}, ||u0||^{2m}),

fits the constants over a log-grid of rates, and tracks doubling events.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from src.diagnostics.conserved import DiagnosticsRow

logger = logging.getLogger(__name__)

DEFAULT_C_FRONT_CAP = 4.0
VIOLATION_RTOL = 1e-12


def default_rate_grid() -> np.ndarray:
    return np.logspace(-4.0, 2.0, 61)


@dataclass(frozen=True)
class GrowthBound:
    c_rate: float
    c_front: float
    baseline: float

    def __post_init__(self):
        if self.c_rate <= 0 or self.c_front <= 0:
            raise ValueError(f"c_rate and c_front must be > 0, got {self.c_rate}, {self.c_front}")
        if self.baseline < 0:
            raise ValueError(f"baseline must be >= 0, got {self.baseline}")

    @classmethod
    def from_initial(
        cls,
        n0_half: float,
        n1_minus_half: float,
        mass_u0: float,
        m: float,
        c_front: float = 1.0,
        c_rate: float = 1.0,
    ) -> "GrowthBound":
        baseline = max(n0_half + n1_minus_half, mass_u0 ** (2.0 * float(m)))
        return cls(c_rate=c_rate, c_front=c_front, baseline=baseline)

    def value(self, t: float, mass_u0: float, m: float) -> float:
        exponent = self.c_rate * abs(t) * mass_u0 ** (4.0 * float(m) - 2.0)
        try:
            growth = math.exp(exponent)
        except OverflowError:
            growth = math.inf
        return self.c_front * growth * self.baseline


@dataclass
class GrowthBoundReport:
    frontier: pd.DataFrame                 # columns c_rate, c_front
    c_front_cap: float
    selected_c_rate: Optional[float]
    selected_c_front: Optional[float]
    fixed_pair: tuple[float, float]
    violations: list[float] = field(default_factory=list)   # times where the fixed pair fails

    @property
    def consistent(self) -> bool:
        return self.selected_c_rate is not None

    @property
    def fixed_pair_holds(self) -> bool:
        return not self.violations


def _least_fronts(
    times: np.ndarray,
    sizes: np.ndarray,
    baseline: float,
    scale: float,
    rates: np.ndarray,
) -> np.ndarray:
    peak = float(np.max(sizes))
    if peak == 0.0:
        return np.zeros_like(rates)
    if baseline == 0.0:
        return np.full_like(rates, math.inf)
    exponents = np.outer(rates, np.abs(times) * scale)
    return np.max(sizes[None, :] * np.exp(-exponents), axis=1) / baseline


def growth_bound_check(
    history: Sequence[DiagnosticsRow],
    bound: GrowthBound,
    mass_u0: float,
    m: float,
    rates: Optional[np.ndarray] = None,
    c_front_cap: float = DEFAULT_C_FRONT_CAP,
) -> GrowthBoundReport:
    """
    Fit (c_front, c_rate) to ``history`` and check the user pair in ``bound``.

    For each rate on the grid the least admissible prefactor is
    max_t size(t) / (exp(rate·t·||u0||^{4m-2}) · baseline); the selected pair
    is the smallest rate whose prefactor stays within ``c_front_cap``.
    """
    if not history:
        raise ValueError("history must be nonempty")
    times = np.array([row.t for row in history], dtype=float)
    if np.any(np.diff(times) < 0):
        bad = int(np.flatnonzero(np.diff(times) < 0)[0]) + 1
        raise ValueError(f"history is not time-sorted at row {bad}")

    sizes = np.array([row.wave_size for row in history], dtype=float)
    rates = default_rate_grid() if rates is None else np.asarray(rates, dtype=float)
    scale = mass_u0 ** (4.0 * float(m) - 2.0)
    fronts = _least_fronts(times, sizes, bound.baseline, scale, rates)
    frontier = pd.DataFrame({"c_rate": rates, "c_front": fronts})

    ok = np.flatnonzero(fronts <= c_front_cap)
    selected_rate = float(rates[ok[0]]) if ok.size else None
    selected_front = float(fronts[ok[0]]) if ok.size else None
    if selected_rate is None:
        logger.warning(f"no rate on the grid keeps c_front <= {c_front_cap}")

    violations = [
        float(t) for t, size in zip(times, sizes)
        if size > bound.value(t, mass_u0, m) * (1.0 + VIOLATION_RTOL)
    ]
    if violations:
        logger.warning(
            f"fixed pair (c_front={bound.c_front}, c_rate={bound.c_rate}) "
            f"violated at {len(violations)} rows, first at t={violations[0]:.6g}"
        )

    return GrowthBoundReport(
        frontier=frontier,
        c_front_cap=c_front_cap,
        selected_c_rate=selected_rate,
        selected_c_front=selected_front,
        fixed_pair=(bound.c_front, bound.c_rate),
        violations=violations,
    )


class DoublingTracker:
    """
    Flags the first row where the wave size reaches twice the reference,
    then moves the reference to that row's value.
    """

    def __init__(self, initial_size: float):
        self.reference = initial_size
        self.events: list[tuple[float, float]] = []
        if initial_size <= 0:
            logger.debug("zero initial wave size: doubling detection is disabled for this run")

    def observe(self, t: float, size: float) -> bool:
        if self.reference > 0 and size >= 2.0 * self.reference:
            self.events.append((t, size))
            logger.info(f"doubling at t={t:.6g}: {self.reference:.6g} -> {size:.6g}")
            self.reference = size
            return True
        return False
