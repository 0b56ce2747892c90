"""
KGS Lab — Empirical Estimate Checks
====================================
Measures ratios LHS / RHS of the linear space-time estimates and of the
two nonlinear estimates over seeded ensembles of windowed fields, and the
δ-scaling of the homogeneous (free-wave) estimate.

Estimate ids (stable, used in CSV output):
    schrodinger_strichartz        ||u||_{L^q L^r} / ||u||_{X^{s,b}},  s = 1/2 - 1/r - 2/q
    schrodinger_interpolated      ||u||_{L^q L^r} / ||u||_{X^{0,b}}
    halfwave_lp_hs                ||n||_{L^p H^s} / ||n||_{X^{s,b}_+}
    nonlinear_schrodinger_source  ||n+ |u|^{2(m-1)} u||_{X^{0,b1'}} / (||n+||_{X^{1/2,b2}_+} ||u||^{2m-1}_{X^{0,b1}})
    nonlinear_wave_source         || |u|^{2m} ||_{X^{-1/2,b2'}_+} / ||u||^{2m}_{X^{0,b1}}
    homogeneous_free_wave         ||ψ_δ e^{iφ(D)t} f||_{X^{s,b}} / ||f||_{H^s}

Ensemble families are continuous functions of (x, t), so refinement
(doubling num_points and num_times) samples the same members.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.diagnostics.conserved import sobolev_norm
from src.evolve.propagators import coupling_terms
from src.exponents.algebra import ExponentSet, as_fraction, format_fraction
from src.fieldcore.fields import SpectralField
from src.fieldcore.grid import Grid
from src.fieldcore.symbols import DispersionSymbol
from src.xsb.norms import (
    SpaceTimeField,
    bump_window,
    free_wave_field,
    lp_hs_norm,
    lq_lr_norm,
    xsb_norm,
)

logger = logging.getLogger(__name__)

FAMILIES = ("free_packet", "white")
ESTIMATE_IDS = (
    "schrodinger_strichartz",
    "schrodinger_interpolated",
    "halfwave_lp_hs",
    "nonlinear_schrodinger_source",
    "nonlinear_wave_source",
    "homogeneous_free_wave",
)
DEFAULT_DELTAS = (1 / 8, 1 / 16, 1 / 32, 1 / 64)

SpaceTimeFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


class InadmissibleExponentsError(ValueError):
    """Exponents outside the range where the estimate is asserted."""


class EnsembleSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    size: int = Field(default=8, ge=1)
    seed: int = 0
    grid: Grid = Field(default_factory=lambda: Grid.create(64, 2.0 * math.pi * 8.0))
    num_times: int = Field(default=64, ge=16)
    delta: float = Field(default=0.5, gt=0.0, le=1.0)
    band: int = Field(default=8, ge=1)
    families: tuple[str, ...] = FAMILIES
    workers: int = Field(default=1, ge=1)

    @field_validator("families")
    @classmethod
    def validate_families(cls, v):
        unknown = [f for f in v if f not in FAMILIES]
        if not v or unknown:
            raise ValueError(f"families must be a nonempty subset of {FAMILIES}, got {v}")
        return tuple(v)

    @property
    def t_span(self) -> tuple[float, float]:
        """5δ wide and centered, so the support (-2δ, 2δ) of ψ_δ fits inside."""
        return (-2.5 * self.delta, 2.5 * self.delta)

    def family(self, member: int) -> str:
        return self.families[member % len(self.families)]

    def rng(self, member: int, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, member, stream])

    def refined(self) -> "EnsembleSpec":
        grid = Grid.create(2 * self.grid.num_points, self.grid.domain_length)
        return self.model_copy(update={"grid": grid, "num_times": 2 * self.num_times})


# ─── Generators ───────────────────────────────────────────────────────────────

def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def random_band_limited(
    rng: np.random.Generator,
    domain_length: float,
    band: int,
) -> Callable[[np.ndarray], np.ndarray]:
    """Random trigonometric polynomial in x with modes |j| <= band."""
    modes = np.arange(-band, band + 1)
    coeffs = _complex_normal(rng, modes.size)
    k = 2.0 * math.pi * modes / domain_length

    def profile(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.tensordot(np.exp(1j * x[..., None] * k), coeffs, axes=([-1], [0]))

    return profile


def free_packet_function(
    rng: np.random.Generator,
    spec: EnsembleSpec,
    symbol: DispersionSymbol,
) -> SpaceTimeFunction:
    """ψ_δ(t) · sum_j a_j e^{i(k_j x + φ(k_j) t)}: on the characteristic."""
    modes = np.arange(-spec.band, spec.band + 1)
    coeffs = _complex_normal(rng, modes.size)
    k = 2.0 * math.pi * modes / spec.grid.domain_length
    phi = symbol.phi(k)

    def func(x: np.ndarray, t: np.ndarray) -> np.ndarray:
        x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
        waves = np.exp(1j * (x[..., None] * k + t[..., None] * phi))
        return bump_window(spec.delta, t) * (waves @ coeffs)

    return func


def white_function(rng: np.random.Generator, spec: EnsembleSpec) -> SpaceTimeFunction:
    """ψ_δ(t) · sum_{j,l} a_{jl} e^{i(k_j x + ω_l t)}: spread off the characteristic."""
    modes = np.arange(-spec.band, spec.band + 1)
    t0, t1 = spec.t_span
    k = 2.0 * math.pi * modes / spec.grid.domain_length
    omega = 2.0 * math.pi * modes / (t1 - t0)
    coeffs = _complex_normal(rng, (modes.size, modes.size))

    def func(x: np.ndarray, t: np.ndarray) -> np.ndarray:
        x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
        ex = np.exp(1j * x[..., None] * k)
        et = np.exp(1j * t[..., None] * omega)
        values = np.einsum("...j,jl,...l->...", ex, coeffs, et)
        return bump_window(spec.delta, t) * values

    return func


def member_function(
    spec: EnsembleSpec,
    member: int,
    symbol: DispersionSymbol,
    stream: int = 0,
) -> SpaceTimeFunction:
    rng = spec.rng(member, stream)
    if spec.family(member) == "free_packet":
        return free_packet_function(rng, spec, symbol)
    return white_function(rng, spec)


def sample(spec: EnsembleSpec, func: SpaceTimeFunction) -> SpaceTimeField:
    return SpaceTimeField.from_function(spec.grid, spec.t_span, spec.num_times, func)


# ─── Reports ──────────────────────────────────────────────────────────────────

@dataclass
class EstimateReport:
    estimate_id: str
    seed: int
    ratios: list[float]
    refined_ratios: list[float]
    families: list[str]
    params: dict = field(default_factory=dict)

    @property
    def ensemble_size(self) -> int:
        return len(self.ratios)

    @property
    def worst_ratio(self) -> float:
        return max(self.ratios)

    @property
    def refined_worst_ratio(self) -> float:
        return max(self.refined_ratios) if self.refined_ratios else math.nan

    @property
    def ratio_quantiles(self) -> dict[float, float]:
        qs = (0.5, 0.9)
        values = np.quantile(np.asarray(self.ratios), qs)
        return {q: float(v) for q, v in zip(qs, values)}

    @property
    def grid_refinement_trend(self) -> float:
        """refined worst / base worst (nan without a refinement pass)."""
        if not self.refined_ratios or self.worst_ratio == 0.0:
            return math.nan
        return self.refined_worst_ratio / self.worst_ratio

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "estimate_id": self.estimate_id,
                "row": "member",
                "member": i,
                "family": family,
                "seed": self.seed,
                "ratio": ratio,
                "ratio_refined": self.refined_ratios[i] if self.refined_ratios else math.nan,
            }
            for i, (family, ratio) in enumerate(zip(self.families, self.ratios))
        ]
        quantiles = self.ratio_quantiles
        rows.append({
            "estimate_id": self.estimate_id,
            "row": "summary",
            "member": self.ensemble_size,
            "family": "all",
            "seed": self.seed,
            "ratio": self.worst_ratio,
            "ratio_refined": self.refined_worst_ratio,
            "q50": quantiles[0.5],
            "q90": quantiles[0.9],
            "trend": self.grid_refinement_trend,
        })
        frame = pd.DataFrame(rows)
        for key, value in self.params.items():
            frame[key] = value
        return frame


def _run_ensemble(
    spec: EnsembleSpec,
    member_ratio: Callable[[EnsembleSpec, int], float],
    refine: bool,
) -> tuple[list[float], list[float]]:
    members = range(spec.size)
    with ThreadPoolExecutor(max_workers=spec.workers) as pool:
        base = list(pool.map(lambda i: member_ratio(spec, i), members))
        refined: list[float] = []
        if refine:
            fine = spec.refined()
            refined = list(pool.map(lambda i: member_ratio(fine, i), members))
    return base, refined


# ─── Linear space-time estimates ──────────────────────────────────────────────

def _inv(p: float) -> Fraction:
    """Exact 1/p; p = ∞ gives 0."""
    if math.isinf(p):
        return Fraction(0)
    return 1 / as_fraction(p)


def validate_linear_exponents(
    estimate_id: str,
    q: float,
    r: float,
    b: float,
) -> float:
    """
    Check admissibility; returns the Sobolev index s on the right-hand side.

    The inequalities are evaluated on rationals so that inclusive endpoints
    such as q = r = 6 are admitted exactly.
    """
    iq, ir = _inv(q), _inv(r)
    bf = as_fraction(b)
    half = Fraction(1, 2)
    if estimate_id == "schrodinger_strichartz":
        if not 4 <= q <= math.inf:
            raise InadmissibleExponentsError(f"4 <= q <= ∞ violated: q = {q}")
        if not 2 <= r <= math.inf:
            raise InadmissibleExponentsError(f"2 <= r <= ∞ violated: r = {r}")
        if not 0 <= 2 * iq <= half - ir:
            raise InadmissibleExponentsError(f"0 <= 2/q <= 1/2 - 1/r violated: q = {q}, r = {r}")
        if not bf > half:
            raise InadmissibleExponentsError(f"b > 1/2 violated: b = {b}")
        return float(half - ir - 2 * iq)
    if estimate_id == "schrodinger_interpolated":
        if not 0 < ir <= half:
            raise InadmissibleExponentsError(f"0 < 1/r <= 1/2 violated: r = {r}")
        if not half - ir <= 2 * iq < half + ir:
            raise InadmissibleExponentsError(
                f"1/2 - 1/r <= 2/q < 1/2 + 1/r violated: q = {q}, r = {r}"
            )
        threshold = half - iq + half * (half - ir)
        if not bf > threshold:
            raise InadmissibleExponentsError(
                f"b > 1/2 - 1/q + (1/2)(1/2 - 1/r) = {format_fraction(threshold)} violated: b = {b}"
            )
        return 0.0
    if estimate_id == "halfwave_lp_hs":
        if r != 2:
            raise InadmissibleExponentsError(f"halfwave_lp_hs measures L^p_t H^s_x: r must be 2, got {r}")
        if not 2 < q < math.inf:
            raise InadmissibleExponentsError(f"2 < p < ∞ violated: p = {q}")
        if not bf > half - iq:
            raise InadmissibleExponentsError(
                f"b > 1/2 - 1/p = {format_fraction(half - iq)} violated: b = {b}"
            )
        return 0.0
    raise ValueError(f"unknown linear estimate id: {estimate_id}")


def strichartz_check(
    q: float,
    r: float,
    b: float,
    ensemble: Optional[EnsembleSpec] = None,
    estimate_id: str = "schrodinger_interpolated",
    s: float = 0.0,
    refine: bool = True,
) -> EstimateReport:
    """
    Worst ratio of a linear space-time estimate over the ensemble.

    For ``halfwave_lp_hs`` pass p as ``q`` with ``r = 2``; ``s`` is the
    common Sobolev index of both sides.

    Raises:
        InadmissibleExponentsError: before any computation.
    """
    ensemble = ensemble or EnsembleSpec()
    s_rhs = validate_linear_exponents(estimate_id, q, r, b)
    if estimate_id == "halfwave_lp_hs":
        s_rhs = s
    symbol = DispersionSymbol.PLUS if estimate_id == "halfwave_lp_hs" else DispersionSymbol.SCHRODINGER

    def member_ratio(spec: EnsembleSpec, i: int) -> float:
        f = sample(spec, member_function(spec, i, symbol))
        rhs = xsb_norm(f, s_rhs, b, symbol)
        if rhs == 0.0:
            return 0.0
        lhs = lp_hs_norm(f, q, s) if estimate_id == "halfwave_lp_hs" else lq_lr_norm(f, q, r)
        return lhs / rhs

    ratios, refined = _run_ensemble(ensemble, member_ratio, refine)
    report = EstimateReport(
        estimate_id=estimate_id,
        seed=ensemble.seed,
        ratios=ratios,
        refined_ratios=refined,
        families=[ensemble.family(i) for i in range(ensemble.size)],
        params={"q": q, "r": r, "b": b, "s": s_rhs},
    )
    logger.info(f"{estimate_id}: worst ratio {report.worst_ratio:.4g} over {report.ensemble_size} members")
    return report


# ─── Nonlinear estimates ──────────────────────────────────────────────────────

def nonlinear_ratios(
    u: SpaceTimeField,
    n_plus: SpaceTimeField,
    m: float,
    b1: float,
    b2: float,
    b1p: float,
    b2p: float,
) -> tuple[float, float]:
    """
    (Schrödinger-source ratio, wave-source ratio) for one pair of fields.

    A vanishing left-hand side gives ratio 0, including u = 0.
    """
    m = float(m)
    rotation, density = coupling_terms(u.values, n_plus.values, m)
    source = SpaceTimeField(u.grid, u.t_span, rotation * u.values)
    wave = SpaceTimeField(u.grid, u.t_span, density)

    u_norm = xsb_norm(u, 0.0, b1, DispersionSymbol.SCHRODINGER)
    n_norm = xsb_norm(n_plus, 0.5, b2, DispersionSymbol.PLUS)

    lhs_s = xsb_norm(source, 0.0, b1p, DispersionSymbol.SCHRODINGER)
    rhs_s = n_norm * u_norm ** (2.0 * m - 1.0)
    lhs_w = xsb_norm(wave, -0.5, b2p, DispersionSymbol.PLUS)
    rhs_w = u_norm ** (2.0 * m)
    return (
        lhs_s / rhs_s if lhs_s > 0 else 0.0,
        lhs_w / rhs_w if lhs_w > 0 else 0.0,
    )


def nonlinear_estimate_check(
    m: float,
    exps: ExponentSet,
    ensemble: Optional[EnsembleSpec] = None,
    refine: bool = True,
) -> tuple[EstimateReport, EstimateReport]:
    ensemble = ensemble or EnsembleSpec()
    b1, b2, b1p, b2p = (float(v) for v in (exps.b1, exps.b2, exps.b1p, exps.b2p))

    def pair(spec: EnsembleSpec, i: int) -> tuple[float, float]:
        u = sample(spec, member_function(spec, i, DispersionSymbol.SCHRODINGER, stream=0))
        n = sample(spec, member_function(spec, i, DispersionSymbol.PLUS, stream=1))
        return nonlinear_ratios(u, n, m, b1, b2, b1p, b2p)

    with ThreadPoolExecutor(max_workers=ensemble.workers) as pool:
        base = list(pool.map(lambda i: pair(ensemble, i), range(ensemble.size)))
        refined: list[tuple[float, float]] = []
        if refine:
            fine = ensemble.refined()
            refined = list(pool.map(lambda i: pair(fine, i), range(ensemble.size)))

    families = [ensemble.family(i) for i in range(ensemble.size)]
    params = {"m": float(m), "b1": b1, "b2": b2, "b1p": b1p, "b2p": b2p}
    reports = tuple(
        EstimateReport(
            estimate_id=estimate_id,
            seed=ensemble.seed,
            ratios=[p[slot] for p in base],
            refined_ratios=[p[slot] for p in refined],
            families=families,
            params=params,
        )
        for slot, estimate_id in enumerate(("nonlinear_schrodinger_source", "nonlinear_wave_source"))
    )
    return reports


# ─── Homogeneous estimate ─────────────────────────────────────────────────────

@dataclass
class HomogeneousReport:
    b: float
    s: float
    symbol: DispersionSymbol
    deltas: list[float]
    ratios: list[float]
    slope: float

    estimate_id: str = "homogeneous_free_wave"

    @property
    def expected_slope(self) -> float:
        return 0.5 - self.b

    @property
    def slope_error(self) -> float:
        return abs(self.slope - self.expected_slope)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"delta": self.deltas, "ratio": self.ratios})
        frame.insert(0, "estimate_id", self.estimate_id)
        frame["b"] = self.b
        frame["s"] = self.s
        frame["slope"] = self.slope
        frame["expected_slope"] = self.expected_slope
        return frame


def default_profile(grid: Grid) -> SpectralField:
    """Smooth packet with modest frequency content, so e^{iφt} stays resolved."""
    width = grid.domain_length / 16.0
    return SpectralField.from_function(grid, lambda x: np.exp(-(x / width) ** 2 + 1j * x))


def homogeneous_estimate_check(
    b: float,
    s: float = 0.0,
    symbol: DispersionSymbol | str = DispersionSymbol.SCHRODINGER,
    deltas: Sequence[float] = DEFAULT_DELTAS,
    grid: Optional[Grid] = None,
    num_times: int = 64,
    profile: Optional[SpectralField] = None,
) -> HomogeneousReport:
    """Fit the slope of log ratio against log δ for a ψ_δ-windowed free wave."""
    symbol = DispersionSymbol(symbol)
    grid = grid or Grid.create(64, 2.0 * math.pi * 8.0)
    profile = profile or default_profile(grid)
    base = sobolev_norm(profile, s)

    ratios = []
    for delta in deltas:
        wave = free_wave_field(profile, symbol, (-2.5 * delta, 2.5 * delta), num_times, delta=delta)
        ratios.append(xsb_norm(wave, s, b, symbol) / base)

    slope = float(np.polyfit(np.log(deltas), np.log(ratios), 1)[0])
    return HomogeneousReport(
        b=b, s=s, symbol=symbol, deltas=list(deltas), ratios=ratios, slope=slope,
    )
