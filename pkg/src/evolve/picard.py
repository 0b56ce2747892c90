"""
KGS Lab — Picard / Duhamel Local Solver
========================================
Fixed-point iteration of the integral form of the reduced system on one
local window [t, t + δ]:

    u(t)  = U(t) u0  + i m ∫_0^t U(t-s) [n |u|^{2(m-1)} u](s) ds
    n±(t) = W±(t) n±0 ∓ (i/2) ∫_0^t W±(t-s) A^{-1}|u|^{2m}(s) ds

with U(t) = e^{-ik²t} and W±(t) = e^{±i<k>t} mode-wise. Integrals are taken in
the interaction picture (where the integrand is smooth in s) by composite
Simpson on uniform nodes or by a Gauss-Legendre integration matrix.

Successive iterates are compared in X^{0,b1} + X^{1/2,b2}_+ + X^{1/2,b2}_-
on uniform time slices of the window; the ratios of successive distances
are the measured contraction factors.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from numpy.polynomial.legendre import leggauss
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import cumulative_simpson
from scipy.interpolate import BarycentricInterpolator, CubicSpline

from src.diagnostics.conserved import mass, sobolev_norm
from src.evolve.propagators import coupling_terms
from src.exponents.algebra import ExponentSet, local_delta
from src.fieldcore.fields import SimState, SpectralField
from src.fieldcore.grid import Grid
from src.fieldcore.symbols import DispersionSymbol
from src.xsb.norms import MIN_TIMES, SpaceTimeField, xsb_norm

logger = logging.getLogger(__name__)


class PicardDivergenceError(RuntimeError):
    """The iteration did not reach the tolerance; carries the measured log."""

    def __init__(self, message: str, ratios: list[float], distances: list[float]):
        super().__init__(message)
        self.ratios = ratios
        self.distances = distances


class PicardConfig(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    delta: float = Field(gt=0.0, le=1.0)
    norm_exponents: ExponentSet
    quad_points: int = Field(default=33, ge=8)
    max_iters: int = Field(default=60, ge=1)
    fp_tolerance: float = Field(default=1e-10, gt=0.0)
    quadrature: Literal["simpson", "gauss"] = "simpson"
    c_local: float = Field(default=1.0, gt=0.0)


@dataclass
class PicardResult:
    state: SimState
    trajectory: tuple[SpaceTimeField, SpaceTimeField, SpaceTimeField]
    distances: list[float]
    ratios: list[float]
    iterations: int
    converged: bool
    delta: float
    local_delta: float
    notes: list[str] = field(default_factory=list)

    @property
    def contraction_ratio(self) -> float:
        """Largest measured d_k / d_{k-1}; 0 when the first iterate is already fixed."""
        return max(self.ratios) if self.ratios else 0.0

    @property
    def delta_compliant(self) -> bool:
        return self.delta <= self.local_delta * (1.0 + 1e-12)


# ─── Quadrature ───────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class _Quadrature:
    nodes: np.ndarray            # where the integrand is sampled
    eval_times: np.ndarray       # where cumulative integrals are returned; last is δ
    integrate: Callable[[np.ndarray], np.ndarray]


def _simpson(delta: float, points: int) -> _Quadrature:
    nodes = np.linspace(0.0, delta, points)

    def integrate(values: np.ndarray) -> np.ndarray:
        real = cumulative_simpson(values.real, x=nodes, axis=0, initial=0.0)
        imag = cumulative_simpson(values.imag, x=nodes, axis=0, initial=0.0)
        return real + 1j * imag

    return _Quadrature(nodes, nodes, integrate)


def gauss_integration_matrix(nodes: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """
    S[j, i] = ∫_0^{targets[j]} ℓ_i(s) ds for the Lagrange basis on ``nodes``.

    Each integral is evaluated by Gauss-Legendre with len(nodes) points, which
    is exact for the degree len(nodes) - 1 basis.
    """
    q = len(nodes)
    xi, w = leggauss(q)
    basis = BarycentricInterpolator(nodes, np.eye(q))
    matrix = np.empty((len(targets), q))
    for j, t in enumerate(targets):
        samples = basis(0.5 * t * (xi + 1.0))        # (q points, q basis functions)
        matrix[j] = 0.5 * t * (w @ samples)
    return matrix


def _gauss(delta: float, points: int) -> _Quadrature:
    xi, _ = leggauss(points)
    nodes = 0.5 * delta * (xi + 1.0)
    eval_times = np.append(nodes, delta)
    matrix = gauss_integration_matrix(nodes, eval_times)

    def integrate(values: np.ndarray) -> np.ndarray:
        return matrix @ values

    return _Quadrature(nodes, eval_times, integrate)


def build_quadrature(cfg: PicardConfig) -> _Quadrature:
    if cfg.quadrature == "gauss":
        return _gauss(cfg.delta, cfg.quad_points)
    return _simpson(cfg.delta, cfg.quad_points)


# ─── Iteration ────────────────────────────────────────────────────────────────

def _phases(grid: Grid, times: np.ndarray) -> dict[DispersionSymbol, np.ndarray]:
    """e^{i φ(k) t} for every symbol, shape (len(times), N)."""
    return {
        symbol: np.exp(1j * times[:, None] * symbol.on_grid(grid)[None, :])
        for symbol in DispersionSymbol
    }


def _physical(spectra: np.ndarray) -> np.ndarray:
    return np.fft.ifft(spectra, axis=1, norm="forward")


def _spectral(values: np.ndarray) -> np.ndarray:
    return np.fft.fft(values, axis=1, norm="forward")


_SYMBOLS = (DispersionSymbol.SCHRODINGER, DispersionSymbol.PLUS, DispersionSymbol.MINUS)


def _uniform_slices(
    grid: Grid,
    quad: _Quadrature,
    initial: tuple[np.ndarray, ...],
    trajectory: tuple[np.ndarray, ...],
    start: float,
    delta: float,
    method: str,
) -> tuple[SpaceTimeField, SpaceTimeField, SpaceTimeField]:
    """Resample spectral trajectories on eval_times onto uniform slices of [0, δ)."""
    times = quad.eval_times
    span = (start, start + delta)

    if method == "simpson" and len(times) - 1 >= MIN_TIMES:
        return tuple(
            SpaceTimeField(grid, span, _physical(spec[:-1])) for spec in trajectory
        )

    count = max(MIN_TIMES, len(quad.nodes))
    target = delta * np.arange(count) / count
    known_times = times if method == "simpson" else np.concatenate(([0.0], times))
    back = _phases(grid, target)
    out = []
    for symbol, spec, spec0 in zip(_SYMBOLS, trajectory, initial):
        phase = symbol.on_grid(grid)[None, :]
        if method == "simpson":
            rows = spec
        else:
            rows = np.vstack([spec0[None, :], spec])
        # interaction picture: smooth in t
        frame = rows * np.exp(-1j * known_times[:, None] * phase)
        if method == "simpson":
            resampled = (
                CubicSpline(known_times, frame.real, axis=0)(target)
                + 1j * CubicSpline(known_times, frame.imag, axis=0)(target)
            )
        else:
            resampled = BarycentricInterpolator(known_times, frame)(target)
        out.append(SpaceTimeField(grid, span, _physical(resampled * back[symbol])))
    return tuple(out)


def _distance(
    a: tuple[SpaceTimeField, ...],
    b: tuple[SpaceTimeField, ...],
    exps: ExponentSet,
) -> float:
    b1, b2 = float(exps.b1), float(exps.b2)
    return (
        xsb_norm(a[0] - b[0], 0.0, b1, DispersionSymbol.SCHRODINGER)
        + xsb_norm(a[1] - b[1], 0.5, b2, DispersionSymbol.PLUS)
        + xsb_norm(a[2] - b[2], 0.5, b2, DispersionSymbol.MINUS)
    )


def picard_local_solve(
    state: SimState,
    cfg: PicardConfig,
    m: float,
    coupling: float = 1.0,
) -> PicardResult:
    """
    Iterate the Duhamel map from the free evolution until successive iterates
    differ by less than ``cfg.fp_tolerance``.

    A window longer than the local_delta bound is allowed (to test how sharp
    the bound is) and only logged.

    Raises:
        PicardDivergenceError: no convergence within ``cfg.max_iters``.
    """
    state.require_finite()
    m = float(m)
    grid = state.grid
    exps = cfg.norm_exponents

    bound = local_delta(mass(state.u), sobolev_norm(state.n_plus, 0.5), exps, cfg.c_local)
    notes = []
    if cfg.delta > bound * (1.0 + 1e-12):
        msg = f"window δ={cfg.delta:.6g} exceeds the local bound {bound:.6g} (c_local={cfg.c_local})"
        logger.warning(msg)
        notes.append(msg)

    quad = build_quadrature(cfg)
    q = len(quad.nodes)
    out_phase = _phases(grid, quad.eval_times)
    in_phase = _phases(grid, quad.nodes)
    inv_a = grid.bracket(-1.0)[None, :]

    initial = (state.u.spectrum, state.n_plus.spectrum, state.n_minus.spectrum)
    sch, plus, minus = _SYMBOLS

    def iterate(
        current: tuple[np.ndarray, np.ndarray, np.ndarray],
        scale: float,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        u = _physical(current[0][:q])
        n = (_physical(current[1][:q]) + _physical(current[2][:q])).real
        rotation, density = coupling_terms(u, n, m)
        f_hat = _spectral(rotation * u)
        g_hat = _spectral(density) * inv_a
        # conj(e^{iφt}) = e^{-iφt}: pull each source back to time 0
        i_u = quad.integrate(np.conj(in_phase[sch]) * f_hat)
        i_plus = quad.integrate(np.conj(in_phase[plus]) * g_hat)
        i_minus = quad.integrate(np.conj(in_phase[minus]) * g_hat)
        return (
            out_phase[sch] * (initial[0][None, :] + (1j * m * scale) * i_u),
            out_phase[plus] * (initial[1][None, :] - (0.5j * scale) * i_plus),
            out_phase[minus] * (initial[2][None, :] + (0.5j * scale) * i_minus),
        )

    def slices(spectra):
        return _uniform_slices(grid, quad, initial, spectra, state.time, cfg.delta, cfg.quadrature)

    current = iterate(
        tuple(np.zeros((len(quad.eval_times), grid.num_points), dtype=np.complex128) for _ in range(3)),
        0.0,
    )
    current_slices = slices(current)
    distances: list[float] = []
    ratios: list[float] = []
    converged = False

    for k in range(1, cfg.max_iters + 1):
        nxt = iterate(current, coupling)
        nxt_slices = slices(nxt)
        d = _distance(nxt_slices, current_slices, exps)
        if not np.isfinite(d):
            raise PicardDivergenceError(
                f"iterate {k} is not finite (δ={cfg.delta:.6g})", ratios, distances
            )
        if distances:
            ratios.append(d / distances[-1])
        distances.append(d)
        current, current_slices = nxt, nxt_slices
        logger.debug(f"picard iterate {k}: distance {d:.3e}")
        if d < cfg.fp_tolerance:
            converged = True
            break

    if not converged:
        raise PicardDivergenceError(
            f"no convergence within {cfg.max_iters} iterations at δ={cfg.delta:.6g}; "
            f"last distance {distances[-1]:.3e}",
            ratios,
            distances,
        )

    endpoint = state.replace(
        u=SpectralField.from_spectrum(grid, current[0][-1]),
        n_plus=SpectralField.from_spectrum(grid, current[1][-1]),
        n_minus=SpectralField.from_spectrum(grid, current[2][-1]),
        time=state.time + cfg.delta,
    )
    return PicardResult(
        state=endpoint,
        trajectory=current_slices,
        distances=distances,
        ratios=ratios,
        iterations=len(distances),
        converged=True,
        delta=cfg.delta,
        local_delta=bound,
        notes=notes,
    )
