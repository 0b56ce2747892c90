"""
KGS Lab — Global Driver
========================
The window-by-window continuation loop:

1. measure ||u(t)||_{L²} and ||n±(t)||_{H^{1/2}}
2. size the next local window δ from the contraction conditions
3. integrate [t, t + δ] with Strang steps (dt clamped to δ/16)
4. append a diagnostics row and record doublings of the wave size

Also hosts the Picard contraction experiment over a ladder of windows.

Usage:
    from src.harness.runner import run_global
    history = run_global(RunConfig.load("run.cfg"))
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from src.diagnostics.conserved import (
    HISTORY_COLUMNS,
    DiagnosticsRow,
    StateDiagnostics,
    mass,
    sobolev_norm,
    state_diagnostics,
)
from src.diagnostics.growth_bound import DoublingTracker, GrowthBound, GrowthBoundReport, growth_bound_check
from src.evolve.picard import PicardConfig, PicardDivergenceError, picard_local_solve
from src.evolve.propagators import integrate
from src.exponents.algebra import ExponentSet, doubling_forecast, local_delta
from src.fieldcore.fields import NonFiniteFieldError, SimState
from src.harness.checkpoint import save_checkpoint
from src.harness.initial_conditions import build_initial_state
from src.harness.run_config import RunConfig

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"
MIN_STEPS_PER_WINDOW = 16
PICARD_LADDER = (0.25, 0.5, 1.0, 2.0, 4.0)


@dataclass(frozen=True)
class ScheduleEntry:
    t: float
    delta: float
    windows: Optional[int]
    advance: float
    in_regime: bool
    mass: float
    n_pm_half: float


@dataclass
class RunHistory:
    rows: list[DiagnosticsRow] = field(default_factory=list)
    doubling_events: list[tuple[float, float]] = field(default_factory=list)
    schedule_log: list[ScheduleEntry] = field(default_factory=list)
    regime_switches: list[float] = field(default_factory=list)
    status: str = "completed"
    final_state: Optional[SimState] = None
    bound: Optional[GrowthBound] = None
    mass_u0: float = 0.0
    m: float = 1.0
    message: str = ""

    @property
    def completed(self) -> bool:
        return self.status == "completed"

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.as_record() for row in self.rows], columns=HISTORY_COLUMNS)

    def schedule_frame(self) -> pd.DataFrame:
        return pd.DataFrame([vars(entry) for entry in self.schedule_log])

    def growth_report(self, **kwargs) -> GrowthBoundReport:
        return growth_bound_check(self.rows, self.bound, self.mass_u0, self.m, **kwargs)


def _row(t: float, diag: StateDiagnostics, bound: GrowthBound, mass_u0: float, m: float, doubled: bool) -> DiagnosticsRow:
    return DiagnosticsRow(
        t=t,
        mass=diag.mass,
        energy=diag.energy,
        n_half=diag.n_half,
        nt_minus_half=diag.nt_minus_half,
        bound_value=bound.value(t, mass_u0, m),
        doubled=doubled,
        n_pm_half=diag.n_pm_half,
    )


def _blown_up(state: SimState, threshold: float) -> bool:
    return not state.is_finite or state.max_abs > threshold


def run_global(
    cfg: RunConfig,
    state: Optional[SimState] = None,
    write_outputs: bool = True,
) -> RunHistory:
    """
    Drive the system from t0 to t0 + cfg.T.

    A non-finite field or a field above ``cfg.blowup_threshold`` halts the
    run; the partial history is still returned (and written).
    """
    exps = cfg.exponent_set()
    m = float(cfg.m)
    state = state if state is not None else build_initial_state(cfg)
    t_end = state.time + cfg.T

    logger.info("=" * 60)
    logger.info(f"RUN {cfg.cell_key()}")
    logger.info("=" * 60)

    diag = state_diagnostics(state, m)
    mass_u0 = diag.mass
    n0_half = diag.n_half
    n1_minus_half = diag.nt_minus_half
    bound = GrowthBound.from_initial(n0_half, n1_minus_half, mass_u0, m, cfg.bound_c_front, cfg.bound_c_rate)
    tracker = DoublingTracker(diag.wave_size)

    history = RunHistory(bound=bound, mass_u0=mass_u0, m=m)
    history.rows.append(_row(state.time, diag, bound, mass_u0, m, False))
    regime: Optional[bool] = None

    while state.time < t_end - 1e-12 * max(1.0, abs(t_end)):
        mass_t = mass(state.u)
        n_pm = sobolev_norm(state.n_plus, 0.5)
        in_regime = n_pm >= mass_t ** (2.0 * m)
        if regime is not None and in_regime != regime:
            side = "entered" if in_regime else "left"
            logger.warning(
                f"t={state.time:.6g}: {side} the regime ||n±|| >= ||u||^(2m) "
                f"({n_pm:.4g} vs {mass_t ** (2.0 * m):.4g}); "
                f"{'all three' if in_regime else 'mass-only'} window conditions in use"
            )
            history.regime_switches.append(state.time)
        regime = in_regime

        delta = local_delta(mass_t, n_pm, exps, cfg.c_local, mass_only=not in_regime)
        forecast = doubling_forecast(mass_t, n_pm, exps, cfg.c_local)
        history.schedule_log.append(ScheduleEntry(
            t=state.time,
            delta=delta,
            windows=forecast.windows,
            advance=forecast.advance,
            in_regime=in_regime,
            mass=mass_t,
            n_pm_half=n_pm,
        ))

        window = min(delta, t_end - state.time)
        step = min(cfg.dt, window / MIN_STEPS_PER_WINDOW)
        try:
            nxt = integrate(state, window, step, m, dealias=cfg.dealias)
        except NonFiniteFieldError as e:
            history.status = "halted"
            history.message = f"non-finite field in window starting at t={state.time:.6g}: {e}"
            logger.error(history.message)
            break
        if _blown_up(nxt, cfg.blowup_threshold):
            history.status = "halted"
            history.message = (
                f"blowup detected at t={nxt.time:.6g}: max|field| = {nxt.max_abs:.4g} "
                f"(threshold {cfg.blowup_threshold:g})"
            )
            logger.error(history.message)
            break

        state = nxt
        diag = state_diagnostics(state, m)
        doubled = tracker.observe(state.time, diag.wave_size)
        history.rows.append(_row(state.time, diag, bound, mass_u0, m, doubled))

    history.doubling_events = list(tracker.events)
    history.final_state = state
    logger.info(
        f"run {history.status}: t={state.time:.6g}, {len(history.rows)} rows, "
        f"{len(history.doubling_events)} doublings, {len(history.regime_switches)} regime switches"
    )
    if write_outputs:
        write_history(history, cfg.out, m=cfg.m)
    return history


def write_history(history: RunHistory, out_dir: str | Path, m=None) -> dict[str, Path]:
    """history.csv, schedule.csv, doublings.csv and final.kgs under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "history": out / "history.csv",
        "schedule": out / "schedule.csv",
        "doublings": out / "doublings.csv",
    }
    history.to_frame().to_csv(paths["history"], index=False, float_format=CSV_FLOAT_FORMAT)
    history.schedule_frame().to_csv(paths["schedule"], index=False, float_format=CSV_FLOAT_FORMAT)
    pd.DataFrame(history.doubling_events, columns=["t", "wave_size"]).to_csv(
        paths["doublings"], index=False, float_format=CSV_FLOAT_FORMAT
    )
    if history.final_state is not None and history.final_state.is_finite:
        paths["checkpoint"] = save_checkpoint(
            history.final_state, m if m is not None else history.m, out / "final.kgs"
        )
    logger.info(f"history written to {out}")
    return paths


# ─── Picard contraction experiment ────────────────────────────────────────────

@dataclass
class PicardExperimentReport:
    base_delta: float
    c_local: float
    rows: list[dict] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows).sort_values("delta", kind="stable").reset_index(drop=True)

    def ratio_at(self, factor: float) -> float:
        for row in self.rows:
            if row["factor"] == factor:
                return row["contraction_ratio"]
        raise KeyError(factor)

    @property
    def compliant_ratio(self) -> float:
        """Worst measured ratio over converged rungs with δ within the local bound."""
        values = [
            row["contraction_ratio"] for row in self.rows
            if row["compliant"] and row["converged"]
        ]
        return max(values) if values else math.nan


def _relative_gap(a: SimState, b: SimState) -> float:
    scale = max(a.max_abs, b.max_abs, 1e-300)
    gap = max(
        float(np.max(np.abs(a.u.values - b.u.values))),
        float(np.max(np.abs(a.n_plus.values - b.n_plus.values))),
        float(np.max(np.abs(a.n_minus.values - b.n_minus.values))),
    )
    return gap / scale


def run_picard_experiment(
    cfg: RunConfig,
    factors: Sequence[float] = PICARD_LADDER,
    state: Optional[SimState] = None,
    exps: Optional[ExponentSet] = None,
) -> PicardExperimentReport:
    """
    Run the Picard solver at δ·factor for each factor, δ from the local
    window conditions at ``cfg.c_local``.

    Rungs above δ = 1 are skipped. A divergent rung with factor > 1 is
    recorded; divergence at a compliant rung propagates.
    """
    exps = exps or cfg.exponent_set()
    m = float(cfg.m)
    state = state if state is not None else build_initial_state(cfg)
    base = local_delta(mass(state.u), sobolev_norm(state.n_plus, 0.5), exps, cfg.c_local)
    report = PicardExperimentReport(base_delta=base, c_local=cfg.c_local)

    logger.info("=" * 60)
    logger.info(f"PICARD LADDER  base δ={base:.6g}  c_local={cfg.c_local:g}")
    logger.info("=" * 60)

    for factor in factors:
        delta = base * factor
        row = {
            "factor": factor,
            "delta": delta,
            "compliant": factor <= 1.0,
            "converged": False,
            "iterations": 0,
            "contraction_ratio": math.nan,
            "last_distance": math.nan,
            "splitting_gap": math.nan,
            "splitting_dt": math.nan,
            "status": "ok",
        }
        if delta > 1.0:
            logger.warning(f"skipping rung factor={factor:g}: δ={delta:.4g} exceeds 1")
            row["status"] = "skipped"
            report.rows.append(row)
            continue

        picard_cfg = PicardConfig(
            delta=delta,
            norm_exponents=exps,
            quad_points=cfg.picard_quad_points,
            max_iters=cfg.picard_max_iters,
            fp_tolerance=cfg.picard_tolerance,
            quadrature=cfg.picard_quadrature,
            c_local=cfg.c_local,
        )
        try:
            result = picard_local_solve(state, picard_cfg, m)
        except PicardDivergenceError as e:
            if factor <= 1.0:
                raise
            logger.warning(f"rung factor={factor:g} diverged: {e}")
            row.update(
                status="diverged",
                iterations=len(e.distances),
                contraction_ratio=max(e.ratios) if e.ratios else math.nan,
                last_distance=e.distances[-1] if e.distances else math.nan,
            )
            report.rows.append(row)
            continue

        dt = delta / cfg.picard_quad_points
        reference = integrate(state, delta, dt, m, dealias=False)
        row.update(
            converged=True,
            iterations=result.iterations,
            contraction_ratio=result.contraction_ratio,
            last_distance=result.distances[-1],
            splitting_gap=_relative_gap(result.state, reference),
            splitting_dt=dt,
        )
        logger.info(
            f"factor={factor:g} δ={delta:.4g}: {result.iterations} iterations, "
            f"ratio {result.contraction_ratio:.4g}"
        )
        report.rows.append(row)

    return report
