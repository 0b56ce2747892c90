"""
KGS Lab — Sweeps
=================
Runs independent configurations (in worker processes when asked), writes
each cell under its own directory, and merges one summary row per cell
sorted by the cell key. A failing cell is recorded and the sweep goes on.
"""

from __future__ import annotations

import hashlib
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from src.exponents.algebra import format_fraction
from src.harness.run_config import RunConfig
from src.harness.runner import CSV_FLOAT_FORMAT, run_global

logger = logging.getLogger(__name__)

SUMMARY_NAME = "sweep_summary.csv"


def cell_dir(root: str | Path, cfg: RunConfig) -> Path:
    digest = hashlib.sha1(cfg.cell_key().encode()).hexdigest()[:12]
    return Path(root) / f"cell_{digest}"


def run_cell(cfg: RunConfig) -> dict:
    """One sweep cell; never raises."""
    key = cfg.cell_key()
    summary = {"key": key, "m": format_fraction(cfg.m), "u_amplitude": cfg.u_amplitude,
               "n_amplitude": cfg.n_amplitude, "num_points": cfg.num_points, "dt": cfg.dt, "T": cfg.T}
    try:
        exps = cfg.exponent_set()
        history = run_global(cfg)
        rows = history.rows
        first = history.schedule_log[0] if history.schedule_log else None
        mass0 = rows[0].mass
        scale = first.mass ** (4.0 * float(cfg.m) - 2.0) if first else math.nan
        summary.update(
            status=history.status,
            epsilon=format_fraction(exps.epsilon),
            theta=format_fraction(exps.theta),
            final_time=rows[-1].t,
            mass_drift=abs(rows[-1].mass - mass0) / mass0 if mass0 > 0 else abs(rows[-1].mass),
            energy_drift=abs(rows[-1].energy - rows[0].energy),
            doublings=len(history.doubling_events),
            regime_switches=len(history.regime_switches),
            first_delta=first.delta if first else math.nan,
            first_windows=first.windows if first and first.windows is not None else -1,
            first_advance=first.advance if first else math.nan,
            scaled_advance=first.advance * scale if first else math.nan,
            error="",
        )
    except Exception as e:
        logger.error(f"sweep cell {key} failed: {e}")
        summary.update(status="failed", error=str(e))
    return summary


def sweep(
    configs: Iterable[RunConfig],
    out_dir: str | Path,
    workers: Optional[int] = None,
) -> pd.DataFrame:
    """Run every config under ``out_dir`` and write the merged summary CSV."""
    root = Path(out_dir)
    cells = [cfg.with_updates(out=str(cell_dir(root, cfg))) for cfg in configs]
    workers = workers or (cells[0].sweep_workers if cells else 1)

    logger.info("=" * 60)
    logger.info(f"SWEEP: {len(cells)} cells, {workers} workers")
    logger.info("=" * 60)

    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(run_cell, cells))
    else:
        summaries = [run_cell(cfg) for cfg in cells]

    frame = pd.DataFrame(summaries).sort_values("key", kind="stable").reset_index(drop=True)
    root.mkdir(parents=True, exist_ok=True)
    frame.to_csv(root / SUMMARY_NAME, index=False, float_format=CSV_FLOAT_FORMAT)
    failed = int((frame["status"] == "failed").sum())
    if failed:
        logger.warning(f"{failed} of {len(frame)} sweep cells failed")
    return frame


def scaling_sweep(base: RunConfig, lambdas: Sequence[float]) -> list[RunConfig]:
    """u0 -> λ·u0 with everything else fixed."""
    return [base.with_updates(u_amplitude=base.u_amplitude * lam) for lam in lambdas]


def m_sweep(base: RunConfig, m_values: Sequence[Fraction | str]) -> list[RunConfig]:
    """Same data for several m; exponents revert to the region witness."""
    return [base.with_updates(m=Fraction(m), epsilon=None, theta=None) for m in m_values]


def advance_scaling(frame: pd.DataFrame, reference_amplitude: float) -> pd.DataFrame:
    """
    Ratio of the forecast advance of every cell to the reference cell, next to
    the predicted λ^{-(4m-2)}.
    """
    out = frame.copy()
    ref = out.loc[np.isclose(out["u_amplitude"], reference_amplitude)]
    if ref.empty:
        raise ValueError(f"no cell with u_amplitude = {reference_amplitude}")
    m = out["m"].map(lambda text: float(Fraction(text)))
    lam = out["u_amplitude"] / reference_amplitude
    out["advance_ratio"] = out["first_advance"] / float(ref["first_advance"].iloc[0])
    out["predicted_ratio"] = lam ** (-(4.0 * m - 2.0))
    return out
