"""
KGS Lab — Region Figure Data
=============================
Plot data (not plots) for the admissible (θ, ε) region: one polyline CSV
per m, columns m, theta, epsilon, vertex_index, plus region_summary.csv.
An empty region writes a header-only polyline and status "infeasible".
"""

from __future__ import annotations

import logging
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import pandas as pd

from src.exponents.algebra import format_fraction
from src.exponents.region import RegionReport, admissible_region, representative_m_values

logger = logging.getLogger(__name__)

POLYLINE_COLUMNS = ["m", "theta", "epsilon", "vertex_index"]
SUMMARY_NAME = "region_summary.csv"


def polyline_name(m: Fraction) -> str:
    return f"region_m_{m.numerator}_{m.denominator}.csv"


def _summary_row(report: RegionReport, source: str) -> dict:
    witness = report.witness
    return {
        "m": format_fraction(report.m),
        "source": source,
        "status": "feasible" if report.feasible else "infeasible",
        "num_vertices": len(report.vertices),
        "area": format_fraction(report.area),
        "witness_theta": format_fraction(witness[0]) if witness else "",
        "witness_epsilon": format_fraction(witness[1]) if witness else "",
        "active_constraints": ";".join(report.active_constraints),
        "dual_bound": report.impose_dual_bound,
    }


def emit_region_figures(
    m_values: Iterable[Fraction | str | int],
    out_dir: str | Path,
    include_caption_ranges: bool = True,
    impose_dual_bound: bool = True,
) -> pd.DataFrame:
    """Write polylines for each m (and one midpoint per shape range); returns the summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    jobs = [(Fraction(m), "requested") for m in m_values]
    if include_caption_ranges:
        jobs += [(m, f"range_{i + 1}") for i, m in enumerate(representative_m_values())]

    summary = []
    for m, source in jobs:
        report = admissible_region(m, impose_dual_bound=impose_dual_bound)
        rows = report.polyline_rows() if report.feasible else []
        frame = pd.DataFrame(rows, columns=POLYLINE_COLUMNS)
        frame.to_csv(out / polyline_name(m), index=False)
        summary.append(_summary_row(report, source))
        logger.info(
            f"m={format_fraction(m)} ({source}): "
            f"{'feasible' if report.feasible else 'infeasible'}, {len(report.vertices)} vertices"
        )

    frame = pd.DataFrame(summary)
    frame.to_csv(out / SUMMARY_NAME, index=False)
    return frame
