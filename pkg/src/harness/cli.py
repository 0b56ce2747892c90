"""
KGS Lab — Command Line
=======================
Subcommands: simulate, picard, region, exponents, check-estimates, sweep.

Exit codes: 0 completed, 2 halted on blowup, 3 invalid configuration.
"""

from __future__ import annotations

import argparse
import logging
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import pandas as pd
from rich.console import Console
from rich.table import Table

from src.exponents.algebra import ExponentConstraintError, ScalingCase, critical_indices, format_fraction
from src.harness.checkpoint import CheckpointError
from src.harness.figures import emit_region_figures
from src.harness.run_config import PRESETS, ConfigError, RunConfig
from src.harness.runner import CSV_FLOAT_FORMAT, run_global, run_picard_experiment
from src.harness.sweep import m_sweep, scaling_sweep, sweep
from src.xsb.estimates import (
    ESTIMATE_IDS,
    EnsembleSpec,
    InadmissibleExponentsError,
    homogeneous_estimate_check,
    nonlinear_estimate_check,
    strichartz_check,
)

logger = logging.getLogger(__name__)
console = Console()

EXIT_OK = 0
EXIT_HALTED = 2
EXIT_INVALID = 3


def _shared_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--m", help="coupling power, rational in [1, 2) (e.g. 3/2)")
    parent.add_argument("--grid-points", dest="num_points", type=int)
    parent.add_argument("--domain-length", type=float)
    parent.add_argument("--dt", type=float)
    parent.add_argument("--T", dest="T", type=float)
    parent.add_argument("--ic", choices=PRESETS)
    parent.add_argument("--epsilon", help="rational or 'auto'")
    parent.add_argument("--theta", help="rational or 'auto'")
    parent.add_argument("--c-local", type=float)
    parent.add_argument("--seed", type=int)
    parent.add_argument("--out")
    parent.add_argument("--config", help="flat key = value config file")
    parent.add_argument("--no-dealias", dest="dealias", action="store_false", default=None)
    return parent


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_flags()
    parser = argparse.ArgumentParser(prog="kgs-lab", description="KGS_m simulation and verification lab")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", parents=[shared], help="global run with diagnostics")

    picard = sub.add_parser("picard", parents=[shared], help="contraction ratio vs window size")
    picard.add_argument("--quadrature", dest="picard_quadrature", choices=("simpson", "gauss"))
    picard.add_argument("--quad-points", dest="picard_quad_points", type=int)

    region = sub.add_parser("region", parents=[shared], help="admissible (θ, ε) region data")
    region.add_argument(
        "--m-values", help="comma separated list, any m >= 1 (defaults to --m, which may be 2 here)"
    )
    region.add_argument("--no-dual-bound", dest="dual_bound", action="store_false")

    sub.add_parser("exponents", parents=[shared], help="exponent set and critical indices")

    estimates = sub.add_parser("check-estimates", parents=[shared], help="empirical estimate ratios")
    estimates.add_argument("--estimate", choices=ESTIMATE_IDS + ("all",), default="all")
    estimates.add_argument("--q", type=float, default=6.0)
    estimates.add_argument("--r", type=float, default=6.0)
    estimates.add_argument("--b", type=float, default=0.6)
    estimates.add_argument("--window-b", type=float, default=0.25, help="b for the free-wave window check")
    estimates.add_argument("--s", type=float, default=0.0)
    estimates.add_argument("--ensemble-size", type=int, default=8)
    estimates.add_argument("--no-refine", dest="refine", action="store_false")

    sweeps = sub.add_parser("sweep", parents=[shared], help="independent runs merged into one CSV")
    sweeps.add_argument("--lambdas", help="u0 scale factors, comma separated")
    sweeps.add_argument("--m-values", help="comma separated m values")
    sweeps.add_argument("--workers", type=int)
    return parser


_NON_CONFIG = {
    "command", "config", "m_values", "dual_bound", "estimate", "q", "r", "b", "s",
    "ensemble_size", "refine", "lambdas", "workers", "window_b",
}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG}
    return RunConfig.load(args.config, **overrides)


def _split(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _write(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return path


def _table(title: str, frame: pd.DataFrame, limit: int = 20) -> None:
    table = Table(title=title)
    for col in frame.columns:
        table.add_column(str(col))
    for _, row in frame.head(limit).iterrows():
        table.add_row(*(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))
    console.print(table)


# ─── Commands ─────────────────────────────────────────────────────────────────

def cmd_simulate(cfg: RunConfig, args) -> int:
    history = run_global(cfg)
    report = history.growth_report()
    frame = history.to_frame()
    _table(f"Diagnostics ({history.status})", frame.iloc[:: max(1, len(frame) // 10)])
    _write(report.frontier, Path(cfg.out) / "growth_frontier.csv")
    console.print(
        f"growth bound: selected c_rate={report.selected_c_rate}, c_front={report.selected_c_front}; "
        f"fixed pair holds: {report.fixed_pair_holds}"
    )
    if not history.completed:
        console.print(f"[red]halted:[/red] {history.message}")
        return EXIT_HALTED
    return EXIT_OK


def cmd_picard(cfg: RunConfig, args) -> int:
    report = run_picard_experiment(cfg)
    frame = report.to_frame()
    _write(frame, Path(cfg.out) / "picard.csv")
    _table(f"Picard ladder (base δ={report.base_delta:.4g})", frame)
    return EXIT_OK


def cmd_region(cfg: RunConfig, args) -> int:
    m_values = _split(args.m_values) if args.m_values else [format_fraction(cfg.m)]
    try:
        m_values = [Fraction(m) for m in m_values]
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"--m-values must be rationals: {args.m_values}") from e
    if any(m < 1 for m in m_values):
        raise ConfigError(f"region data needs m >= 1, got {args.m_values}")
    summary = emit_region_figures(m_values, cfg.out, impose_dual_bound=args.dual_bound)
    _table("Admissible region", summary)
    return EXIT_OK


def cmd_exponents(cfg: RunConfig, args) -> int:
    exps = cfg.exponent_set()
    _write(pd.DataFrame([exps.as_row()]), Path(cfg.out) / "exponents.csv")
    critical = pd.DataFrame([
        {
            "case": case.value,
            "k": format_fraction(ci.k),
            "l": format_fraction(ci.l),
            "subcritical_l2_h_half": ci.is_subcritical(0, Fraction(1, 2)),
        }
        for case in ScalingCase
        for ci in [critical_indices(cfg.m, 1, case)]
    ])
    _write(critical, Path(cfg.out) / "critical_indices.csv")
    _table("Exponent set", pd.DataFrame([exps.as_row()]))
    _table("Critical indices (d = 1)", critical)
    return EXIT_OK


def cmd_check_estimates(cfg: RunConfig, args) -> int:
    spec = EnsembleSpec(size=args.ensemble_size, seed=cfg.seed, workers=cfg.ensemble_workers)
    wanted = ESTIMATE_IDS if args.estimate == "all" else (args.estimate,)
    frames = []
    for estimate_id in wanted:
        if estimate_id in ("schrodinger_strichartz", "schrodinger_interpolated"):
            report = strichartz_check(args.q, args.r, args.b, spec, estimate_id, refine=args.refine)
            frames.append(report.to_frame())
        elif estimate_id == "halfwave_lp_hs":
            report = strichartz_check(args.q, 2, args.b, spec, estimate_id, s=args.s, refine=args.refine)
            frames.append(report.to_frame())
        elif estimate_id == "homogeneous_free_wave":
            frames.append(homogeneous_estimate_check(args.window_b, args.s).to_frame())
        elif estimate_id == "nonlinear_schrodinger_source" or (
            estimate_id == "nonlinear_wave_source" and args.estimate != "all"
        ):
            # one ensemble pass yields both nonlinear reports
            reports = nonlinear_estimate_check(cfg.m, cfg.exponent_set(), spec, refine=args.refine)
            frames.extend(r.to_frame() for r in reports)
    frame = pd.concat(frames, ignore_index=True)
    _write(frame, Path(cfg.out) / "estimates.csv")
    if "row" in frame:
        frame = frame[frame["row"] != "member"]
    _table("Estimate summary", frame[[c for c in ("estimate_id", "ratio", "ratio_refined", "slope") if c in frame]])
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    configs = [cfg]
    if args.lambdas:
        configs = scaling_sweep(cfg, [float(v) for v in _split(args.lambdas)])
    if args.m_values:
        configs = [c for base in configs for c in m_sweep(base, _split(args.m_values))]
    frame = sweep(configs, cfg.out, workers=args.workers)
    _table("Sweep summary", frame.drop(columns=["key"]))
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "picard": cmd_picard,
    "region": cmd_region,
    "exponents": cmd_exponents,
    "check-estimates": cmd_check_estimates,
    "sweep": cmd_sweep,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "region":
        # the region solver reports m >= 2 as infeasible; a run config would reject it
        args.m_values = args.m_values or args.m
        args.m = None
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, CheckpointError, ExponentConstraintError, InadmissibleExponentsError) as e:
        logger.error(f"invalid configuration: {e}")
        console.print(f"[red]invalid configuration:[/red] {e}")
        return EXIT_INVALID
