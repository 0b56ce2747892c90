"""Ensemble checks of the linear and nonlinear space-time estimates."""

import math
from fractions import Fraction
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

from src.exponents.algebra import bourgain_exponents
from src.fieldcore.symbols import DispersionSymbol
from src.xsb.estimates import (
    EnsembleSpec,
    InadmissibleExponentsError,
    member_function,
    nonlinear_estimate_check,
    nonlinear_ratios,
    sample,
    strichartz_check,
    validate_linear_exponents,
)
from src.xsb.norms import SpaceTimeField

SMALL = EnsembleSpec(size=4, seed=7)


# ─── Admissibility ────────────────────────────────────────────────────────────

def test_interpolated_exponents_return_zero_regularity():
    assert validate_linear_exponents("schrodinger_interpolated", 6, 6, 0.6) == 0.0


@pytest.mark.parametrize("q, r", [(6, 6), (6.0, 6.0), (12, 3), (5, 10)])
def test_interpolated_lower_endpoint_is_admitted(q, r):
    # 2/q == 1/2 - 1/r exactly; float subtraction lands one ulp above
    assert validate_linear_exponents("schrodinger_interpolated", q, r, 0.9) == 0.0


def test_interpolated_b_threshold_is_strict():
    with pytest.raises(InadmissibleExponentsError, match="1/2"):
        validate_linear_exponents("schrodinger_interpolated", 6, 6, 0.5)


def test_strichartz_endpoint_is_admitted():
    assert validate_linear_exponents("schrodinger_strichartz", 12, 6, 0.6) == pytest.approx(0.0, abs=1e-15)
    assert validate_linear_exponents("schrodinger_strichartz", 4, math.inf, 0.6) == 0.0


def test_strichartz_regularity_index():
    assert validate_linear_exponents("schrodinger_strichartz", 8, 4, 0.6) == pytest.approx(0.5 - 0.25 - 0.25)


@pytest.mark.parametrize("estimate_id, q, r, b", [
    ("schrodinger_interpolated", 6, 6, 0.4),
    ("schrodinger_interpolated", 6, 1, 0.9),
    ("schrodinger_strichartz", 2, 6, 0.6),
    ("schrodinger_strichartz", 8, 4, 0.5),
    ("halfwave_lp_hs", 4, 4, 0.6),
    ("halfwave_lp_hs", 4, 2, 0.2),
])
def test_inadmissible_exponents_rejected(estimate_id, q, r, b):
    with pytest.raises(InadmissibleExponentsError):
        validate_linear_exponents(estimate_id, q, r, b)


def test_inadmissible_check_runs_nothing():
    fake = MagicMock()
    with patch("src.xsb.estimates.sample", fake):
        with pytest.raises(InadmissibleExponentsError):
            strichartz_check(6, 6, 0.49, SMALL)
    fake.assert_not_called()


# ─── Ensembles ────────────────────────────────────────────────────────────────

def test_members_are_deterministic():
    a = sample(SMALL, member_function(SMALL, 1, DispersionSymbol.SCHRODINGER))
    b = sample(SMALL, member_function(SMALL, 1, DispersionSymbol.SCHRODINGER))
    assert np.array_equal(a.values, b.values)
    c = sample(SMALL, member_function(SMALL, 2, DispersionSymbol.SCHRODINGER))
    assert not np.array_equal(a.values, c.values)


def test_members_vanish_outside_the_window():
    f = sample(SMALL, member_function(SMALL, 0, DispersionSymbol.PLUS))
    outside = np.abs(f.times) >= 2 * SMALL.delta
    assert np.all(f.values[outside] == 0)


def test_refined_ensemble_doubles_resolution():
    fine = SMALL.refined()
    assert fine.grid.num_points == 2 * SMALL.grid.num_points
    assert fine.num_times == 2 * SMALL.num_times
    assert fine.grid.domain_length == SMALL.grid.domain_length


def test_unknown_family_rejected():
    with pytest.raises(ValueError):
        EnsembleSpec(families=("pink",))


# ─── Linear estimates ─────────────────────────────────────────────────────────

def test_interpolated_check_report():
    report = strichartz_check(6, 6, 0.6, SMALL)
    assert report.ensemble_size == 4
    assert all(math.isfinite(r) and r > 0 for r in report.ratios)
    assert report.worst_ratio >= report.ratio_quantiles[0.9] >= report.ratio_quantiles[0.5]
    assert 0.5 < report.grid_refinement_trend < 2.0
    frame = report.to_frame()
    assert len(frame) == 5
    assert frame.iloc[-1]["row"] == "summary"


def test_strichartz_check_with_infinite_r():
    report = strichartz_check(4, math.inf, 0.55, SMALL, "schrodinger_strichartz", refine=False)
    assert all(math.isfinite(r) for r in report.ratios)
    assert report.refined_ratios == []
    assert math.isnan(report.grid_refinement_trend)


def test_halfwave_check():
    report = strichartz_check(1000, 2, 0.5, SMALL, "halfwave_lp_hs", s=0.5, refine=False)
    assert all(math.isfinite(r) and r > 0 for r in report.ratios)
    assert report.params["s"] == 0.5


def test_thread_pool_matches_serial_run():
    serial = strichartz_check(6, 6, 0.6, SMALL, refine=False)
    pooled = strichartz_check(6, 6, 0.6, SMALL.model_copy(update={"workers": 2}), refine=False)
    assert serial.ratios == pooled.ratios


def test_worst_ratio_is_stable_under_ensemble_growth():
    small = strichartz_check(6, 6, 0.6, SMALL, refine=False)
    large = strichartz_check(6, 6, 0.6, SMALL.model_copy(update={"size": 8}), refine=False)
    assert small.worst_ratio <= large.worst_ratio <= 2 * small.worst_ratio


# ─── Nonlinear estimates ──────────────────────────────────────────────────────

def test_nonlinear_ratios_vanish_with_u():
    zero = SpaceTimeField(SMALL.grid, SMALL.t_span, np.zeros((SMALL.num_times, SMALL.grid.num_points)))
    n = sample(SMALL, member_function(SMALL, 0, DispersionSymbol.PLUS))
    assert nonlinear_ratios(zero, n, 1.0, 0.45, 0.45, -0.1, -0.1) == (0.0, 0.0)


def test_nonlinear_ratios_decrease_with_b1():
    u = sample(SMALL, member_function(SMALL, 1, DispersionSymbol.SCHRODINGER))
    n = sample(SMALL, member_function(SMALL, 1, DispersionSymbol.PLUS, stream=1))
    low = nonlinear_ratios(u, n, 1.0, 0.40, 0.45, -0.1, -0.1)
    high = nonlinear_ratios(u, n, 1.0, 0.45, 0.45, -0.1, -0.1)
    assert high[0] <= low[0]
    assert high[1] <= low[1]


@pytest.mark.parametrize("m, eps", [(Fraction(1), Fraction(1, 5)), (Fraction(3, 2), Fraction(1, 10))])
def test_nonlinear_check_is_finite_and_refinement_stable(m, eps):
    schrodinger, wave = nonlinear_estimate_check(m, bourgain_exponents(m, eps), SMALL)
    for report in (schrodinger, wave):
        assert all(math.isfinite(r) and r > 0 for r in report.ratios)
        assert 0.5 < report.grid_refinement_trend < 2.0
    assert schrodinger.estimate_id == "nonlinear_schrodinger_source"
    assert wave.estimate_id == "nonlinear_wave_source"
