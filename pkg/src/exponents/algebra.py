"""
KGS Lab — Exponent Algebra
===========================
Exact rational exponent bookkeeping for the KGS system with coupling power m:

- critical Sobolev indices of the four truncated (dilation-invariant) systems,
- the Bourgain exponents (b1, b2, b1', b2') used by the local theory,
- the local window δ and the doubling forecast (N, N·δ) of the global iteration.

All exponent arithmetic uses ``fractions.Fraction``; floats only enter when a
δ is combined with measured norms.

Usage:
    from src.exponents.algebra import bourgain_exponents, local_delta
    exps = bourgain_exponents(Fraction(1), Fraction(1, 5))
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Union

logger = logging.getLogger(__name__)

Rational = Union[Fraction, int, str]

DELTA_CAP = 1.0


class ExponentConstraintError(ValueError):
    """An exponent choice violates one of the admissibility constraints."""


def as_fraction(value: Rational | float) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**6)
    return Fraction(value)


def format_fraction(value: Fraction) -> str:
    """Render as "p/q" (integers as "p/1" is avoided: plain "p")."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


# ─── Critical indices ─────────────────────────────────────────────────────────

class ScalingCase(str, Enum):
    DROP_LAPLACIAN_U = "drop_laplacian_u"
    DROP_DT_U = "drop_dt_u"
    DROP_HALFWAVE_N = "drop_halfwave_n"
    DROP_DT_N = "drop_dt_n"


# Largest m (d = 1) for which L² x H^{1/2} data, resp. L² x L² data, is
# subcritical in each truncated system.
_SUBCRITICAL_M_LIMIT = {
    ScalingCase.DROP_LAPLACIAN_U: Fraction(2),
    ScalingCase.DROP_DT_U: Fraction(5, 2),
    ScalingCase.DROP_HALFWAVE_N: Fraction(3),
    ScalingCase.DROP_DT_N: Fraction(5, 2),
}


@dataclass(frozen=True)
class CriticalIndices:
    """Scaling-critical (k, l) for (u0, n±(0)) in H^k x H^l."""
    k: Fraction
    l: Fraction
    case_tag: ScalingCase
    u_weight: Fraction         # u_λ = λ^{u_weight} u(λ^{time_power} t, λ x)
    n_weight: Fraction
    time_power: int

    def is_subcritical(self, k_data: Rational = 0, l_data: Rational = Fraction(1, 2)) -> bool:
        return as_fraction(k_data) > self.k and as_fraction(l_data) > self.l


def subcritical_m_limit(case: ScalingCase | str) -> Fraction:
    return _SUBCRITICAL_M_LIMIT[ScalingCase(case)]


def critical_indices(m: Rational, d: int, case_tag: ScalingCase | str) -> CriticalIndices:
    """Exact critical indices for the truncated system named by ``case_tag``."""
    m = as_fraction(m)
    if m < 1:
        raise ExponentConstraintError(f"m must be >= 1, got {format_fraction(m)}")
    if d < 1:
        raise ExponentConstraintError(f"dimension d must be >= 1, got {d}")
    case = ScalingCase(case_tag)
    half_d = Fraction(d, 2)

    if case is ScalingCase.DROP_LAPLACIAN_U:
        u_w, n_w, power = Fraction(3, 4 * m - 2), (2 - m) / (2 * m - 1), 1
    elif case is ScalingCase.DROP_HALFWAVE_N:
        u_w, n_w, power = Fraction(5, 4 * m - 2), (3 - m) / (2 * m - 1), 2
    else:
        u_w = n_w = Fraction(2, 2 * m - 1)
        power = 1 if case is ScalingCase.DROP_DT_U else 2

    return CriticalIndices(
        k=half_d - u_w,
        l=half_d - n_w,
        case_tag=case,
        u_weight=u_w,
        n_weight=n_w,
        time_power=power,
    )


# ─── Bourgain exponents ───────────────────────────────────────────────────────

def epsilon_bounds(m: Rational) -> tuple[Fraction, Fraction]:
    """(strict upper bound 1 - m/2, inclusive upper bound 1/(4m)) on ε."""
    m = as_fraction(m)
    return 1 - m / 2, Fraction(1) / (4 * m)


def theta_upper(m: Rational, epsilon: Rational) -> Fraction:
    """Supremum of admissible θ for a given ε (may be <= 0)."""
    m, eps = as_fraction(m), as_fraction(epsilon)
    return min(2 - m - 2 * eps, m + Fraction(1) / (2 * m) - 2 + 4 * m * eps)


@dataclass(frozen=True)
class ExponentSet:
    """Exponents of the nonlinear estimates; exact rationals throughout."""
    m: Fraction
    epsilon: Fraction
    theta: Fraction
    b1: Fraction
    b2: Fraction
    b1p: Fraction
    b2p: Fraction

    def __post_init__(self):
        expected_b = (2 * self.m - 1) / (4 * self.m) + self.epsilon
        expected_bp = Fraction(-1, 2) + 2 * self.m * self.epsilon
        if not (self.b1 == self.b2 == expected_b):
            raise ExponentConstraintError("b1 = b2 = (2m-1)/(4m) + ε must hold exactly")
        if not (self.b1p == self.b2p == expected_bp):
            raise ExponentConstraintError("b1' = b2' = -1/2 + 2mε must hold exactly")
        # b1 reaches 1/2 exactly at the dual endpoint b' = 0
        if not (0 < self.b1 < Fraction(1, 2) or (self.b1 == Fraction(1, 2) and self.b1p == 0)):
            raise ExponentConstraintError(f"0 < b1 < 1/2 violated: b1 = {format_fraction(self.b1)}")
        if not (Fraction(-1, 2) < self.b1p <= 0):
            raise ExponentConstraintError(f"-1/2 < b' <= 0 violated: b' = {format_fraction(self.b1p)}")
        if 2 * self.m + self.b1p + self.b2p != (4 * self.m - 1) * self.b1 + self.b2:
            raise ExponentConstraintError("balance identity 2m + b1' + b2' = (4m-1)b1 + b2 failed")

    @property
    def gap(self) -> Fraction:
        """m + 1/2 + b2' - (2m-1)b1 - b2; identically 1/2."""
        return self.m + Fraction(1, 2) + self.b2p - (2 * self.m - 1) * self.b1 - self.b2

    def contraction_exponents(self) -> tuple[Fraction, Fraction, Fraction]:
        """The δ-exponents of the three local-window conditions."""
        half = self.m + Fraction(1, 2)
        return (
            half + self.b2p - (2 * self.m - 1) * self.b1 - self.b2,
            half + self.b1p - (2 * self.m - 1) * self.b1 - self.b2,
            half + self.b2p - 2 * self.m * self.b1,
        )

    @property
    def dual_endpoint(self) -> bool:
        """True when ε = 1/(4m), i.e. b' = 0 sits on the inhomogeneous-estimate boundary."""
        return self.b1p == 0

    def as_row(self) -> dict:
        return {
            "m": format_fraction(self.m),
            "epsilon": format_fraction(self.epsilon),
            "theta": format_fraction(self.theta),
            "b1": format_fraction(self.b1),
            "b2": format_fraction(self.b2),
            "b1p": format_fraction(self.b1p),
            "b2p": format_fraction(self.b2p),
            "gap": format_fraction(self.gap),
            "dual_endpoint": self.dual_endpoint,
        }


def bourgain_exponents(
    m: Rational,
    epsilon: Rational,
    theta: Optional[Rational] = None,
) -> ExponentSet:
    """
    Build the exponent set for (m, ε).

    When ``theta`` is omitted, half the largest admissible θ for this ε is used.
    """
    m, eps = as_fraction(m), as_fraction(epsilon)
    if not (1 <= m < 2):
        raise ExponentConstraintError(f"1 <= m < 2 violated: m = {format_fraction(m)}")
    if eps <= 0:
        raise ExponentConstraintError(f"ε > 0 violated: ε = {format_fraction(eps)}")
    strict_cap, dual_cap = epsilon_bounds(m)
    if eps >= strict_cap:
        raise ExponentConstraintError(
            f"ε < 1 - m/2 = {format_fraction(strict_cap)} violated: ε = {format_fraction(eps)}"
        )
    if eps > dual_cap:
        raise ExponentConstraintError(
            f"ε <= 1/(4m) = {format_fraction(dual_cap)} violated: ε = {format_fraction(eps)}"
        )
    if eps == dual_cap:
        logger.warning(f"ε = 1/(4m) for m = {format_fraction(m)}: b' = 0 sits on the endpoint")

    if theta is None:
        sup = theta_upper(m, eps)
        if sup <= 0:
            raise ExponentConstraintError(
                f"no θ > 0 satisfies θ - 4mε < m + 1/(2m) - 2 and θ + 2ε < 2 - m "
                f"for m = {format_fraction(m)}, ε = {format_fraction(eps)}"
            )
        th = sup / 2
    else:
        th = as_fraction(theta)
        if th <= 0:
            raise ExponentConstraintError(f"θ > 0 violated: θ = {format_fraction(th)}")
        if not th + 2 * eps < 2 - m:
            raise ExponentConstraintError("θ + 2ε < 2 - m violated")
        if not th - 4 * m * eps < m + Fraction(1) / (2 * m) - 2:
            raise ExponentConstraintError("θ - 4mε < m + 1/(2m) - 2 violated")

    b = (2 * m - 1) / (4 * m) + eps
    bp = Fraction(-1, 2) + 2 * m * eps
    return ExponentSet(m=m, epsilon=eps, theta=th, b1=b, b2=b, b1p=bp, b2p=bp)


# ─── Local window and doubling forecast ───────────────────────────────────────

def local_delta(
    mass_u0: float,
    n_half_norm: float,
    exps: ExponentSet,
    c_local: float = 1.0,
    mass_only: bool = False,
) -> float:
    """
    Local window δ from the three contraction conditions.

    Each condition reads δ^{1/2} Q <= 1/c_local, so δ = min (c_local Q)^{-2}
    over Q in {|u0|^{2m-1}, |u0|^{2m-2}|n±(0)|, |u0|^{2m}/|n±(0)|}, capped at 1.
    ``mass_only`` (or a vanishing n±) keeps the first condition only.
    """
    if mass_u0 < 0:
        raise ValueError(f"mass_u0 must be >= 0, got {mass_u0}")
    if n_half_norm < 0:
        raise ValueError(f"n_half_norm must be >= 0, got {n_half_norm}")
    if c_local <= 0:
        raise ValueError(f"c_local must be > 0, got {c_local}")
    # u = 0 decouples the system: every condition is vacuous.
    if mass_u0 == 0.0:
        return DELTA_CAP

    m = float(exps.m)
    quantities = [mass_u0 ** (2 * m - 1)]
    if n_half_norm > 0 and not mass_only:
        quantities.append(mass_u0 ** (2 * m - 2) * n_half_norm)
        quantities.append(mass_u0 ** (2 * m) / n_half_norm)

    delta = DELTA_CAP
    for q in quantities:
        if q > 0:
            delta = min(delta, (c_local * q) ** -2)
    return delta


@dataclass(frozen=True)
class DoublingForecast:
    """N windows of size δ guaranteed before |n±|_{H^{1/2}} can double."""
    applicable: bool
    delta: float
    windows: Optional[int]
    advance: float
    band_constant: float
    within_band: Optional[bool]


def doubling_forecast(
    mass_u0: float,
    n_half_norm: float,
    exps: ExponentSet,
    c_local: float = 1.0,
) -> DoublingForecast:
    """
    N = ceil(|n±(0)| / (δ^{1/2} |u0|^{2m})) and advance = N δ.

    Applicable in the regime |n±(0)| >= |u0|^{2m}. The band check tests
    advance·|u0|^{4m-2} in [1/C*, C*] with C* = 2·max(c_local, 1/c_local).
    """
    band = 2.0 * max(c_local, 1.0 / c_local)
    if mass_u0 == 0.0:
        return DoublingForecast(True, DELTA_CAP, None, math.inf, band, None)

    m = float(exps.m)
    delta = local_delta(mass_u0, n_half_norm, exps, c_local)
    if n_half_norm < mass_u0 ** (2 * m):
        return DoublingForecast(False, delta, None, math.nan, band, None)

    x = n_half_norm / (math.sqrt(delta) * mass_u0 ** (2 * m))
    # the factor absorbs roundoff when x is an exact integer
    windows = max(1, math.ceil(x * (1.0 - 1e-12)))
    advance = windows * delta
    scaled = advance * mass_u0 ** (4 * m - 2)
    return DoublingForecast(
        applicable=True,
        delta=delta,
        windows=windows,
        advance=advance,
        band_constant=band,
        within_band=1.0 / band <= scaled <= band,
    )
