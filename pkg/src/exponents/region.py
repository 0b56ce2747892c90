"""
KGS Lab — Admissible (θ, ε) Region
===================================
Exact vertex enumeration of the closed region cut out by the constraints on
(θ, ε) that make the nonlinear estimates close for a given m:

    θ > 0,  0 < ε < 1 - m/2,  ε <= 1/(4m),
    θ + 2ε < 2 - m,  θ - 4mε < m + 1/(2m) - 2.

Every constraint is stored as a·θ + b·ε <= c (or < c) with rational
coefficients. Candidate vertices are the pairwise intersections of the
boundary lines, filtered against the closed system; the region is feasible
exactly when the closed polygon has positive area.

Usage:
    from src.exponents.region import admissible_region
    report = admissible_region(Fraction(3, 2))
    report.feasible, report.witness
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

from src.exponents.algebra import Rational, as_fraction, format_fraction

logger = logging.getLogger(__name__)

Point = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class LinearConstraint:
    """a·θ + b·ε (<= or <) c."""
    label: str
    a: Fraction
    b: Fraction
    c: Fraction
    strict: bool
    description: str = ""

    def value(self, point: Point) -> Fraction:
        theta, eps = point
        return self.a * theta + self.b * eps

    def holds(self, point: Point, closed: bool = False) -> bool:
        v = self.value(point)
        if self.strict and not closed:
            return v < self.c
        return v <= self.c

    def is_tight(self, point: Point) -> bool:
        return self.value(point) == self.c

    def __str__(self) -> str:
        return self.description or self.label


def region_constraints(m: Rational, impose_dual_bound: bool = True) -> list[LinearConstraint]:
    m = as_fraction(m)
    c_lower = m + Fraction(1) / (2 * m) - 2
    constraints = [
        LinearConstraint("theta_positive", Fraction(-1), Fraction(0), Fraction(0), True, "θ > 0"),
        LinearConstraint("epsilon_positive", Fraction(0), Fraction(-1), Fraction(0), True, "ε > 0"),
        LinearConstraint(
            "epsilon_cap", Fraction(0), Fraction(1), 1 - m / 2, True,
            f"ε < 1 - m/2 = {format_fraction(1 - m / 2)}",
        ),
    ]
    if impose_dual_bound:
        constraints.append(LinearConstraint(
            "dual_bound", Fraction(0), Fraction(1), Fraction(1) / (4 * m), False,
            f"ε <= 1/(4m) = {format_fraction(Fraction(1) / (4 * m))}",
        ))
    constraints.extend([
        LinearConstraint(
            "theta_plus_two_epsilon", Fraction(1), Fraction(2), 2 - m, True,
            f"θ + 2ε < 2 - m = {format_fraction(2 - m)}",
        ),
        LinearConstraint(
            "theta_minus_four_m_epsilon", Fraction(1), -4 * m, c_lower, True,
            f"θ - 4mε < m + 1/(2m) - 2 = {format_fraction(c_lower)}",
        ),
    ])
    return constraints


def _intersect(p: LinearConstraint, q: LinearConstraint) -> Optional[Point]:
    det = p.a * q.b - p.b * q.a
    if det == 0:
        return None
    theta = (p.c * q.b - p.b * q.c) / det
    eps = (p.a * q.c - p.c * q.a) / det
    return theta, eps


def _order_counterclockwise(points: list[Point]) -> list[Point]:
    if len(points) <= 2:
        return sorted(points)
    cx = sum(float(p[0]) for p in points) / len(points)
    cy = sum(float(p[1]) for p in points) / len(points)
    return sorted(points, key=lambda p: math.atan2(float(p[1]) - cy, float(p[0]) - cx))


def shoelace_area(vertices: list[Point]) -> Fraction:
    """Exact area of a counterclockwise polygon (0 for fewer than 3 vertices)."""
    if len(vertices) < 3:
        return Fraction(0)
    twice = Fraction(0)
    for (x0, y0), (x1, y1) in zip(vertices, vertices[1:] + vertices[:1]):
        twice += x0 * y1 - x1 * y0
    return abs(twice) / 2


@dataclass
class RegionReport:
    m: Fraction
    constraints: list[LinearConstraint]
    vertices: list[Point]
    area: Fraction
    impose_dual_bound: bool
    witness: Optional[Point] = None
    active_constraints: list[str] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.area > 0

    def contains(self, theta: Rational, epsilon: Rational, closed: bool = False) -> bool:
        point = (as_fraction(theta), as_fraction(epsilon))
        return all(c.holds(point, closed=closed) for c in self.constraints)

    def violated(self, theta: Rational, epsilon: Rational) -> list[str]:
        point = (as_fraction(theta), as_fraction(epsilon))
        return [str(c) for c in self.constraints if not c.holds(point)]

    def polyline_rows(self) -> list[dict]:
        """Rows (m, theta, epsilon, vertex_index) in counterclockwise order."""
        m_text = format_fraction(self.m)
        return [
            {
                "m": m_text,
                "theta": format_fraction(theta),
                "epsilon": format_fraction(eps),
                "vertex_index": i,
            }
            for i, (theta, eps) in enumerate(self.vertices)
        ]


def admissible_region(m: Rational, impose_dual_bound: bool = True) -> RegionReport:
    """
    Enumerate the closed admissible region for ``m``.

    Infeasibility is a valid report: at m = 2 the closure collapses to the
    single point (0, 0) and the area is zero.
    """
    m = as_fraction(m)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {format_fraction(m)}")

    constraints = region_constraints(m, impose_dual_bound)
    candidates: set[Point] = set()
    for p, q in combinations(constraints, 2):
        point = _intersect(p, q)
        if point is not None and all(c.holds(point, closed=True) for c in constraints):
            candidates.add(point)

    vertices = _order_counterclockwise(list(candidates))
    area = shoelace_area(vertices)
    active = [
        c.label for c in constraints
        if any(c.is_tight(v) for v in vertices)
    ]

    witness = None
    if area > 0:
        n = len(vertices)
        witness = (
            sum((v[0] for v in vertices), Fraction(0)) / n,
            sum((v[1] for v in vertices), Fraction(0)) / n,
        )
        logger.debug(f"m = {format_fraction(m)}: {n} vertices, witness {witness}")
    else:
        logger.info(f"m = {format_fraction(m)}: admissible region is empty")

    return RegionReport(
        m=m,
        constraints=constraints,
        vertices=vertices,
        area=area,
        impose_dual_bound=impose_dual_bound,
        witness=witness,
        active_constraints=active,
    )


@dataclass(frozen=True)
class Breakpoint:
    """An m where the region changes shape, with its defining quadratic."""
    label: str
    quadratic: tuple[int, int, int]     # a m² + b m + c = 0, larger root
    value: float

    def side(self, m: Rational) -> int:
        """Sign of the quadratic at ``m`` (exact): -1 below the root, +1 above, 0 on it."""
        a, b, c = self.quadratic
        m = as_fraction(m)
        q = a * m * m + b * m + c
        return (q > 0) - (q < 0)


def breakpoints() -> list[Breakpoint]:
    """
    1 + √2/2: m + 1/(2m) - 2 changes sign and 1/(4m) crosses 1 - m/2.
    1 + √3/2: the lower-left constraint stops touching the region.
    """
    return [
        Breakpoint("sqrt2", (2, -4, 1), 1.0 + math.sqrt(2.0) / 2.0),
        Breakpoint("sqrt3", (4, -8, 1), 1.0 + math.sqrt(3.0) / 2.0),
    ]


def representative_m_values() -> list[Fraction]:
    """Midpoints of [1, 1+√2/2], [1+√2/2, 1+√3/2], [1+√3/2, 2] as rationals."""
    edges = [1.0] + [bp.value for bp in breakpoints()] + [2.0]
    return [
        Fraction((lo + hi) / 2).limit_denominator(1000)
        for lo, hi in zip(edges, edges[1:])
    ]
