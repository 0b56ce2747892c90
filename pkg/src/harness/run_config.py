"""
KGS Lab — Run Configuration
============================
One experiment's parameters. Values come from, in increasing precedence:
Settings defaults (.env / environment), a flat ``key = value`` config file,
and explicit overrides (command-line flags).

Example config file:
    m = 3/2
    num_points = 512
    dt = 1e-3
    T = 10
    ic = gaussian
    u_amplitude = 0.5
    # epsilon/theta left unset: taken from the region witness
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Literal, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.config.settings import get_settings
from src.exponents.algebra import ExponentSet, bourgain_exponents, format_fraction
from src.exponents.region import admissible_region
from src.fieldcore.grid import Grid

logger = logging.getLogger(__name__)

PRESETS = ("gaussian", "plane-wave", "two-bump", "from-checkpoint")


class ConfigError(ValueError):
    """Invalid run configuration (CLI exit code 3)."""


def _setting(name: str):
    return lambda: getattr(get_settings(), name)


class RunConfig(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True, extra="forbid")

    # ── System ───────────────────────────────────────────────────────────
    m: Fraction = Fraction(1)
    epsilon: Optional[Fraction] = None
    theta: Optional[Fraction] = None
    c_local: float = Field(default_factory=_setting("default_c_local"), gt=0.0)

    # ── Discretization ───────────────────────────────────────────────────
    num_points: int = Field(default_factory=_setting("default_grid_points"))
    domain_length: float = Field(default_factory=_setting("default_domain_length"), gt=0.0)
    dt: float = Field(default=1e-3, gt=0.0)
    T: float = Field(default=1.0, ge=0.0)
    dealias: bool = Field(default_factory=_setting("dealias"))
    blowup_threshold: float = Field(default_factory=_setting("blowup_threshold"), gt=0.0)

    # ── Initial condition ────────────────────────────────────────────────
    ic: Literal["gaussian", "plane-wave", "two-bump", "from-checkpoint"] = "gaussian"
    u_amplitude: float = 1.0
    u_width: float = Field(default=2.0, gt=0.0)
    u_center: float = 0.0
    u_velocity: float = 0.0
    u_mode: int = 1
    n_amplitude: float = 1.0
    n_width: float = Field(default=3.0, gt=0.0)
    n_center: float = 0.0
    n_mode: int = 1
    n1_amplitude: float = 0.0
    bump_separation: float = 10.0
    checkpoint_path: Optional[str] = None

    # ── Growth bound ─────────────────────────────────────────────────────
    bound_c_front: float = Field(default_factory=_setting("bound_c_front"), gt=0.0)
    bound_c_rate: float = Field(default_factory=_setting("bound_c_rate"), gt=0.0)

    # ── Picard ───────────────────────────────────────────────────────────
    picard_quadrature: Literal["simpson", "gauss"] = Field(default_factory=_setting("picard_quadrature"))
    picard_quad_points: int = Field(default_factory=_setting("picard_quad_points"), ge=8)
    picard_max_iters: int = Field(default_factory=_setting("picard_max_iters"), ge=1)
    picard_tolerance: float = Field(default_factory=_setting("picard_tolerance"), gt=0.0)

    # ── Output / parallelism ─────────────────────────────────────────────
    seed: int = 0
    out: str = Field(default_factory=_setting("output_dir"))
    sweep_workers: int = Field(default_factory=_setting("sweep_workers"), ge=1)
    ensemble_workers: int = Field(default_factory=_setting("ensemble_workers"), ge=1)

    @field_validator("m", "epsilon", "theta", mode="before")
    @classmethod
    def parse_fraction(cls, v):
        if v is None or isinstance(v, Fraction):
            return v
        if isinstance(v, str) and v.strip().lower() in ("", "auto", "none"):
            return None
        try:
            if isinstance(v, float):
                return Fraction(v).limit_denominator(10**6)
            return Fraction(str(v).strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"not a rational number: {v!r}") from e

    @field_validator("m")
    @classmethod
    def validate_m(cls, v):
        if v is None or not (1 <= v < 2):
            raise ValueError(f"m must lie in [1, 2), got {v}")
        return v

    @field_validator(
        "domain_length", "dt", "T", "u_amplitude", "u_width", "u_center", "u_velocity",
        "n_amplitude", "n_width", "n_center", "n1_amplitude", "bump_separation", "c_local",
    )
    @classmethod
    def validate_finite(cls, v):
        if not math.isfinite(v):
            raise ValueError(f"value must be finite, got {v}")
        return v

    @field_validator("num_points")
    @classmethod
    def validate_num_points(cls, v):
        if v < 8 or v % 2:
            raise ValueError(f"num_points must be an even integer >= 8, got {v}")
        return v

    # ── Loading ──────────────────────────────────────────────────────────

    @classmethod
    def load(cls, config_path: Optional[str | Path] = None, **overrides) -> "RunConfig":
        """
        Merge defaults < config file < overrides. ``None`` overrides are ignored.

        Raises:
            ConfigError: unreadable file, unknown key, or invalid value.
        """
        values: dict = {}
        if config_path is not None:
            path = Path(config_path)
            if not path.is_file():
                raise ConfigError(f"config file not found: {path}")
            for key, value in dotenv_values(path).items():
                values[cls._field_name(key)] = value
        for key, value in overrides.items():
            if value is not None:
                values[cls._field_name(key)] = value
        try:
            cfg = cls(**values)
        except ValidationError as e:
            raise ConfigError(str(e)) from e
        cfg.exponent_set()
        return cfg

    @classmethod
    def _field_name(cls, key: str) -> str:
        key = key.strip().replace("-", "_")
        for candidate in (key, key.lower(), key.upper()):
            if candidate in cls.model_fields:
                return candidate
        raise ConfigError(f"unknown config key: {key!r}")

    # ── Derived ──────────────────────────────────────────────────────────

    @property
    def grid(self) -> Grid:
        return Grid.create(self.num_points, self.domain_length)

    def exponent_set(self) -> ExponentSet:
        """
        Exponents for this run. An unset ε takes the interior witness of the
        admissible region; an unset θ is chosen by ``bourgain_exponents``.
        """
        eps, theta = self.epsilon, self.theta
        try:
            if eps is None:
                report = admissible_region(self.m)
                if report.witness is None:
                    raise ConfigError(f"no admissible (θ, ε) for m = {format_fraction(self.m)}")
                witness_theta, eps = report.witness
                if theta is None:
                    theta = witness_theta
            return bourgain_exponents(self.m, eps, theta)
        except ValueError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(str(e)) from e

    def cell_key(self) -> str:
        """Stable identifier used to sort and name sweep cells."""
        return (
            f"m={format_fraction(self.m)}|N={self.num_points}|L={self.domain_length:g}"
            f"|dt={self.dt:g}|T={self.T:g}|ic={self.ic}"
            f"|ua={self.u_amplitude:.12g}|na={self.n_amplitude:.12g}|seed={self.seed}"
        )

    def with_updates(self, **changes) -> "RunConfig":
        data = self.model_dump()
        data.update(changes)
        try:
            return RunConfig(**data)
        except ValidationError as e:
            raise ConfigError(str(e)) from e
