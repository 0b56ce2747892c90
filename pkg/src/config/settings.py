"""
KGS Lab — Configuration & Settings
===================================
Centralized configuration using pydantic-settings with .env support.
"""

from functools import lru_cache
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field, field_validator


class Settings(BaseSettings):
    """Process-wide defaults loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # ── Application ──────────────────────────────────────────────────────
    log_level: str = Field(default="INFO", pattern="^(DEBUG|INFO|WARNING|ERROR)$")
    output_dir: str = "runs"

    # ── Discretization ───────────────────────────────────────────────────
    default_grid_points: int = 256
    default_domain_length: float = 100.0
    dealias: bool = True
    blowup_threshold: float = 1e8

    # ── Local theory ─────────────────────────────────────────────────────
    default_c_local: float = 1.0
    picard_quadrature: str = Field(default="simpson", pattern="^(simpson|gauss)$")
    picard_quad_points: int = 33
    picard_max_iters: int = 60
    picard_tolerance: float = 1e-10

    # ── Growth bound ─────────────────────────────────────────────────────
    bound_c_front: float = 1.0
    bound_c_rate: float = 1.0

    # ── Parallelism ──────────────────────────────────────────────────────
    sweep_workers: int = 1
    ensemble_workers: int = 1

    @field_validator("default_grid_points")
    @classmethod
    def validate_grid_points(cls, v):
        if v < 8 or v % 2:
            raise ValueError(
                f"DEFAULT_GRID_POINTS must be an even integer >= 8, got {v}"
            )
        return v

    @field_validator("picard_quad_points")
    @classmethod
    def validate_quad_points(cls, v):
        if v < 8:
            raise ValueError(f"PICARD_QUAD_POINTS must be >= 8, got {v}")
        return v


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
