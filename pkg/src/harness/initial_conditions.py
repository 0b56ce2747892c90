"""Initial-condition presets: gaussian, plane-wave, two-bump, from-checkpoint."""

from __future__ import annotations

import logging

import numpy as np

from src.fieldcore.fields import SimState, SpectralField
from src.harness.checkpoint import load_checkpoint
from src.harness.run_config import ConfigError, RunConfig

logger = logging.getLogger(__name__)


def _gaussian(x: np.ndarray, center: float, width: float) -> np.ndarray:
    return np.exp(-((x - center) ** 2) / (2.0 * width ** 2))


def _meson_pair(cfg: RunConfig, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    profile = _gaussian(x, cfg.n_center, cfg.n_width)
    return cfg.n_amplitude * profile, cfg.n1_amplitude * profile


def build_initial_state(cfg: RunConfig) -> SimState:
    """(u0, n0, n1) for the configured preset, reduced to (u, n+, n-)."""
    if cfg.ic == "from-checkpoint":
        return _from_checkpoint(cfg)

    grid = cfg.grid
    x = grid.x
    length = grid.domain_length

    if cfg.ic == "gaussian":
        u0 = cfg.u_amplitude * _gaussian(x, cfg.u_center, cfg.u_width) * np.exp(1j * cfg.u_velocity * x)
        n0, n1 = _meson_pair(cfg, x)
    elif cfg.ic == "plane-wave":
        u0 = cfg.u_amplitude * np.exp(2j * np.pi * cfg.u_mode * x / length)
        wave = 2.0 * np.pi * cfg.n_mode * x / length
        n0 = cfg.n_amplitude * np.cos(wave)
        n1 = cfg.n1_amplitude * np.cos(wave)
    elif cfg.ic == "two-bump":
        half = 0.5 * cfg.bump_separation
        u0 = cfg.u_amplitude * (
            _gaussian(x, cfg.u_center - half, cfg.u_width) * np.exp(1j * cfg.u_velocity * x)
            + _gaussian(x, cfg.u_center + half, cfg.u_width) * np.exp(-1j * cfg.u_velocity * x)
        )
        n0, n1 = _meson_pair(cfg, x)
    else:
        raise ConfigError(f"unknown initial-condition preset: {cfg.ic}")

    return SimState.from_data(
        SpectralField(grid, u0),
        SpectralField(grid, n0),
        SpectralField(grid, n1),
    )


def _from_checkpoint(cfg: RunConfig) -> SimState:
    if not cfg.checkpoint_path:
        raise ConfigError("ic = from-checkpoint requires checkpoint_path")
    state, m = load_checkpoint(cfg.checkpoint_path)
    if m != cfg.m:
        logger.warning(f"checkpoint was written with m = {m}, running with m = {cfg.m}")
    if state.grid != cfg.grid:
        logger.warning(
            f"checkpoint grid {state.grid.num_points} x {state.grid.domain_length:g} "
            f"overrides the configured grid"
        )
    return state
