"""
KGS Lab — Checkpoints
======================
Binary snapshot of a SimState.

Layout (little-endian):
    header  '<8sIIdqqd'  magic b"KGSLAB\\0\\0", version, num_points,
                         domain_length, m numerator, m denominator, time
    body    three complex128 arrays of length num_points: u, n+, n-
"""

from __future__ import annotations

import logging
import struct
from fractions import Fraction
from pathlib import Path

import numpy as np

from src.fieldcore.fields import SimState, SpectralField
from src.fieldcore.grid import Grid

logger = logging.getLogger(__name__)

MAGIC = b"KGSLAB\0\0"
VERSION = 1
HEADER = struct.Struct("<8sIIdqqd")
DTYPE = np.dtype("<c16")


class CheckpointError(ValueError):
    """Unreadable or inconsistent checkpoint file."""


def save_checkpoint(state: SimState, m: Fraction, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    m = Fraction(m)
    header = HEADER.pack(
        MAGIC,
        VERSION,
        state.grid.num_points,
        state.grid.domain_length,
        m.numerator,
        m.denominator,
        state.time,
    )
    body = b"".join(
        np.ascontiguousarray(f.values, dtype=DTYPE).tobytes()
        for f in (state.u, state.n_plus, state.n_minus)
    )
    path.write_bytes(header + body)
    logger.info(f"checkpoint written: {path} (t={state.time:.6g})")
    return path


def load_checkpoint(path: str | Path) -> tuple[SimState, Fraction]:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    if len(raw) < HEADER.size:
        raise CheckpointError(f"{path}: file shorter than the header")

    magic, version, num_points, length, m_num, m_den, time = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    if m_den <= 0:
        raise CheckpointError(f"{path}: invalid m denominator {m_den}")
    expected = HEADER.size + 3 * num_points * DTYPE.itemsize
    if len(raw) != expected:
        raise CheckpointError(f"{path}: expected {expected} bytes, found {len(raw)}")

    try:
        grid = Grid.create(num_points, length)
    except ValueError as e:
        raise CheckpointError(f"{path}: invalid grid in header: {e}") from e
    arrays = np.frombuffer(raw, dtype=DTYPE, offset=HEADER.size).reshape(3, num_points)
    u, n_plus, n_minus = (SpectralField(grid, a) for a in arrays)
    return SimState(u, n_plus, n_minus, time), Fraction(m_num, m_den)
