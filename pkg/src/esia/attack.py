"""Drop schedules and synthesis of row-drop attacks.

A schedule is a strictly increasing tuple of source rows that the receiver
discarded.  The faulty receiver closes each gap with the rows that follow it,
so the frame is compressed upward and its bottom is padded.  Done on the RGB
raster this only loses pixels; done on the Bayer mosaic it also shifts the
row parity under the demosaicer, which is where color strips come from.

Schedule sampling
-----------------
Schedules are reproducible bit-for-bit from ``(height, n, seed)``:

* PRNG: SplitMix64 seeded with ``seed`` (64-bit unsigned).
* Bounded draw in ``[0, k)``: take 64-bit outputs ``x`` until
  ``x < 2**64 - (2**64 % k)``, return ``x % k`` (unbiased).
* Sampling: partial Fisher-Yates over ``[0, 1, ..., height-1]``; for
  ``i`` in ``0..n-1`` swap position ``i`` with ``i + draw(height - i)``.
  The first ``n`` entries, sorted ascending, are the schedule.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .core import as_image, demosaic, mosaic, BayerMosaic
from .errors import DimensionError, ScheduleError

__all__ = [
    "PadPolicy",
    "AttackMode",
    "RowStatus",
    "DropSchedule",
    "StripMap",
    "SplitMix64",
    "generate_schedule",
    "derive_seed",
    "n_from_fraction",
    "kept_rows",
    "drop_and_shift_rows",
    "pixel_loss_attack",
    "color_strip_attack",
    "attack",
    "strip_map",
    "loss_fraction",
]

_MASK64 = (1 << 64) - 1


class PadPolicy(str, enum.Enum):
    REPLICATE_LAST = "replicate"
    BLACK = "black"


class AttackMode(str, enum.Enum):
    PIXEL_LOSS = "pixel-loss"
    COLOR_STRIPS = "color-strips"


class RowStatus(str, enum.Enum):
    CLEAN = "clean"
    COLOR_CORRUPTED = "corrupted"
    PADDED = "padded"
    HOLE = "hole"


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood 2014)."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` by rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            x = self.next()
            if x < limit:
                return x % bound


@dataclass(frozen=True)
class DropSchedule:
    """Dropped source rows ``rows`` of a frame ``source_height`` rows high."""

    rows: tuple
    source_height: int
    seed: int = 0

    def __post_init__(self):
        rows = tuple(int(r) for r in self.rows)
        height = int(self.source_height)
        if height < 1:
            raise ScheduleError(f"source_height must be >= 1, got {height}")
        if any(b <= a for a, b in zip(rows, rows[1:])):
            raise ScheduleError(f"rows must be strictly increasing: {rows}")
        if rows and (rows[0] < 0 or rows[-1] >= height):
            raise ScheduleError(f"rows must lie in [0, {height}): {rows}")
        if not 0 <= int(self.seed) <= _MASK64:
            raise ScheduleError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "source_height", height)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def n(self) -> int:
        return len(self.rows)


def generate_schedule(height: int, n: int, seed: int) -> DropSchedule:
    """Sample ``n`` distinct rows of ``[0, height)`` uniformly, sorted."""
    if height < 1:
        raise ScheduleError(f"height must be >= 1, got {height}")
    if n < 0 or n > height:
        raise ScheduleError(f"n must satisfy 0 <= n <= height, got n={n}, height={height}")
    rng = SplitMix64(seed)
    idx = list(range(height))
    for i in range(n):
        j = i + rng.below(height - i)
        idx[i], idx[j] = idx[j], idx[i]
    return DropSchedule(tuple(sorted(idx[:n])), height, seed & _MASK64)


def derive_seed(base_seed: int, image_id: str, n: int) -> int:
    """Stable per-image 64-bit seed.

    First 8 bytes (big-endian) of BLAKE2b over the UTF-8 string
    ``f"{base_seed}\\x1f{image_id}\\x1f{n}"``.  Depends only on its own
    arguments, so editing a corpus never changes other images' schedules.
    """
    key = f"{int(base_seed)}\x1f{image_id}\x1f{int(n)}".encode("utf-8")
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")


def n_from_fraction(fraction: float, height: int) -> int:
    """``round(fraction * height)`` with halves rounded up, clipped to ``[0, height]``."""
    if not 0.0 <= fraction <= 1.0:
        raise ScheduleError(f"loss fraction must lie in [0, 1], got {fraction}")
    n = int((Decimal(repr(float(fraction))) * height).to_integral_value(ROUND_HALF_UP))
    return min(max(n, 0), height)


def kept_rows(schedule: DropSchedule) -> np.ndarray:
    """Ascending source rows that survive the drop."""
    keep = np.ones(schedule.source_height, dtype=bool)
    keep[list(schedule.rows)] = False
    return np.flatnonzero(keep)


def drop_and_shift_rows(rows, schedule: DropSchedule, pad=PadPolicy.REPLICATE_LAST) -> np.ndarray:
    """Remove the scheduled rows of ``rows`` (axis 0) and close the gaps upward.

    The bottom ``n`` rows are padded with a copy of the last kept row or with
    zeros.  With no kept rows at all, both policies give zeros.
    """
    grid = np.asarray(rows)
    if grid.ndim < 1 or grid.shape[0] != schedule.source_height:
        raise DimensionError(
            f"grid height {grid.shape[0] if grid.ndim else None} != schedule height {schedule.source_height}")
    pad = PadPolicy(pad)
    keep = kept_rows(schedule)
    out = np.zeros_like(grid)
    out[:len(keep)] = grid[keep]
    if len(keep) and len(keep) < grid.shape[0] and pad is PadPolicy.REPLICATE_LAST:
        out[len(keep):] = grid[keep[-1]]
    return out


def pixel_loss_attack(image, schedule: DropSchedule, pad=PadPolicy.REPLICATE_LAST) -> np.ndarray:
    """Row drop applied straight to the RGB raster: pixels lost, colors intact."""
    return drop_and_shift_rows(as_image(image), schedule, pad)


def color_strip_attack(image, schedule: DropSchedule, phase: str = "RGGB",
                       pad=PadPolicy.REPLICATE_LAST) -> np.ndarray:
    """Row drop applied to the Bayer mosaic, then demosaiced with the original phase.

    Output rows below an odd number of drops carry mosaic rows of the other
    parity, so the demosaicer assigns their samples to the wrong filters.
    """
    m = mosaic(image, phase)
    shifted = drop_and_shift_rows(m.samples, schedule, pad)
    return demosaic(BayerMosaic(shifted, m.phase))


def attack(image, schedule: DropSchedule, mode=AttackMode.COLOR_STRIPS, phase: str = "RGGB",
           pad=PadPolicy.REPLICATE_LAST) -> np.ndarray:
    """Dispatch to :func:`pixel_loss_attack` or :func:`color_strip_attack`."""
    if AttackMode(mode) is AttackMode.PIXEL_LOSS:
        return pixel_loss_attack(image, schedule, pad)
    return color_strip_attack(image, schedule, phase, pad)


@dataclass(frozen=True)
class StripMap:
    """Ground-truth status of every output row of an attacked frame."""

    statuses: tuple

    def __len__(self):
        return len(self.statuses)

    def rows_with(self, status) -> list:
        status = RowStatus(status)
        return [j for j, s in enumerate(self.statuses) if s is status]

    @property
    def corrupted(self) -> list:
        return self.rows_with(RowStatus.COLOR_CORRUPTED)

    @property
    def padded(self) -> list:
        return self.rows_with(RowStatus.PADDED)


def strip_map(schedule: DropSchedule) -> StripMap:
    """Classify output rows as clean, color-corrupted (odd drops above) or padded."""
    keep = kept_rows(schedule)
    drops_above = np.searchsorted(np.asarray(schedule.rows, dtype=np.intp), keep)
    statuses = [RowStatus.COLOR_CORRUPTED if d % 2 else RowStatus.CLEAN for d in drops_above]
    statuses.extend([RowStatus.PADDED] * schedule.n)
    return StripMap(tuple(statuses))


def loss_fraction(schedule: DropSchedule) -> float:
    """Share of source rows dropped."""
    return schedule.n / schedule.source_height
