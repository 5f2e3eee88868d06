"""Median-interpolation mitigation.

The attacked frame is first realigned: every received row goes back to the
source row it came from, leaving the dropped rows as holes.  Holes are then
filled from the median of their valid 3x3 neighbors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attack import DropSchedule, kept_rows
from .core import as_image
from .errors import DimensionError, MitigationError

__all__ = ["HoleImage", "realign", "median_interpolate", "mitigate"]

# larger than any uint8 value, so invalid neighbors sort last
_INVALID = 256


@dataclass(frozen=True, eq=False)
class HoleImage:
    """A raster whose ``hole_rows`` carry no information (they hold zeros)."""

    raster: np.ndarray
    hole_rows: frozenset

    def __post_init__(self):
        raster = as_image(self.raster)
        holes = frozenset(int(r) for r in self.hole_rows)
        if any(r < 0 or r >= raster.shape[0] for r in holes):
            raise DimensionError(f"hole rows outside [0, {raster.shape[0]})")
        object.__setattr__(self, "raster", raster)
        object.__setattr__(self, "hole_rows", holes)

    def missing_mask(self) -> np.ndarray:
        mask = np.zeros(self.raster.shape[:2], dtype=bool)
        mask[sorted(self.hole_rows)] = True
        return mask


def realign(attacked, schedule: DropSchedule) -> HoleImage:
    """Undo the shift-up: attacked row ``j`` goes back to kept source row ``K[j]``."""
    img = as_image(attacked)
    if img.shape[0] != schedule.source_height:
        raise DimensionError(
            f"image height {img.shape[0]} != schedule height {schedule.source_height}")
    keep = kept_rows(schedule)
    out = np.zeros_like(img)
    out[keep] = img[:len(keep)]
    return HoleImage(out, frozenset(schedule.rows))


def _fill_pass(img: np.ndarray, missing: np.ndarray) -> np.ndarray:
    """Pixels of ``missing`` that gain a lower-median value this pass.

    Writes the fills into ``img`` in place and returns the mask of filled
    pixels.  All reads see the state from before the pass.
    """
    h, w, _ = img.shape
    vals = np.pad(img.astype(np.int16), ((1, 1), (1, 1), (0, 0)), constant_values=_INVALID)
    valid = np.pad(~missing, 1, constant_values=False)
    neigh = np.empty((9, h, w, 3), dtype=np.int16)
    k = 0
    for dy in range(3):
        for dx in range(3):
            v = vals[dy:dy + h, dx:dx + w]
            ok = valid[dy:dy + h, dx:dx + w]
            neigh[k] = np.where(ok[:, :, None], v, _INVALID)
            k += 1
    count = (neigh < _INVALID).sum(axis=0)[:, :, 0]
    fill = missing & (count > 0)
    if not fill.any():
        return fill
    neigh = np.sort(neigh[:, fill], axis=0)
    idx = ((count[fill] - 1) // 2)[None, :, None]
    med = np.take_along_axis(neigh, np.broadcast_to(idx, (1,) + neigh.shape[1:]), axis=0)[0]
    img[fill] = med.astype(np.uint8)
    return fill


def median_interpolate(holes: HoleImage) -> np.ndarray:
    """Fill every hole pixel with the per-channel lower median of its valid 3x3 neighbors.

    Runs in sweeps: a pixel with no valid neighbor waits for a later sweep,
    by which time the sweep before it has filled its neighbors.
    """
    missing = holes.missing_mask()
    if missing.all():
        raise MitigationError("every row is a hole; nothing to interpolate from")
    img = holes.raster.copy()
    img[missing] = 0
    while missing.any():
        filled = _fill_pass(img, missing)
        missing = missing & ~filled
    return img


def mitigate(attacked, schedule: DropSchedule) -> np.ndarray:
    """Realign ``attacked`` against ``schedule`` and median-fill the dropped rows."""
    return median_interpolate(realign(attacked, schedule))
