"""Raster and Bayer mosaic types, bilinear (de)mosaicing and PSNR.

Images are plain ``numpy`` arrays of shape ``(H, W, 3)`` and dtype ``uint8``,
stored row-major with interleaved RGB.  Bayer mosaics carry their color
filter phase alongside the single-plane sample grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

__all__ = [
    "PHASES",
    "IDENTICAL",
    "BayerMosaic",
    "as_image",
    "cfa_channels",
    "mosaic",
    "demosaic",
    "psnr",
]

PHASES = ("RGGB", "BGGR", "GRBG", "GBRG")

#: Returned by :func:`psnr` when the two images are byte-equal.
IDENTICAL = math.inf

_CHANNEL = {"R": 0, "G": 1, "B": 2}


def as_image(image) -> np.ndarray:
    """Validate and return ``image`` as an ``(H, W, 3)`` uint8 array.

    Grayscale ``(H, W)`` input is replicated to three channels.  Integer
    arrays outside ``[0, 255]`` are rejected rather than wrapped.
    """
    arr = np.asarray(image)
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise DimensionError(f"expected an (H, W, 3) image, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError("image must be at least 1x1")
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("pixel values must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def _check_phase(phase: str) -> str:
    phase = str(phase).upper()
    if phase not in PHASES:
        raise ValueError(f"unknown CFA phase {phase!r}; expected one of {PHASES}")
    return phase


def cfa_channels(phase: str, height: int, width: int) -> np.ndarray:
    """Channel index (0=R, 1=G, 2=B) of every site of a ``height x width`` CFA."""
    phase = _check_phase(phase)
    tile = np.array([[_CHANNEL[phase[0]], _CHANNEL[phase[1]]],
                     [_CHANNEL[phase[2]], _CHANNEL[phase[3]]]], dtype=np.intp)
    rows = np.arange(height) % 2
    cols = np.arange(width) % 2
    return tile[rows[:, None], cols[None, :]]


@dataclass(frozen=True, eq=False)
class BayerMosaic:
    """Single-plane CFA samples plus the phase of the 2x2 filter tile."""

    samples: np.ndarray
    phase: str = "RGGB"

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 2 or samples.shape[0] < 1 or samples.shape[1] < 1:
            raise DimensionError(f"mosaic samples must be a non-empty 2-D grid, got {samples.shape}")
        if samples.dtype != np.uint8:
            if samples.min() < 0 or samples.max() > 255:
                raise ValueError("mosaic samples must lie in [0, 255]")
            samples = samples.astype(np.uint8)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "phase", _check_phase(self.phase))

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    def __eq__(self, other):
        if not isinstance(other, BayerMosaic):
            return NotImplemented
        return self.phase == other.phase and np.array_equal(self.samples, other.samples)


def mosaic(image, phase: str = "RGGB") -> BayerMosaic:
    """Sample ``image`` through a Bayer color filter array of the given phase."""
    img = as_image(image)
    h, w, _ = img.shape
    chan = cfa_channels(phase, h, w)
    samples = np.take_along_axis(img, chan[:, :, None], axis=2)[:, :, 0]
    return BayerMosaic(samples, phase)


def _box3(a: np.ndarray) -> np.ndarray:
    """Sum over the in-bounds 3x3 neighborhood of every element."""
    h, w = a.shape
    p = np.pad(a, 1)
    out = np.zeros_like(a)
    for dy in range(3):
        for dx in range(3):
            out += p[dy:dy + h, dx:dx + w]
    return out


def demosaic(m: BayerMosaic) -> np.ndarray:
    """Bilinear demosaic of ``m`` into an ``(H, W, 3)`` uint8 image.

    A sample keeps its own channel.  Each missing channel is the mean of the
    same-channel samples in the 3x3 neighborhood (border neighborhoods are
    truncated), rounded half up.  A channel with no sample in the
    neighborhood, possible only on 1-pixel-high or -wide frames, is 0.
    """
    samples = m.samples.astype(np.int64)
    h, w = samples.shape
    chan = cfa_channels(m.phase, h, w)
    out = np.empty((h, w, 3), dtype=np.uint8)
    for c in range(3):
        mask = (chan == c).astype(np.int64)
        total = _box3(samples * mask)
        count = _box3(mask)
        # round half up in integer arithmetic: floor(total/count + 1/2)
        avg = (2 * total + count) // np.maximum(2 * count, 1)
        avg = np.where(count > 0, avg, 0)
        out[:, :, c] = np.clip(np.where(mask == 1, samples, avg), 0, 255)
    return out


def psnr(reference, candidate) -> float:
    """Peak signal-to-noise ratio in dB over all channels.

    Returns :data:`IDENTICAL` (``inf``) when the images are byte-equal.
    """
    ref = np.asarray(reference)
    cand = np.asarray(candidate)
    if ref.shape != cand.shape:
        raise DimensionError(f"shape mismatch: {ref.shape} vs {cand.shape}")
    diff = ref.astype(np.float64) - cand.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return IDENTICAL
    return 10.0 * math.log10(255.0 ** 2 / mse)
