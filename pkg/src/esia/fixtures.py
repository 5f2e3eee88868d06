"""Deterministic synthetic images for tests, demos and desk-scale runs."""

from __future__ import annotations

import numpy as np

from .evaluation import CorpusItem, dominant_channel

__all__ = ["gradient_image", "two_band_image", "synthetic_corpus", "strip_fixture_corpus",
           "STRIP_FIXTURE_LEVELS", "STRIP_FIXTURE_SEED"]


def gradient_image(height: int, width: int, start, stop, angle_deg: float = 90.0) -> np.ndarray:
    """Linear ramp from color ``start`` to ``stop``.

    ``angle_deg`` is the ramp direction: 90 runs top to bottom, 0 left to
    right, anything between is diagonal.
    """
    y, x = np.mgrid[0:height, 0:width].astype(np.float64)
    theta = np.deg2rad(angle_deg)
    t = x * np.cos(theta) + y * np.sin(theta)
    t = (t - t.min()) / max(t.max() - t.min(), 1e-12)
    start = np.asarray(start, dtype=np.float64)
    stop = np.asarray(stop, dtype=np.float64)
    img = start + t[:, :, None] * (stop - start)
    return np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)


def two_band_image(height: int, width: int, top, bottom, split: int, ripple: int = 0) -> np.ndarray:
    """Two horizontal bands meeting at row ``split``.

    ``ripple`` adds a row-dependent offset of up to ``ripple`` levels so no
    two neighboring rows are identical.
    """
    img = np.empty((height, width, 3), dtype=np.int64)
    img[:split] = np.asarray(top, dtype=np.int64)
    img[split:] = np.asarray(bottom, dtype=np.int64)
    if ripple:
        rows = np.arange(height)
        img += (rows % (ripple + 1))[:, None, None]
    return np.clip(img, 0, 255).astype(np.uint8)


def synthetic_corpus(height: int = 64, width: int = 48) -> list:
    """The fixed 20-image corpus: ten gradients and ten rippled two-band images."""
    ramps = [
        ((0, 0, 0), (255, 255, 255), 90.0),
        ((255, 0, 0), (0, 0, 255), 90.0),
        ((0, 255, 0), (255, 0, 255), 60.0),
        ((30, 60, 90), (220, 180, 40), 45.0),
        ((200, 20, 20), (20, 200, 20), 75.0),
        ((10, 120, 240), (250, 240, 10), 120.0),
        ((128, 0, 128), (0, 128, 0), 100.0),
        ((240, 240, 240), (10, 40, 70), 30.0),
        ((60, 200, 120), (200, 60, 180), 135.0),
        ((0, 90, 180), (180, 90, 0), 80.0),
    ]
    bands = [
        ((200, 30, 30), (30, 30, 200)),
        ((30, 200, 30), (200, 30, 200)),
        ((250, 250, 0), (0, 0, 120)),
        ((90, 40, 10), (10, 180, 220)),
        ((0, 0, 0), (240, 240, 240)),
        ((180, 120, 60), (60, 120, 180)),
        ((220, 0, 120), (0, 220, 120)),
        ((40, 40, 160), (160, 160, 40)),
        ((120, 220, 60), (220, 60, 120)),
        ((15, 75, 135), (195, 135, 75)),
    ]
    items = []
    for i, (a, b, angle) in enumerate(ramps):
        img = gradient_image(height, width, a, b, angle)
        items.append(CorpusItem(f"gradient_{i:02d}", img, dominant_channel(img)))
    for i, (top, bottom) in enumerate(bands):
        split = height * (3 + i % 5) // 10
        img = two_band_image(height, width, top, bottom, split, ripple=3)
        items.append(CorpusItem(f"two_band_{i:02d}", img, dominant_channel(img)))
    return items


# (top, bottom, split row).  The first four have one dominant channel in
# every row, so pixel loss cannot move their label; the last four pit two
# channels against each other, so shifting the band boundary can.
_STRIP_FIXTURE = (
    ((120, 0, 0), (100, 0, 20), 16),
    ((0, 130, 0), (0, 110, 0), 10),
    ((140, 0, 10), (110, 0, 30), 20),
    ((0, 120, 20), (10, 140, 0), 22),
    ((200, 0, 0), (0, 0, 180), 20),
    ((200, 0, 0), (0, 0, 160), 18),
    ((0, 0, 200), (180, 0, 0), 19),
    ((0, 200, 0), (0, 0, 190), 21),
)

#: Levels and seed the strip fixture is meant to be run with.
STRIP_FIXTURE_LEVELS = (0, 3, 6, 10, 16)
STRIP_FIXTURE_SEED = 7


def strip_fixture_corpus(height: int = 32, width: int = 16) -> list:
    """Two-band images labelled by the toy classifier, ids ``band_00`` .. ``band_07``.

    Under an RGGB filter a parity-flipped row of color ``(r, g, b)``
    demosaics to about ``(g, (r + b) / 2, g)``: red and blue turn green, and
    green turns red/blue with a tie that the toy classifier gives to red.
    """
    items = []
    for i, (top, bottom, split) in enumerate(_STRIP_FIXTURE):
        img = two_band_image(height, width, top, bottom, split * height // 32)
        items.append(CorpusItem(f"band_{i:02d}", img, dominant_channel(img)))
    return items
