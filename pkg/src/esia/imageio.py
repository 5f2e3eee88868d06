"""PNG/JPEG decode and lossless PNG encode, with atomic file writes."""

from __future__ import annotations

import io
import os
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image

from .core import as_image

__all__ = ["IMAGE_SUFFIXES", "load_image", "decode_image", "encode_png", "save_png", "atomic_write"]

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def _to_rgb(im: Image.Image) -> np.ndarray:
    # palette and grayscale expand to RGB; alpha is dropped
    return np.array(im.convert("RGB"), dtype=np.uint8)


def decode_image(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as im:
        return _to_rgb(im)


def load_image(path) -> np.ndarray:
    with Image.open(path) as im:
        return _to_rgb(im)


def encode_png(image) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(as_image(image), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def atomic_write(path, data: bytes) -> None:
    """Write ``data`` to a temporary sibling of ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_png(path, image) -> None:
    atomic_write(path, encode_png(image))
