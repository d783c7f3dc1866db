"""8-bit grayscale image files.

Binary PGM (magic ``P5``, maxval <= 255) is the supported raster format;
anything else is rejected rather than converted.  ``load_image`` dispatches
on the file extension so additional loaders can be registered later without
touching call sites.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ImageFormatError


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # skip whitespace and '#' comments between header tokens
    while pos < len(data):
        c = data[pos:pos + 1]
        if c == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < len(data) and not data[pos:pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ImageFormatError("truncated PGM header")
    return data[start:pos], pos


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM file into a (height, width) uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] != b"P5":
        magic = data[:2].decode("ascii", errors="replace")
        raise ImageFormatError(
            f"{path}: not a binary grayscale PGM (magic {magic!r}, expected 'P5')"
        )
    pos = 2
    fields = []
    for _ in range(3):
        token, pos = _read_token(data, pos)
        try:
            fields.append(int(token))
        except ValueError as exc:
            raise ImageFormatError(f"{path}: bad PGM header token {token!r}") from exc
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: bad PGM dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise ImageFormatError(
            f"{path}: only 8-bit PGM is supported (maxval {maxval})"
        )
    pos += 1  # single whitespace byte after maxval
    payload = data[pos:pos + width * height]
    if len(payload) != width * height:
        raise ImageFormatError(f"{path}: truncated PGM payload")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(path, img: np.ndarray) -> None:
    """Write a (height, width) uint8 array as binary PGM."""
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.dtype != np.uint8:
        raise ImageFormatError("write_pgm expects a 2-D uint8 array")
    height, width = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


_LOADERS = {".pgm": read_pgm}


def load_image(path) -> np.ndarray:
    """Load a grayscale image by extension; unknown formats are rejected."""
    ext = os.path.splitext(str(path))[1].lower()
    loader = _LOADERS.get(ext)
    if loader is None:
        raise ImageFormatError(
            f"{path}: unsupported image format {ext!r} (supported: {sorted(_LOADERS)})"
        )
    return loader(path)
