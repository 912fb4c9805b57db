"""Minimal PGM reader/writer (plain P2 and binary P5).

Only grayscale is supported. Comments (``#`` to end of line) are allowed
anywhere in the header. P5 rasters use one byte per sample for maxval < 256
and two big-endian bytes otherwise.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import FormatError


def _tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping comments."""
    i = 0
    n = len(data)
    while i < n:
        c = data[i:i + 1]
        if c.isspace():
            i += 1
        elif c == b"#":
            while i < n and data[i:i + 1] != b"\n":
                i += 1
        else:
            j = i
            while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
                j += 1
            yield i, data[i:j]
            i = j


def read_pgm(path) -> tuple[np.ndarray, int]:
    """Read a P2/P5 PGM file.

    Returns (image, maxval) where image is a (height, width) float array of
    the raw sample values.
    """
    path = Path(path)
    data = path.read_bytes()
    it = _tokens(data)
    try:
        _, magic = next(it)
    except StopIteration:
        raise FormatError(f"{path}: empty file") from None
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"{path}: unsupported magic {magic!r} (want P2 or P5)")
    try:
        _, wtok = next(it)
        _, htok = next(it)
        mpos, mtok = next(it)
        width, height, maxval = int(wtok), int(htok), int(mtok)
    except (StopIteration, ValueError):
        raise FormatError(f"{path}: malformed header") from None
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise FormatError(f"{path}: bad dimensions or maxval")

    count = width * height
    if magic == b"P2":
        values = []
        for pos, tok in it:
            try:
                values.append(int(tok))
            except ValueError:
                raise FormatError(f"{path}: non-integer sample {tok!r} at byte {pos}") from None
        if len(values) != count:
            raise FormatError(f"{path}: expected {count} samples, found {len(values)}")
        image = np.array(values, dtype=np.float64)
    else:
        # Raster starts after exactly one whitespace byte following maxval.
        start = mpos + len(mtok) + 1
        raw = data[start:]
        if maxval < 256:
            if len(raw) < count:
                raise FormatError(f"{path}: raster truncated ({len(raw)} of {count} bytes)")
            image = np.frombuffer(raw[:count], dtype=np.uint8).astype(np.float64)
        else:
            if len(raw) < 2 * count:
                raise FormatError(f"{path}: raster truncated")
            image = np.frombuffer(raw[:2 * count], dtype=">u2").astype(np.float64)
    if np.any(image > maxval):
        raise FormatError(f"{path}: sample exceeds maxval {maxval}")
    return image.reshape(height, width), maxval


def write_pgm(path, image, maxval: int = 255) -> None:
    """Write a (height, width) array of integers in [0, maxval] as plain P2."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise FormatError("image must be 2-d")
    pixels = np.rint(image).astype(np.int64)
    pixels = np.clip(pixels, 0, maxval)
    height, width = pixels.shape
    lines = ["P2", f"{width} {height}", f"{maxval}"]
    for row in pixels:
        lines.append(" ".join(str(int(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")
