"""Binary PGM (P5) and PPM (P6) image codecs, maxval 255.

Dependency-free and bit-exact: pixel bytes map to [0, 1] reals on load and
are clamped then rounded half-up on save, so a write/read roundtrip is
within half a quantum (1/510) of the original values.
"""

from __future__ import annotations

import numpy as np

from .util import as_grid


class ImageFormatError(ValueError):
    """Malformed netpbm header or payload; the message carries the byte offset."""


def _parse_error(path, offset: int, msg: str) -> ImageFormatError:
    return ImageFormatError(f"{path}: byte {offset}: {msg}")


class _Tokenizer:
    """Whitespace/comment-aware header scanner over raw bytes."""

    def __init__(self, data: bytes, path):
        self.data = data
        self.pos = 0
        self.path = path

    def skip_separators(self) -> None:
        while self.pos < len(self.data):
            b = self.data[self.pos]
            if b in b" \t\r\n":
                self.pos += 1
            elif b == ord("#"):
                while self.pos < len(self.data) and self.data[self.pos] not in b"\n":
                    self.pos += 1
            else:
                return

    def token(self, what: str) -> bytes:
        self.skip_separators()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos] not in b" \t\r\n":
            self.pos += 1
        if self.pos == start:
            raise _parse_error(self.path, start, f"expected {what}, found end of header")
        return self.data[start : self.pos]

    def integer(self, what: str) -> int:
        start = self.pos
        tok = self.token(what)
        try:
            return int(tok)
        except ValueError:
            raise _parse_error(self.path, start, f"expected integer {what}, got {tok!r}")


def read_image(path) -> np.ndarray:
    """Load a P5/P6 file as a (H, W, C) grid with values in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    tok = _Tokenizer(data, path)
    magic = tok.token("magic number")
    if magic == b"P6":
        channels = 3
    elif magic == b"P5":
        channels = 1
    else:
        raise _parse_error(path, 0, f"unsupported magic {magic!r} (expected P5 or P6)")
    width = tok.integer("width")
    height = tok.integer("height")
    maxval_at = tok.pos
    maxval = tok.integer("maxval")
    if width < 1 or height < 1:
        raise _parse_error(path, 0, f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise _parse_error(path, maxval_at, f"unsupported maxval {maxval} (only 255)")
    if tok.pos >= len(data) or data[tok.pos] not in b" \t\r\n":
        raise _parse_error(path, tok.pos, "expected single whitespace byte before pixel data")
    payload_start = tok.pos + 1
    expected = width * height * channels
    payload = data[payload_start : payload_start + expected]
    if len(payload) < expected:
        raise _parse_error(
            path,
            payload_start + len(payload),
            f"truncated payload: expected {expected} pixel bytes, found {len(payload)}",
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).astype(np.float64) / 255.0
    return pixels.reshape(height, width, channels)


def write_image(grid: np.ndarray, path) -> None:
    """Save a 1-channel grid as P5 or a 3-channel grid as P6.

    Values are clamped to [0, 1] and rounded half-up to bytes.
    """
    grid = as_grid(grid, "grid")
    channels = grid.shape[2]
    if channels == 1:
        magic = b"P5"
    elif channels == 3:
        magic = b"P6"
    else:
        raise ValueError(f"only 1- or 3-channel grids can be written, got {channels} channels")
    clamped = np.clip(grid, 0.0, 1.0)
    pixels = np.floor(clamped * 255.0 + 0.5).astype(np.uint8)
    header = magic + b"\n" + f"{grid.shape[1]} {grid.shape[0]}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(pixels.tobytes())
