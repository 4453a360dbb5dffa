"""Netpbm greyscale (PGM) reading and writing, plain (P2) and raw (P5).

Raw files with ``maxval > 255`` store two bytes per pixel, big-endian.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["PGMError", "PGMImage", "read_pgm", "write_pgm", "parse_pgm", "format_pgm"]


class PGMError(ValueError):
    pass


@dataclass(frozen=True)
class PGMImage:
    pixels: np.ndarray  # integer array, shape (height, width)
    maxval: int

    def to_unit(self) -> np.ndarray:
        """Pixels rescaled to [0, 1]."""
        return self.pixels.astype(float) / self.maxval

    @classmethod
    def from_unit(cls, x, maxval: int) -> "PGMImage":
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return cls(np.rint(x * maxval).astype(np.int64), int(maxval))


def _header_tokens(data: bytes, count: int):
    """First ``count`` whitespace-separated header tokens and the offset after
    the single whitespace byte that ends the last one."""
    tokens, pos, n = [], 0, len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise PGMError("truncated PGM header")
        tokens.append(data[start:pos])
    if pos >= n and tokens[0] == b"P5":
        raise PGMError("missing pixel data")
    return tokens, pos + 1


def parse_pgm(data: bytes) -> PGMImage:
    if data[:2] not in (b"P2", b"P5"):
        raise PGMError(f"not a PGM file: magic number {data[:2]!r}")
    tokens, offset = _header_tokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise PGMError(f"malformed PGM header: {b' '.join(tokens).decode(errors='replace')}") from None
    if width <= 0 or height <= 0:
        raise PGMError(f"bad image size {width}x{height}")
    if not 0 < maxval < 65536:
        raise PGMError(f"maxval {maxval} outside 1..65535")
    size = width * height
    if tokens[0] == b"P5":
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raw = data[offset : offset + size * dtype.itemsize]
        if len(raw) < size * dtype.itemsize:
            raise PGMError(f"expected {size} pixels, file is truncated")
        pixels = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    else:
        try:
            pixels = np.array([int(t) for t in data[offset:].split()], dtype=np.int64)
        except ValueError:
            raise PGMError("non-integer pixel value in P2 data") from None
        if pixels.size != size:
            raise PGMError(f"expected {size} pixels, found {pixels.size}")
    if pixels.size and (pixels.min() < 0 or pixels.max() > maxval):
        raise PGMError(f"pixel value outside 0..{maxval}")
    return PGMImage(pixels.reshape(height, width), maxval)


def format_pgm(image: PGMImage, plain: bool = False) -> bytes:
    pixels = np.asarray(image.pixels)
    if pixels.ndim != 2:
        raise PGMError("PGM images are 2D")
    if pixels.size and (pixels.min() < 0 or pixels.max() > image.maxval):
        raise PGMError(f"pixel value outside 0..{image.maxval}")
    height, width = pixels.shape
    magic = "P2" if plain else "P5"
    header = f"{magic}\n{width} {height}\n{image.maxval}\n".encode("ascii")
    if plain:
        rows = (" ".join(str(int(v)) for v in row) for row in pixels)
        return header + ("\n".join(rows) + "\n").encode("ascii")
    dtype = ">u2" if image.maxval > 255 else "u1"
    return header + pixels.astype(dtype).tobytes()


def read_pgm(path) -> PGMImage:
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def write_pgm(path, image: PGMImage, plain: bool = False):
    data = format_pgm(image, plain)
    with open(path, "wb") as fh:
        fh.write(data)
