"""Immutable raster frames with binary PGM (P5) / PPM (P6) round-tripping."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class Frame:
    """8-bit image, ``pixels[row, col]`` (grayscale) or ``pixels[row, col, channel]`` (RGB)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.array(self.pixels, dtype=np.uint8, copy=True)
        if px.ndim not in (2, 3) or (px.ndim == 3 and px.shape[2] != 3):
            raise ValueError(f"frame must be HxW or HxWx3, got shape {px.shape}")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def is_rgb(self) -> bool:
        return self.pixels.ndim == 3

    def gray(self) -> "Frame":
        if not self.is_rgb:
            return self
        weights = np.array([299, 587, 114])
        return Frame((self.pixels.astype(np.int64) @ weights + 500) // 1000)

    def __eq__(self, other):
        return isinstance(other, Frame) and np.array_equal(self.pixels, other.pixels)

    __hash__ = None


def write_pnm(frame: Frame, path: str | Path) -> Path:
    path = Path(path)
    magic = b"P6" if frame.is_rgb else b"P5"
    header = magic + f"\n{frame.width} {frame.height}\n255\n".encode()
    path.write_bytes(header + frame.pixels.tobytes())
    return path


def read_pnm(path: str | Path) -> Frame:
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # single whitespace byte after maxval
    magic, width, height, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic not in (b"P5", b"P6") or maxval != 255:
        raise ValueError(f"unsupported PNM variant {magic!r} maxval {maxval}")
    channels = 3 if magic == b"P6" else 1
    arr = np.frombuffer(data, dtype=np.uint8, count=width * height * channels, offset=pos)
    shape = (height, width, 3) if channels == 3 else (height, width)
    return Frame(arr.reshape(shape))
