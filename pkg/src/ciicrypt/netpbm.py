"""Binary PGM (P5) and PPM (P6) reading and writing, 8 bits per sample only."""
from __future__ import annotations

import os
from typing import Union

import numpy as np

from .errors import CorruptHeader, UnsupportedFormat

PathLike = Union[str, os.PathLike]


def _header_tokens(data: bytes, count: int):
    """Return the first ``count`` header tokens and the offset of the raster."""
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise CorruptHeader("truncated header")
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates maxval from the raster
    if pos >= n or not data[pos:pos + 1].isspace():
        raise CorruptHeader("missing whitespace after maxval")
    return tokens, pos + 1


def decode(data: bytes) -> np.ndarray:
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise UnsupportedFormat(f"not a binary PGM/PPM file (magic {magic!r})")
    tokens, offset = _header_tokens(data[2:], 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise CorruptHeader(f"non-numeric header field: {exc}") from exc
    if width < 1 or height < 1:
        raise CorruptHeader(f"bad dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedFormat(f"only maxval 255 is supported, got {maxval}")
    channels = 3 if magic == b"P6" else 1
    size = width * height * channels
    raster = data[2 + offset:2 + offset + size]
    if len(raster) != size:
        raise CorruptHeader(f"raster truncated: expected {size} bytes, found {len(raster)}")
    arr = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, channels)
    return arr[:, :, 0].copy() if channels == 1 else arr.copy()


def encode(img) -> bytes:
    arr = np.asarray(img)
    if arr.dtype != np.uint8:
        raise UnsupportedFormat(f"only 8-bit images can be written, got {arr.dtype}")
    if arr.ndim == 2:
        magic = b"P5"
    elif arr.ndim == 3 and arr.shape[2] == 3:
        magic = b"P6"
    else:
        raise UnsupportedFormat(f"cannot write array of shape {arr.shape}")
    h, w = arr.shape[:2]
    return magic + f"\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(arr).tobytes()


def read_image(path: PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode(fh.read())


def write_image(path: PathLike, img) -> None:
    data = encode(img)
    with open(path, "wb") as fh:
        fh.write(data)
