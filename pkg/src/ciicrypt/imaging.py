"""Raster and geometry types shared by every stage.

Images are plain numpy arrays: a plane image is a 2-D ``uint8`` array of
shape ``(H, W)`` and a colour image is ``(H, W, 3)``.  Storage is row-major
with the origin at the top-left, x to the right and y downwards.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, NonPositiveDistance


def as_plane(img) -> np.ndarray:
    """Validate and return ``img`` as a 2-D uint8 array (no copy when possible)."""
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatch(f"plane image must be a non-empty 2-D array, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.integer) or arr.min() < 0 or arr.max() > 255:
            raise DimensionMismatch("plane image intensities must be 8-bit integers")
        arr = arr.astype(np.uint8)
    return arr


def as_color(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise DimensionMismatch(f"colour image must be a (H, W, 3) uint8 array, got {arr.shape} {arr.dtype}")
    return arr


def split_channels(img) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    img = as_color(img)
    return tuple(np.ascontiguousarray(img[:, :, c]) for c in range(3))


def merge_channels(r, g, b) -> np.ndarray:
    chans = [as_plane(c) for c in (r, g, b)]
    shapes = {c.shape for c in chans}
    if len(shapes) != 1:
        raise DimensionMismatch(f"channel shapes differ: {[c.shape for c in chans]}")
    return np.stack(chans, axis=-1)


@dataclass(frozen=True)
class PickupGeometry:
    """Virtual pinhole array used for pickup and reconstruction.

    Lengths are in millimetres.  ``pixels_per_elemental`` (m) is kept
    explicitly so images whose size does not factor as ``P*m x Q*m`` can be
    rejected instead of silently re-tiled.
    """

    pinholes_x: int = 30
    pinholes_y: int = 30
    pitch_mm: float = 1.08
    gap_mm: float = 3.0
    distance_mm: float = 69.0
    pixels_per_elemental: int = 30

    def __post_init__(self):
        if min(self.pinholes_x, self.pinholes_y, self.pixels_per_elemental) < 1:
            raise ValueError("pinhole counts and pixels per elemental image must be >= 1")
        if min(self.pitch_mm, self.gap_mm, self.distance_mm) <= 0:
            raise NonPositiveDistance("pitch, gap and distance must be positive")

    @property
    def width(self) -> int:
        return self.pinholes_x * self.pixels_per_elemental

    @property
    def height(self) -> int:
        return self.pinholes_y * self.pixels_per_elemental

    @property
    def shape(self) -> Tuple[int, int]:
        """Raster shape ``(H, W)``."""
        return (self.height, self.width)

    @property
    def magnification(self) -> float:
        return self.distance_mm / self.gap_mm

    def check_image(self, img: np.ndarray) -> None:
        if img.shape[:2] != self.shape:
            raise DimensionMismatch(
                f"image is {img.shape[1]}x{img.shape[0]} but the pinhole array expects "
                f"{self.width}x{self.height} ({self.pinholes_x}x{self.pinholes_y} tiles of "
                f"{self.pixels_per_elemental} px)"
            )

    def replace(self, **changes) -> "PickupGeometry":
        return replace(self, **changes)


@dataclass(frozen=True)
class ElementalImageArray:
    """Tiled raster of P x Q elemental images, m x m pixels each.

    ``support`` marks which pixels carry recorded data (``None`` means all of
    them); depth conversion leaves holes where no source elemental exists.
    ``array_offset`` is the lateral offset, in pitches, of the pinhole array
    the tiles are referenced to.  Both are geometric: they never depend on
    pixel values.
    """

    geometry: PickupGeometry
    pixels: np.ndarray
    support: Optional[np.ndarray] = field(default=None, compare=False)
    array_offset: float = 0.0

    def __post_init__(self):
        pixels = np.array(as_plane(self.pixels), copy=True)
        self.geometry.check_image(pixels)
        pixels.flags.writeable = False
        object.__setattr__(self, "pixels", pixels)
        if self.support is not None:
            support = np.array(self.support, dtype=bool, copy=True)
            if support.shape != pixels.shape:
                raise DimensionMismatch("support mask shape differs from the raster")
            support.flags.writeable = False
            object.__setattr__(self, "support", support)

    def __eq__(self, other):
        if not isinstance(other, ElementalImageArray):
            return NotImplemented
        same_support = (self.support is None and other.support is None) or (
            self.support is not None
            and other.support is not None
            and np.array_equal(self.support, other.support)
        )
        return (
            self.geometry == other.geometry
            and self.array_offset == other.array_offset
            and np.array_equal(self.pixels, other.pixels)
            and same_support
        )

    __hash__ = None

    def with_pixels(self, pixels) -> "ElementalImageArray":
        """Same geometry and metadata, new raster."""
        return ElementalImageArray(self.geometry, pixels, self.support, self.array_offset)


def elemental_tile(eia: ElementalImageArray, i: int, j: int) -> np.ndarray:
    """Copy of the m x m tile at column ``i``, row ``j``."""
    geo = eia.geometry
    if not (0 <= i < geo.pinholes_x and 0 <= j < geo.pinholes_y):
        raise IndexOutOfRange(
            f"tile ({i}, {j}) outside {geo.pinholes_x}x{geo.pinholes_y} array"
        )
    m = geo.pixels_per_elemental
    return eia.pixels[j * m:(j + 1) * m, i * m:(i + 1) * m].copy()


def assemble_tiles(tiles, geometry: PickupGeometry) -> np.ndarray:
    """Inverse of :func:`elemental_tile`; ``tiles[j][i]`` is tile ``(i, j)``."""
    rows = [np.hstack([as_plane(t) for t in row]) for row in tiles]
    raster = np.vstack(rows)
    geometry.check_image(raster)
    return raster
