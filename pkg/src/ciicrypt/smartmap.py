"""Smart pixel mapping: depth conversion of an elemental image array.

An EIA picked up at distance ``l`` is rewritten into the EIA that would
have been picked up at ``d - l`` with ``d = m * g``, so CIIR runs at a much
smaller magnification.  The 1-D index law is applied separably along x and
y.  Target pixels whose source elemental falls outside the array carry no
data; they are zero in the raster and excluded from the support mask.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DepthNotConvertible, InvalidPixelIndex
from .imaging import ElementalImageArray, PickupGeometry


@dataclass(frozen=True)
class DepthConversionParams:
    m: int
    d_mm: float
    z_out_mm: float


def conversion_distance(geo: PickupGeometry) -> DepthConversionParams:
    m = geo.pixels_per_elemental
    d = m * geo.gap_mm
    if geo.distance_mm >= d:
        raise DepthNotConvertible(
            f"pickup distance {geo.distance_mm} mm is not below d = m*g = {d} mm"
        )
    return DepthConversionParams(m, d, d - geo.distance_mm)


def _shift(m: int) -> int:
    return m // 2 if m % 2 == 0 else (m + 1) // 2


def smart_map_indices(i: int, j: int, m: int, count: Optional[int] = None) -> Optional[Tuple[int, int]]:
    """Source ``(elemental, pixel)`` feeding target elemental ``i``, pixel ``j``.

    Returns ``None`` when the source elemental lies outside ``[0, count)``;
    ``count`` defaults to ``m``.
    """
    if not 0 <= j < m:
        raise InvalidPixelIndex(f"pixel index {j} outside [0, {m})")
    count = m if count is None else count
    q = (m - 1) - j
    p = i + _shift(m) - j
    if not 0 <= p < count:
        return None
    return p, q


def array_offset(m: int) -> float:
    """Lateral offset, in pitches, of the pinhole array a converted EIA belongs to.

    Follows from the index law: target tile ``i`` views the scene from
    ``shift(m) - (m - 1) / 2`` pitches beyond pinhole ``i``.
    """
    return _shift(m) - (m - 1) / 2.0


def _axis_sources(count: int, m: int) -> np.ndarray:
    i = np.arange(count)[:, None]
    j = np.arange(m)[None, :]
    p = i + _shift(m) - j
    q = (m - 1) - j
    src = p * m + q
    src[(p < 0) | (p >= count)] = -1
    return src.ravel()


def _check_convertible(geo: PickupGeometry) -> DepthConversionParams:
    params = conversion_distance(geo)
    m = geo.pixels_per_elemental
    if geo.pinholes_x != m or geo.pinholes_y != m:
        raise DepthNotConvertible(
            f"depth conversion needs as many elementals as pixels per elemental "
            f"({geo.pinholes_x}x{geo.pinholes_y} pinholes, m={m})"
        )
    return params


def conversion_support(geo: PickupGeometry) -> np.ndarray:
    """Boolean mask of converted-EIA pixels that have a source elemental."""
    _check_convertible(geo)
    m = geo.pixels_per_elemental
    cols = _axis_sources(geo.pinholes_x, m) >= 0
    rows = _axis_sources(geo.pinholes_y, m) >= 0
    return np.outer(rows, cols)


def as_depth_converted(pixels, geo: PickupGeometry) -> ElementalImageArray:
    """Wrap a raster known to be depth-converted with its support and array offset."""
    return ElementalImageArray(
        geo, pixels, conversion_support(geo), array_offset(geo.pixels_per_elemental)
    )


def depth_convert(eia: ElementalImageArray) -> ElementalImageArray:
    geo = eia.geometry
    _check_convertible(geo)
    if eia.support is not None or eia.array_offset != 0:
        raise DepthNotConvertible("input is already depth-converted")
    m = geo.pixels_per_elemental
    cols = _axis_sources(geo.pinholes_x, m)
    rows = _axis_sources(geo.pinholes_y, m)
    out = eia.pixels[np.ix_(np.maximum(rows, 0), np.maximum(cols, 0))]
    out[rows < 0, :] = 0
    out[:, cols < 0] = 0
    return as_depth_converted(out, geo)
