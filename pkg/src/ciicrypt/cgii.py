"""Computer-generated integral imaging: pinhole pickup and CIIR.

Both kernels are separable along x and y.  All geometry is evaluated in
units of one object pixel (``pitch / m``), where the pitch cancels and the
common case of integer ``l``, ``g`` and ``z`` stays exact in binary floating
point.  Sampling is nearest-neighbour throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import ndimage, sparse

from .errors import NonPositiveDistance
from .imaging import ElementalImageArray, PickupGeometry, as_plane
from .metrics import psnr


def magnification(l: float, g: float) -> float:
    """Magnification factor ``l / g`` of a pinhole at gap ``g`` imaging distance ``l``."""
    if l <= 0 or g <= 0:
        raise NonPositiveDistance(f"distances must be positive, got l={l}, g={g}")
    return l / g


def _pickup_axis(count: int, m: int, l: float, g: float) -> np.ndarray:
    """Object pixel index sampled by each EIA column (or row); -1 when out of field."""
    i = np.arange(count)[:, None]
    u = np.arange(m)[None, :]
    # object position = pinhole centre - (offset from pinhole axis) * l/g
    x = ((2 * i + 1) * m * g - (2 * u + 1 - m) * l) / (2.0 * g)
    idx = np.floor(x).astype(np.int64)
    idx[(x < 0) | (x >= count * m)] = -1
    return idx.ravel()


def cgii_pickup(img, geo: PickupGeometry) -> ElementalImageArray:
    """Record ``img`` through the virtual pinhole array described by ``geo``.

    Tile pixels whose ray leaves the object plane record 0.
    """
    img = as_plane(img)
    geo.check_image(img)
    magnification(geo.distance_mm, geo.gap_mm)
    m = geo.pixels_per_elemental
    cols = _pickup_axis(geo.pinholes_x, m, geo.distance_mm, geo.gap_mm)
    rows = _pickup_axis(geo.pinholes_y, m, geo.distance_mm, geo.gap_mm)
    eia = img[np.ix_(np.maximum(rows, 0), np.maximum(cols, 0))]
    eia[rows < 0, :] = 0
    eia[:, cols < 0] = 0
    return ElementalImageArray(geo, eia)


def projection_matrix(count: int, m: int, g: float, z: float, offset: float = 0.0) -> sparse.csr_matrix:
    """Back-projection selector for one axis.

    Entry ``(x, i*m + u)`` is 1 when output pixel ``x`` at depth ``z`` sees
    pixel ``u`` of elemental image ``i`` through its pinhole.  ``offset``
    shifts every pinhole laterally by that many pitches.
    """
    if z <= 0 or g <= 0:
        raise NonPositiveDistance(f"reconstruction depth must be positive, got z={z}")
    n = count * m
    x = np.arange(n)[:, None]
    i = np.arange(count)[None, :]
    # twice the EIA offset from the pinhole axis, scaled by z, in object-pixel units
    t = ((2 * i + 1 + 2 * offset) * m - (2 * x + 1)) * g
    hit = np.abs(t) < m * z
    u = np.floor((t + m * z) / (2.0 * z)).astype(np.int64)
    xs, is_ = np.nonzero(hit)
    cols = is_ * m + u[xs, is_]
    data = np.ones(len(xs))
    return sparse.csr_matrix((data, (xs, cols)), shape=(n, n))


def ciir_accumulate(eia: ElementalImageArray, z: float):
    """Pre-rounding superposition: per-pixel intensity sums and overlap counts."""
    geo = eia.geometry
    m = geo.pixels_per_elemental
    ax = projection_matrix(geo.pinholes_x, m, geo.gap_mm, z, eia.array_offset)
    ay = projection_matrix(geo.pinholes_y, m, geo.gap_mm, z, eia.array_offset)
    pixels = eia.pixels.astype(np.float64)
    if eia.support is None:
        counts = np.outer(ay.sum(axis=1), ax.sum(axis=1))
    else:
        weight = eia.support.astype(np.float64)
        pixels = pixels * weight
        counts = (ax @ (ay @ weight).T).T
    sums = (ax @ (ay @ pixels).T).T
    return np.asarray(sums), np.asarray(counts)


@dataclass
class ReconstructionResult:
    image: np.ndarray
    depth_mm: float
    overlap_max: int


def _fill_from_nearest(image: np.ndarray, empty: np.ndarray) -> np.ndarray:
    if not empty.any() or empty.all():
        return image
    idx = ndimage.distance_transform_edt(empty, return_distances=False, return_indices=True)
    return image[tuple(idx)]


def ciir_reconstruct(eia: ElementalImageArray, z: float, fill_empty: bool = False) -> ReconstructionResult:
    """Back-project every elemental image onto the plane at depth ``z``.

    Each output pixel is the rounded mean of all rays landing on it; pixels
    no ray reaches are 0, or copy the nearest reached pixel when
    ``fill_empty`` is set.
    """
    sums, counts = ciir_accumulate(eia, z)
    s = np.rint(sums).astype(np.int64)
    c = np.rint(counts).astype(np.int64)
    hit = c > 0
    # round half away from zero on non-negative means
    out = (2 * s + c) // (2 * np.maximum(c, 1))
    out[~hit] = 0
    out = np.clip(out, 0, 255).astype(np.uint8)
    if fill_empty:
        out = _fill_from_nearest(out, ~hit)
    return ReconstructionResult(out, float(z), int(c.max()))


@dataclass
class DepthScanEntry:
    depth_mm: float
    psnr_db: Optional[float]
    image: np.ndarray


@dataclass
class DepthScan:
    entries: List[DepthScanEntry] = field(default_factory=list)

    @property
    def depths(self) -> List[float]:
        return [e.depth_mm for e in self.entries]

    def best(self) -> DepthScanEntry:
        """Entry with the highest PSNR (first one on ties)."""
        scored = [e for e in self.entries if e.psnr_db is not None]
        if not scored:
            raise ValueError("scan has no reference PSNR values")
        return max(scored, key=lambda e: e.psnr_db)


def depth_scan(eia: ElementalImageArray, z_start: float, z_end: float, step: float,
               reference=None, fill_empty: bool = False) -> DepthScan:
    """Reconstruct at ``z_start, z_start + step, ...`` up to ``z_end`` inclusive."""
    if z_start <= 0:
        raise NonPositiveDistance(f"scan must start at a positive depth, got {z_start}")
    if z_end < z_start or step <= 0:
        raise ValueError("need z_start <= z_end and step > 0")
    n = int(math.floor((z_end - z_start) / step + 1e-9)) + 1
    scan = DepthScan()
    for k in range(n):
        z = z_start + k * step
        rec = ciir_reconstruct(eia, z, fill_empty=fill_empty)
        score = psnr(reference, rec.image) if reference is not None else None
        scan.entries.append(DepthScanEntry(z, score, rec.image))
    return scan
