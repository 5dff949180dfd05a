"""Encryption and decryption pipelines and the key file format.

Encryption of one channel: pinhole pickup, depth conversion, XOR with the
CA mask, then logistic-map scrambling.  Decryption undoes the last two
stages exactly and reconstructs the plane image from the recovered
depth-converted EIA.  Colour images use the same key on every channel.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from . import ca
from .cgii import cgii_pickup, ciir_reconstruct
from .chaos import LogisticParams, build_permutation, scramble, unscramble
from .errors import CipherError, KeyParseError, ZeroSeed
from .imaging import ElementalImageArray, PickupGeometry, as_plane, merge_channels, split_channels
from .smartmap import as_depth_converted, conversion_distance, depth_convert


@dataclass(frozen=True)
class KeyMaterial:
    geometry: PickupGeometry = field(default_factory=PickupGeometry)
    logistic: LogisticParams = field(default_factory=LogisticParams)
    rules: Tuple[int, ...] = ca.REFERENCE_RULES
    ca_seed: int = 0x5A

    def __post_init__(self):
        object.__setattr__(self, "rules", ca.check_rules(self.rules))
        if self.ca_seed == 0:
            raise ZeroSeed("CA seed must be nonzero")
        if not 0 < self.ca_seed <= 0xFF:
            raise ValueError(f"CA seed must be one byte, got {self.ca_seed}")
        conversion_distance(self.geometry)

    def replace(self, **changes) -> "KeyMaterial":
        return replace(self, **changes)

    def fingerprint(self) -> str:
        return hashlib.sha256(serialize_key(self).encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class StageSelection:
    mask: bool = True
    scramble: bool = True

    def __post_init__(self):
        if not (self.mask or self.scramble):
            raise ValueError("select at least one cipher stage")


FULL = StageSelection()


@lru_cache(maxsize=4)
def _permutation(params: LogisticParams, n: int) -> np.ndarray:
    perm = build_permutation(params, n)
    perm.flags.writeable = False
    return perm


@lru_cache(maxsize=4)
def _mask(seed: int, rules: Tuple[int, ...], width: int, height: int) -> np.ndarray:
    mask = ca.generate_mask(seed, rules, width, height)
    mask.flags.writeable = False
    return mask


def key_mask(key: KeyMaterial) -> np.ndarray:
    geo = key.geometry
    return _mask(key.ca_seed, key.rules, geo.width, geo.height)


def key_permutation(key: KeyMaterial) -> np.ndarray:
    geo = key.geometry
    return _permutation(key.logistic, geo.width * geo.height)


def converted_eia(channel, key: KeyMaterial) -> ElementalImageArray:
    """Pickup followed by depth conversion: the substrate the inner cipher hides."""
    return depth_convert(cgii_pickup(as_plane(channel), key.geometry))


def inner_encrypt(raster, key: KeyMaterial, stages: StageSelection = FULL) -> np.ndarray:
    out = as_plane(raster)
    key.geometry.check_image(out)
    if stages.mask:
        out = ca.xor_mask(out, key_mask(key))
    if stages.scramble:
        out = scramble(out, key_permutation(key))
    return out


def inner_decrypt(raster, key: KeyMaterial, stages: StageSelection = FULL) -> np.ndarray:
    out = as_plane(raster)
    key.geometry.check_image(out)
    if stages.scramble:
        out = unscramble(out, key_permutation(key))
    if stages.mask:
        out = ca.xor_mask(out, key_mask(key))
    return out


def encrypt_channel(channel, key: KeyMaterial, stages: StageSelection = FULL) -> np.ndarray:
    return inner_encrypt(converted_eia(channel, key).pixels, key, stages)


def reconstruct_converted(eia: ElementalImageArray, key: KeyMaterial, z: Optional[float] = None) -> np.ndarray:
    if z is None:
        z = conversion_distance(key.geometry).z_out_mm
    return ciir_reconstruct(eia, z, fill_empty=True).image


def lost_samples(channel, key: KeyMaterial, stages: StageSelection = FULL) -> np.ndarray:
    """EIA positions whose cipher pixel is zero, i.e. presumed erased in transit."""
    lost = as_plane(channel) == 0
    if stages.scramble:
        lost = unscramble(lost, key_permutation(key))
    return lost


def recover_channel(channel, key: KeyMaterial, stages: StageSelection = FULL,
                    zeros_lost: bool = True) -> ElementalImageArray:
    """Undo scrambling and masking; the raster is bit-exact under the right key.

    With ``zeros_lost`` the support excludes positions whose cipher pixel is
    zero, so erased pixels are skipped by reconstruction instead of being
    averaged in as mask bytes.
    """
    recovered = as_depth_converted(inner_decrypt(channel, key, stages), key.geometry)
    if zeros_lost:
        support = recovered.support & ~lost_samples(channel, key, stages)
        recovered = ElementalImageArray(key.geometry, recovered.pixels, support, recovered.array_offset)
    return recovered


def decrypt_channel(channel, key: KeyMaterial, stages: StageSelection = FULL,
                    z: Optional[float] = None, zeros_lost: bool = True) -> Tuple[ElementalImageArray, np.ndarray]:
    """Recover the depth-converted EIA and reconstruct it at ``z`` (default ``d - l``)."""
    recovered = recover_channel(channel, key, stages, zeros_lost)
    return recovered, reconstruct_converted(recovered, key, z)


def encrypt(img, key: KeyMaterial, stages: StageSelection = FULL) -> np.ndarray:
    return merge_channels(*(encrypt_channel(c, key, stages) for c in split_channels(img)))


def recover_eias(img, key: KeyMaterial, stages: StageSelection = FULL,
                 zeros_lost: bool = True) -> Tuple[ElementalImageArray, ...]:
    return tuple(recover_channel(c, key, stages, zeros_lost) for c in split_channels(img))


def decrypt(img, key: KeyMaterial, stages: StageSelection = FULL, z: Optional[float] = None,
            zeros_lost: bool = True) -> np.ndarray:
    eias = recover_eias(img, key, stages, zeros_lost)
    return merge_channels(*(reconstruct_converted(e, key, z) for e in eias))


# -- key files ---------------------------------------------------------------

KEY_FIELDS = ("pinholes", "pitch_mm", "gap_mm", "distance_mm", "pixels_per_elemental",
              "x0", "rho0", "ca_rules", "ca_seed")
OPTIONAL_FIELDS = {"pixels_per_elemental"}

REFERENCE_KEY_TEXT = """\
pinholes=30x30
pitch_mm=1.08
gap_mm=3
distance_mm=69
x0=0.1775727
rho0=3.5725212
ca_rules=150,90,150,90,90,90,150,90
ca_seed=0x5A
"""


def _real(text: str) -> float:
    value = float(text)
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError(f"not a finite number: {text!r}")
    return value


def _format_real(x: float) -> str:
    text = repr(float(x))
    return text[:-2] if text.endswith(".0") else text


def parse_key(text: str) -> KeyMaterial:
    """Parse ``name=value`` key text.

    Blank lines and ``#`` comments are ignored.  ``pixels_per_elemental``
    may be omitted and then equals the horizontal pinhole count.
    """
    values = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise KeyParseError("expected name=value", line=lineno)
        name, value = (part.strip() for part in line.split("=", 1))
        if name not in KEY_FIELDS:
            raise KeyParseError("unknown field", line=lineno, field=name)
        if name in values:
            raise KeyParseError("duplicate field", line=lineno, field=name)
        values[name] = value
        lines[name] = lineno
    for name in KEY_FIELDS:
        if name not in values and name not in OPTIONAL_FIELDS:
            raise KeyParseError("missing field", field=name)

    def convert(name, fn):
        try:
            return fn(values[name])
        except (ValueError, CipherError) as exc:
            raise KeyParseError(str(exc), line=lines[name], field=name) from exc

    def pinholes(v):
        px, sep, py = v.lower().partition("x")
        if not sep:
            raise ValueError(f"expected PxQ, got {v!r}")
        return int(px), int(py)

    def seed(v):
        s = int(v, 0)
        if s == 0:
            raise ZeroSeed("CA seed must be nonzero")
        if not 0 < s <= 0xFF:
            raise ValueError(f"CA seed must be one byte, got {v!r}")
        return s

    px, py = convert("pinholes", pinholes)
    m = convert("pixels_per_elemental", int) if "pixels_per_elemental" in values else px
    pitch = convert("pitch_mm", _real)
    gap = convert("gap_mm", _real)
    dist = convert("distance_mm", _real)
    try:
        geometry = PickupGeometry(px, py, pitch, gap, dist, m)
    except (ValueError, CipherError) as exc:
        raise KeyParseError(f"invalid geometry: {exc}", field="pinholes") from exc
    x0 = convert("x0", _real)
    rho = convert("rho0", _real)
    convert("x0", lambda _: LogisticParams(x0=x0))
    convert("rho0", lambda _: LogisticParams(rho=rho))
    logistic = LogisticParams(x0, rho)
    rules = convert("ca_rules", lambda v: ca.check_rules(int(r) for r in v.split(",")))
    ca_seed = convert("ca_seed", seed)
    try:
        return KeyMaterial(geometry, logistic, rules, ca_seed)
    except (ValueError, CipherError) as exc:
        raise KeyParseError(str(exc), field="distance_mm") from exc


def serialize_key(key: KeyMaterial) -> str:
    geo = key.geometry
    lines = [
        f"pinholes={geo.pinholes_x}x{geo.pinholes_y}",
        f"pitch_mm={_format_real(geo.pitch_mm)}",
        f"gap_mm={_format_real(geo.gap_mm)}",
        f"distance_mm={_format_real(geo.distance_mm)}",
        f"pixels_per_elemental={geo.pixels_per_elemental}",
        f"x0={_format_real(key.logistic.x0)}",
        f"rho0={_format_real(key.logistic.rho)}",
        "ca_rules=" + ",".join(str(r) for r in key.rules),
        f"ca_seed=0x{key.ca_seed:02X}",
    ]
    return "\n".join(lines) + "\n"


def reference_key() -> KeyMaterial:
    return parse_key(REFERENCE_KEY_TEXT)
