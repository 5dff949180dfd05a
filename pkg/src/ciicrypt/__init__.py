"""Optical-style image encryption on depth-converted integral-imaging arrays."""
from .cipher import (FULL, KeyMaterial, StageSelection, decrypt, decrypt_channel, encrypt,
                     encrypt_channel, parse_key, recover_eias, reference_key, serialize_key)
from .imaging import ElementalImageArray, PickupGeometry
from .netpbm import read_image, write_image

__all__ = [
    "FULL", "KeyMaterial", "StageSelection", "decrypt", "decrypt_channel", "encrypt",
    "encrypt_channel", "parse_key", "recover_eias", "reference_key", "serialize_key",
    "ElementalImageArray", "PickupGeometry", "read_image", "write_image",
]
__version__ = "0.1.0"
