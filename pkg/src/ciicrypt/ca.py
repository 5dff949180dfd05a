"""Hybrid rule-90/150 cellular automaton keystream and XOR mask.

The automaton has 8 cells with null (fixed zero) boundaries.  A state is
packed into one byte with cell 0 as the most significant bit.
"""
from __future__ import annotations

from collections import Counter
from typing import Dict, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, ZeroSeed
from .imaging import ElementalImageArray

CELLS = 8
REFERENCE_RULES: Tuple[int, ...] = (150, 90, 150, 90, 90, 90, 150, 90)
# period of REFERENCE_RULES, identical for all 255 nonzero seeds
REFERENCE_PERIOD = 255


def check_rules(rules: Sequence[int]) -> Tuple[int, ...]:
    rules = tuple(int(r) for r in rules)
    if len(rules) != CELLS or any(r not in (90, 150) for r in rules):
        raise ValueError(f"rule vector must hold {CELLS} entries from {{90, 150}}, got {rules}")
    return rules


def _rule150_mask(rules: Sequence[int]) -> int:
    mask = 0
    for i, r in enumerate(rules):
        if r == 150:
            mask |= 1 << (CELLS - 1 - i)
    return mask


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= 0xFF:
        raise ValueError(f"CA state must fit in one byte, got {seed}")
    if seed == 0:
        raise ZeroSeed("CA seed must be nonzero")
    return seed


def ca_step(state: int, rules: Sequence[int]) -> int:
    """Advance one generation.

    Rule 90 cells take left XOR right, rule 150 cells also XOR themselves.
    """
    rules = check_rules(rules)
    return _step(int(state), _rule150_mask(rules))


def _step(state: int, mask150: int) -> int:
    # >> 1 brings the left neighbour into place, << 1 the right one
    return (state >> 1) ^ ((state << 1) & 0xFF) ^ (state & mask150)


def byte_stream(seed: int, rules: Sequence[int], n: int) -> np.ndarray:
    """Bytes ``state_1 .. state_n`` of the automaton started at ``seed``."""
    seed = _check_seed(seed)
    mask150 = _rule150_mask(check_rules(rules))
    if n <= 0:
        return np.zeros(0, dtype=np.uint8)
    # states are bytes, so the orbit repeats within 256 steps
    seen: Dict[int, int] = {seed: 0}
    orbit = [seed]
    state = seed
    while True:
        state = _step(state, mask150)
        if state in seen:
            start = seen[state]
            break
        seen[state] = len(orbit)
        orbit.append(state)
        if len(orbit) > n:
            return np.array(orbit[1:n + 1], dtype=np.uint8)
    head = np.array(orbit[1:], dtype=np.uint8)
    cycle = np.array(orbit[start:], dtype=np.uint8)
    if n <= len(head):
        return head[:n]
    rest = n - len(head)
    reps = -(-rest // len(cycle))
    return np.concatenate([head, np.tile(cycle, reps)[:rest]])


def measure_period(seed: int, rules: Sequence[int]) -> int:
    """Smallest ``t >= 1`` with ``state_t == seed``, by direct iteration."""
    seed = _check_seed(seed)
    mask150 = _rule150_mask(check_rules(rules))
    state = seed
    for t in range(1, 257):
        state = _step(state, mask150)
        if state == seed:
            return t
    raise ValueError(f"seed {seed:#04x} is not on a cycle of this automaton")


def cycle_structure(rules: Sequence[int]) -> Dict[int, int]:
    """Map period -> number of nonzero seeds with that period."""
    return dict(Counter(measure_period(s, rules) for s in range(1, 256)))


def generate_mask(seed: int, rules: Sequence[int], width: int, height: int) -> np.ndarray:
    if width < 1 or height < 1:
        raise ValueError("mask dimensions must be >= 1")
    return byte_stream(seed, rules, width * height).reshape(height, width)


def xor_mask(img, mask):
    """Bitwise XOR of a raster (or an EIA's raster) with a mask of equal shape."""
    mask = np.asarray(mask, dtype=np.uint8)
    if isinstance(img, ElementalImageArray):
        return img.with_pixels(xor_mask(img.pixels, mask))
    img = np.asarray(img, dtype=np.uint8)
    if img.shape != mask.shape:
        raise DimensionMismatch(f"mask shape {mask.shape} differs from image shape {img.shape}")
    return np.bitwise_xor(img, mask)
