"""Logistic-map orbits and the argsort pixel permutation built from them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, NotABijection, ParamOutOfRange

CHAOS_ONSET = 3.5699456


@dataclass(frozen=True)
class LogisticParams:
    x0: float = 0.1775727
    rho: float = 3.5725212

    def __post_init__(self):
        if not 0.0 < self.x0 < 1.0:
            raise ParamOutOfRange(f"x0 must lie in (0, 1), got {self.x0!r}")
        if not 0.0 < self.rho < 4.0:
            raise ParamOutOfRange(f"rho must lie in (0, 4), got {self.rho!r}")

    @property
    def is_chaotic(self) -> bool:
        return CHAOS_ONSET < self.rho < 4.0


def logistic_sequence(params: LogisticParams, n: int) -> np.ndarray:
    """``x_1 .. x_n`` of ``x <- rho * x * (1 - x)`` in IEEE double precision.

    No transient is discarded.
    """
    rho = params.rho
    x = params.x0
    out = [0.0] * n
    for k in range(n):
        x = rho * x * (1.0 - x)
        out[k] = x
    return np.array(out, dtype=np.float64)


def build_permutation(params: LogisticParams, n: int) -> np.ndarray:
    """Stable ascending argsort of the orbit: ``sorted[t] = orbit[perm[t]]``."""
    if n < 1:
        raise ValueError("permutation length must be >= 1")
    return np.argsort(logistic_sequence(params, n), kind="stable")


def _flat(img, perm):
    arr = np.asarray(img)
    perm = np.asarray(perm)
    if arr.size != perm.size:
        raise LengthMismatch(f"raster has {arr.size} pixels but permutation has {perm.size}")
    return arr.ravel(), perm


def scramble(img, perm) -> np.ndarray:
    flat, perm = _flat(img, perm)
    return flat[perm].reshape(np.shape(img))


def unscramble(img, perm) -> np.ndarray:
    flat, perm = _flat(img, perm)
    out = np.empty_like(flat)
    out[perm] = flat
    return out.reshape(np.shape(img))


def invert_permutation(perm) -> np.ndarray:
    perm = np.asarray(perm)
    n = perm.size
    if perm.ndim != 1 or (n and (perm.min() < 0 or perm.max() >= n)) or \
            np.bincount(perm, minlength=n).max(initial=0) > 1:
        raise NotABijection("index array is not a permutation of 0..n-1")
    inv = np.empty(n, dtype=np.int64)
    inv[perm] = np.arange(n)
    return inv
