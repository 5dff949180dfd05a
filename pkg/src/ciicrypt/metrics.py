"""Image quality and histogram statistics."""
import math

import numpy as np

from .errors import DimensionMismatch

MAX_INTENSITY = 255.0


def _pair(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return a.astype(np.float64), b.astype(np.float64)


def mse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.mean((a - b) ** 2))


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical images."""
    err = mse(a, b)
    if err == 0:
        return math.inf
    return 10.0 * math.log10(MAX_INTENSITY ** 2 / err)


def histogram(img) -> np.ndarray:
    return np.bincount(np.asarray(img, dtype=np.uint8).ravel(), minlength=256)


def entropy(img) -> float:
    """Shannon entropy of the intensity histogram, in bits."""
    counts = histogram(img)
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log2(p)).sum())


def chi_square_uniform(img) -> float:
    """Chi-square statistic of the histogram against 256 equiprobable bins."""
    counts = histogram(img).astype(np.float64)
    expected = counts.sum() / 256.0
    return float(((counts - expected) ** 2 / expected).sum())
