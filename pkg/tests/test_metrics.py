import math

import numpy as np
import pytest

from ciicrypt.errors import DimensionMismatch
from ciicrypt.metrics import chi_square_uniform, entropy, histogram, mse, psnr


def test_mse_examples(rng):
    a = np.zeros((4, 4), np.uint8)
    assert mse(a, a) == 0
    assert mse(a, np.full((4, 4), 255, np.uint8)) == 65025
    x = rng.integers(0, 256, (13, 17), dtype=np.uint8)
    y = rng.integers(0, 256, (13, 17), dtype=np.uint8)
    oracle = sum((int(p) - int(q)) ** 2 for p, q in zip(x.ravel(), y.ravel())) / x.size
    assert mse(x, y) == pytest.approx(oracle, rel=1e-12)


def test_psnr_examples():
    a = np.zeros((10, 10), np.uint8)
    assert psnr(a, a) == math.inf
    b = a.copy()
    b[:, :] = 1
    assert psnr(a, b) == pytest.approx(48.1308, abs=1e-4)
    assert psnr(a, np.full((10, 10), 255, np.uint8)) == pytest.approx(0.0, abs=1e-12)


def test_psnr_symmetric(rng):
    x = rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
    y = rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
    assert psnr(x, y) == psnr(y, x)


def test_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        psnr(np.zeros((2, 2)), np.zeros((2, 3)))


def test_histogram_statistics():
    const = np.full((16, 16), 7, np.uint8)
    h = histogram(const)
    assert h[7] == 256 and h.sum() == 256
    assert entropy(const) == 0
    assert chi_square_uniform(const) == pytest.approx(256 * 255)
    uniform = np.arange(256, dtype=np.uint8).reshape(16, 16)
    assert entropy(uniform) == pytest.approx(8.0)
    assert chi_square_uniform(uniform) == 0


def test_entropy_bounded_and_permutation_invariant(rng):
    x = rng.integers(0, 256, (50, 50), dtype=np.uint8)
    assert entropy(x) <= 8.0
    shuffled = rng.permutation(x.ravel()).reshape(x.shape)
    assert entropy(shuffled) == entropy(x)
