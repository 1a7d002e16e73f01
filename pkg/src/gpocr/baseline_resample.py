"""Bicubic, nearest-neighbour and box-average resampling."""

from __future__ import annotations

import numpy as np

from .gp_upsampler import quantize
from .image_core import GrayImage

KEYS_A = -0.5


class ImageTooSmall(ValueError):
    pass


def keys_cubic(t, a: float = KEYS_A):
    """Keys cubic convolution kernel."""
    t = np.abs(np.asarray(t, dtype=np.float64))
    t2, t3 = t * t, t * t * t
    near = (a + 2) * t3 - (a + 3) * t2 + 1
    far = a * t3 - 5 * a * t2 + 8 * a * t - 4 * a
    return np.where(t <= 1, near, np.where(t < 2, far, 0.0))


def source_positions(n_out: int, ratio: int) -> np.ndarray:
    """Low-res coordinate of each output sample (subcell centres)."""
    return (np.arange(n_out) + 0.5) / ratio - 0.5


def cubic_matrix(n_in: int, ratio: int, a: float = KEYS_A) -> np.ndarray:
    """``(n_in * ratio, n_in)`` matrix applying 1-D cubic convolution with edge clamping."""
    n_out = n_in * ratio
    pos = source_positions(n_out, ratio)
    base = np.floor(pos).astype(int)
    mat = np.zeros((n_out, n_in))
    rows = np.arange(n_out)
    for tap in range(-1, 3):
        idx = base + tap
        wt = keys_cubic(pos - idx, a)
        np.add.at(mat, (rows, np.clip(idx, 0, n_in - 1)), wt)
    return mat


def bicubic_upsample(img: GrayImage, ratio: int) -> GrayImage:
    if not 2 <= ratio <= 8:
        raise ValueError(f"ratio must be in [2, 8], got {ratio}")
    src = img.pixels.astype(np.float64)
    rows = cubic_matrix(img.height, ratio)
    cols = cubic_matrix(img.width, ratio)
    return GrayImage(quantize(rows @ src @ cols.T))


def nearest_upsample(img: GrayImage, ratio: int) -> GrayImage:
    if ratio < 1:
        raise ValueError(f"ratio must be >= 1, got {ratio}")
    return GrayImage(np.repeat(np.repeat(img.pixels, ratio, axis=0), ratio, axis=1))


def box_downsample(img: GrayImage, ratio: int) -> GrayImage:
    """Average non-overlapping ``ratio x ratio`` blocks; partial blocks are dropped."""
    if ratio < 2:
        raise ValueError(f"ratio must be >= 2, got {ratio}")
    h, w = img.height // ratio, img.width // ratio
    if h == 0 or w == 0:
        raise ImageTooSmall(f"{img.width}x{img.height} image cannot be reduced {ratio}x")
    blocks = img.pixels[:h * ratio, :w * ratio].astype(np.int64)
    sums = blocks.reshape(h, ratio, w, ratio).sum(axis=(1, 3))
    n = ratio * ratio
    # integer round-half-up of sums / n
    return GrayImage(((2 * sums + n) // (2 * n)).astype(np.uint8))
