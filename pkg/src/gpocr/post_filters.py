"""Enhancement stages applied after upsampling, plus benchmark noise injection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .gp_upsampler import quantize
from .image_core import GrayImage, pad_replicate


@dataclass(frozen=True)
class BilateralParams:
    radius: int = 4
    sigma_space: float = 3.0
    sigma_intensity: float = 30.0

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("bilateral radius must be >= 1")
        if not (self.sigma_space > 0 and self.sigma_intensity > 0):
            raise ValueError("bilateral sigmas must be positive")


@dataclass(frozen=True)
class ThresholdParams:
    block_radius: int = 5
    offset_c: float = 10.0

    def __post_init__(self):
        if self.block_radius < 1:
            raise ValueError("block_radius must be >= 1")

    @property
    def sigma(self) -> float:
        return self.block_radius / 2.0


@dataclass(frozen=True)
class NoiseParams:
    sigma: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("noise sigma must be >= 0")


def bilateral_filter(img: GrayImage, p: BilateralParams = BilateralParams()) -> GrayImage:
    """Edge-preserving smoothing with Gaussian spatial and range weights.

    Neighbours outside the image are taken from the nearest edge pixel.
    """
    src = img.pixels.astype(np.float64)
    h, w = src.shape
    rad = p.radius
    padded = pad_replicate(src, rad)
    num = np.zeros_like(src)
    den = np.zeros_like(src)
    inv_s = -0.5 / p.sigma_space**2
    inv_i = -0.5 / p.sigma_intensity**2
    for dy in range(-rad, rad + 1):
        for dx in range(-rad, rad + 1):
            nb = padded[rad + dy:rad + dy + h, rad + dx:rad + dx + w]
            wt = np.exp(inv_s * (dy * dy + dx * dx) + inv_i * (nb - src) ** 2)
            num += wt * nb
            den += wt
    return GrayImage(quantize(num / den))


def gaussian_taps(radius: int, sigma: float) -> np.ndarray:
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-0.5 * (t / sigma) ** 2)
    return g / g.sum()


def gaussian_local_mean(img: GrayImage, radius: int, sigma: float) -> np.ndarray:
    taps = gaussian_taps(radius, sigma)
    src = img.pixels.astype(np.float64)
    tmp = correlate1d(src, taps, axis=0, mode="nearest")
    return correlate1d(tmp, taps, axis=1, mode="nearest")


def adaptive_gaussian_threshold(img: GrayImage, p: ThresholdParams = ThresholdParams()) -> GrayImage:
    """Binarize each pixel against its Gaussian-weighted neighbourhood mean minus ``offset_c``.

    Pixels at or below the local threshold become 0, the rest 255.
    """
    mean = gaussian_local_mean(img, p.block_radius, p.sigma)
    dark = img.pixels.astype(np.float64) <= mean - p.offset_c
    return GrayImage(np.where(dark, 0, 255).astype(np.uint8))


def is_near_binary(img: GrayImage, delta: int = 20, fraction: float = 0.9) -> bool:
    px = img.pixels
    extreme = np.count_nonzero((px <= delta) | (px >= 255 - delta))
    return extreme / px.size >= fraction


def row_generator(seed: int, row: int) -> np.random.Generator:
    """Independent PCG64 stream for one image row.

    Stream ``row`` is seeded with ``SeedSequence(seed, spawn_key=(row,))``, so
    noise for a row never depends on how many rows were generated before it.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(row,))))


def add_gaussian_noise(img: GrayImage, p: NoiseParams = NoiseParams()) -> GrayImage:
    if p.sigma == 0:
        return img
    h, w = img.height, img.width
    noise = np.empty((h, w))
    for row in range(h):
        noise[row] = row_generator(p.seed, row).normal(0.0, p.sigma, w)
    noisy = img.pixels.astype(np.float64) + np.floor(noise + 0.5)
    return GrayImage(np.clip(noisy, 0, 255).astype(np.uint8))
