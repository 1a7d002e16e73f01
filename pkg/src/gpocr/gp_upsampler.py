"""Sliding-window GP posterior-mean upsampling."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .gp_kernel import WINDOW_RADIUS, WINDOW_SIZE, GpWeights, KernelConfig, precompute_weights
from .image_core import BorderPolicy, GrayImage, pad_replicate


@dataclass(frozen=True)
class UpsampleConfig:
    ratio: int = 4
    kernel: KernelConfig = field(default_factory=KernelConfig)
    border: BorderPolicy = BorderPolicy.REPLICATE

    def __post_init__(self):
        if not 2 <= self.ratio <= 8:
            raise ValueError(f"ratio must be in [2, 8], got {self.ratio}")
        if self.border is not BorderPolicy.REPLICATE:
            raise ValueError(f"unsupported border policy {self.border}")


CENTRE = WINDOW_SIZE**2 // 2


def quantize(values: np.ndarray) -> np.ndarray:
    """Round half-up and clamp to the 8-bit range."""
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def compute_window_mle(window, weights: GpWeights) -> float:
    """Constant prior mean maximising the window likelihood (a weighted average)."""
    window = np.asarray(window, dtype=np.float64).reshape(-1)
    if window.size != WINDOW_SIZE**2:
        raise ValueError(f"window must hold {WINDOW_SIZE**2} samples, got {window.size}")
    # weights sum to 1, so centring on one sample changes nothing but rounding
    ref = window[CENTRE]
    return float(ref + weights.mle_weights @ (window - ref))


def _upsample_rows(padded: np.ndarray, rows: range, width: int, weights: GpWeights) -> np.ndarray:
    r = weights.ratio
    block = padded[rows.start:rows.stop + 2 * WINDOW_RADIUS]
    windows = sliding_window_view(block, (WINDOW_SIZE, WINDOW_SIZE))
    windows = windows.reshape(len(rows), width, WINDOW_SIZE**2)
    ref = windows[..., CENTRE]
    f0 = ref + (windows - ref[..., None]) @ weights.mle_weights
    resid = windows - f0[..., None]
    fine = f0[..., None] + resid @ weights.interp_weights.T  # (rows, w, r*r)
    fine = fine.reshape(len(rows), width, r, r).transpose(0, 2, 1, 3)
    return quantize(fine.reshape(len(rows) * r, width * r))


def gp_upsample(img: GrayImage, cfg: UpsampleConfig | None = None, *, workers: int = 1,
                chunk_rows: int = 64) -> GrayImage:
    """Upsample ``img`` by ``cfg.ratio`` in both directions.

    Each low-resolution pixel is replaced by ``ratio**2`` fine pixels predicted
    from its border-replicated 5x5 neighbourhood::

        f0 = mle_weights . f
        f* = f0 + w . (f - f0)

    Rows are processed in independent chunks; ``workers > 1`` hands chunks to a
    thread pool and gives bit-identical output.
    """
    cfg = cfg or UpsampleConfig()
    weights = precompute_weights(cfg.ratio, cfg.kernel)
    src = img.pixels.astype(np.float64)
    padded = pad_replicate(src, WINDOW_RADIUS)
    h, w = src.shape
    chunks = [range(s, min(s + chunk_rows, h)) for s in range(0, h, chunk_rows)]

    def run(rows):
        return _upsample_rows(padded, rows, w, weights)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(rows) for rows in chunks]
    return GrayImage(np.vstack(parts))
