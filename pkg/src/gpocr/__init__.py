"""Gaussian-process upsampling of document images for OCR."""

__version__ = "0.1.0"

from .baseline_resample import bicubic_upsample, box_downsample, nearest_upsample
from .gp_kernel import (
    GpWeights,
    KernelConfig,
    build_cov_matrix,
    cholesky_solve,
    default_length_scale,
    matern32,
    precompute_weights,
)
from .gp_upsampler import UpsampleConfig, compute_window_mle, gp_upsample
from .image_core import BorderPolicy, GrayImage, load_image, pixel_at, save_image
from .post_filters import (
    BilateralParams,
    NoiseParams,
    ThresholdParams,
    adaptive_gaussian_threshold,
    add_gaussian_noise,
    bilateral_filter,
    is_near_binary,
)

__all__ = [
    "BilateralParams", "BorderPolicy", "GpWeights", "GrayImage", "KernelConfig", "NoiseParams",
    "ThresholdParams", "UpsampleConfig", "adaptive_gaussian_threshold", "add_gaussian_noise",
    "bicubic_upsample", "bilateral_filter", "box_downsample", "build_cov_matrix", "cholesky_solve",
    "compute_window_mle", "default_length_scale", "gp_upsample", "is_near_binary", "load_image",
    "matern32", "nearest_upsample", "pixel_at", "precompute_weights", "save_image",
]
