"""Upsample, denoise and binarize an image for OCR."""

from __future__ import annotations

from dataclasses import dataclass, field

from .baseline_resample import bicubic_upsample, nearest_upsample
from .gp_kernel import KernelConfig
from .gp_upsampler import UpsampleConfig, gp_upsample
from .image_core import GrayImage
from .post_filters import (
    BilateralParams,
    ThresholdParams,
    adaptive_gaussian_threshold,
    bilateral_filter,
    is_near_binary,
)

METHODS = ("gp", "bicubic", "nearest")


@dataclass(frozen=True)
class PipelineParams:
    bilateral: BilateralParams = field(default_factory=BilateralParams)
    threshold: ThresholdParams = field(default_factory=ThresholdParams)
    near_binary_delta: int = 20
    near_binary_fraction: float = 0.9
    threshold_mode: str = "auto"  # auto | force | off

    def __post_init__(self):
        if self.threshold_mode not in ("auto", "force", "off"):
            raise ValueError(f"unknown threshold mode {self.threshold_mode!r}")


def upsample(img: GrayImage, method: str, ratio: int, ell: float | None = None) -> GrayImage:
    if method == "gp":
        kernel = KernelConfig(ell) if ell is not None else KernelConfig()
        return gp_upsample(img, UpsampleConfig(ratio, kernel))
    if method == "bicubic":
        return bicubic_upsample(img, ratio)
    if method == "nearest":
        if not 2 <= ratio <= 8:
            raise ValueError(f"ratio must be in [2, 8], got {ratio}")
        return nearest_upsample(img, ratio)
    raise ValueError(f"unknown upsampling method {method!r}; expected one of {METHODS}")


def enhance(img: GrayImage, params: PipelineParams = PipelineParams()) -> tuple[GrayImage, list[str]]:
    """Bilateral filter, then adaptive threshold unless the result is already near-binary.

    Returns the image and a log of the stages that ran or were skipped.
    """
    log = []
    out = bilateral_filter(img, params.bilateral)
    log.append("bilateral: ran")
    if params.threshold_mode == "off":
        log.append("threshold: skipped (disabled)")
    elif params.threshold_mode == "auto" and is_near_binary(
            out, params.near_binary_delta, params.near_binary_fraction):
        log.append("threshold: skipped (near-binary)")
    else:
        out = adaptive_gaussian_threshold(out, params.threshold)
        log.append("threshold: ran" + (" (forced)" if params.threshold_mode == "force" else ""))
    return out, log


def run_pipeline(img: GrayImage, method: str, ratio: int, params: PipelineParams = PipelineParams(),
                 ell: float | None = None) -> tuple[GrayImage, list[str]]:
    up = upsample(img, method, ratio, ell)
    out, log = enhance(up, params)
    return out, [f"upsample: ran ({method}, x{ratio})"] + log
