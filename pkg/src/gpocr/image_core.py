"""Grayscale raster type, border-clamped pixel access and PGM/PNG file I/O."""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class MalformedImage(ValueError):
    """Raised when an image file cannot be decoded."""


class BorderPolicy(enum.Enum):
    REPLICATE = "replicate"


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Single-channel 8-bit image stored as an ``(height, width)`` uint8 array.

    The array is copied and marked read-only on construction, so instances
    can be shared freely.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if arr.dtype != np.uint8:
            if np.issubdtype(arr.dtype, np.floating) and not np.all(np.isfinite(arr)):
                raise ValueError("non-finite intensities")
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("intensities must lie in [0, 255]")
            if np.issubdtype(arr.dtype, np.floating) and np.any(arr != np.floor(arr)):
                raise ValueError("intensities must be integral")
        arr = np.array(arr, dtype=np.uint8, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @classmethod
    def from_data(cls, width: int, height: int, data) -> "GrayImage":
        data = np.asarray(data)
        if data.size != width * height:
            raise ValueError(f"data length {data.size} != {width}x{height}")
        return cls(data.reshape(height, width))

    @classmethod
    def constant(cls, width: int, height: int, value: int) -> "GrayImage":
        return cls(np.full((height, width), value, dtype=np.uint8))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def data(self) -> np.ndarray:
        """Row-major flat view of the intensities."""
        return self.pixels.reshape(-1)

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and np.array_equal(self.pixels, other.pixels)

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


def pixel_at(img: GrayImage, row: int, col: int, policy: BorderPolicy = BorderPolicy.REPLICATE) -> int:
    if policy is not BorderPolicy.REPLICATE:
        raise ValueError(f"unsupported border policy {policy}")
    r = min(max(row, 0), img.height - 1)
    c = min(max(col, 0), img.width - 1)
    return int(img.pixels[r, c])


def pad_replicate(pixels: np.ndarray, pad: int) -> np.ndarray:
    return np.pad(pixels, pad, mode="edge")


def rgb_to_luma(rgb: np.ndarray) -> np.ndarray:
    """BT.601 luma, rounded half-up."""
    rgb = rgb.astype(np.int64)
    # integer form of 0.299 R + 0.587 G + 0.114 B, exact half-up rounding
    acc = 299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2]
    return ((acc + 500) // 1000).astype(np.uint8)


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n:
        ch = buf[pos:pos + 1]
        if ch == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise MalformedImage("truncated PGM header")
    return buf[start:pos], pos


def decode_pgm(buf: bytes) -> GrayImage:
    if buf[:2] != b"P5":
        raise MalformedImage(f"bad PGM magic {buf[:2]!r}")
    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_token(buf, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise MalformedImage(f"non-numeric PGM header field {tok!r}") from None
    width, height, maxval = fields
    if maxval != 255:
        raise MalformedImage(f"PGM maxval must be 255, got {maxval}")
    if width < 1 or height < 1:
        raise MalformedImage(f"invalid PGM dimensions {width}x{height}")
    # exactly one whitespace byte separates the header from the raster
    if pos >= len(buf) or not buf[pos:pos + 1].isspace():
        raise MalformedImage("missing whitespace after PGM header")
    pos += 1
    payload = buf[pos:pos + width * height]
    if len(payload) != width * height:
        raise MalformedImage(f"truncated PGM payload: {len(payload)} of {width * height} bytes")
    return GrayImage(np.frombuffer(payload, dtype=np.uint8).reshape(height, width))


def encode_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def _decode_png(path: Path) -> GrayImage:
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "P":
                im = im.convert("RGBA" if "transparency" in im.info else "RGB")
                mode = im.mode
            if mode in ("L", "1"):
                arr = np.asarray(im.convert("L"))
            elif mode in ("LA",):
                arr = np.asarray(im)[..., 0]
            elif mode in ("RGB", "RGBA"):
                arr = rgb_to_luma(np.asarray(im)[..., :3])
            else:
                raise MalformedImage(f"unsupported PNG mode {mode}")
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise MalformedImage(f"cannot decode PNG {path}: {exc}") from exc
    return GrayImage(arr)


def load_image(path) -> GrayImage:
    """Read a binary PGM (P5, maxval 255) or a PNG file.

    Colour PNGs are reduced to BT.601 luma.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    buf = path.read_bytes()
    if buf[:8] == b"\x89PNG\r\n\x1a\n":
        return _decode_png(path)
    return decode_pgm(buf)


def save_image(img: GrayImage, path) -> None:
    """Write ``img`` as PGM, or as 8-bit gray PNG when the suffix is ``.png``."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        from PIL import Image

        Image.fromarray(np.ascontiguousarray(img.pixels)).save(path)
        return
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(encode_pgm(img))
    os.replace(tmp, path)
