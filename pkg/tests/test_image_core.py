import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from gpocr.image_core import (
    BorderPolicy,
    GrayImage,
    MalformedImage,
    encode_pgm,
    load_image,
    pixel_at,
    rgb_to_luma,
    save_image,
)

images = arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)))


def test_load_2x2_pgm(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 128, 64]))
    img = load_image(p)
    assert (img.width, img.height) == (2, 2)
    assert img.data.tolist() == [0, 255, 128, 64]


def test_pgm_header_comments(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# made by hand\n3 1 # trailing\n255\n" + bytes([1, 2, 3]))
    assert load_image(p).data.tolist() == [1, 2, 3]


@pytest.mark.parametrize("payload, match", [
    (b"P2\n1 1\n255\n0", "magic"),
    (b"P5\n2 2\n255\n\x00\x01", "truncated"),
    (b"P5\n1 1\n65535\n\x00\x00", "maxval"),
    (b"P5\n1", "truncated"),
    (b"JUNK", "magic"),
])
def test_malformed(tmp_path, payload, match):
    p = tmp_path / "bad.pgm"
    p.write_bytes(payload)
    with pytest.raises(MalformedImage, match=match):
        load_image(p)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_image(tmp_path / "nope.pgm")


def test_save_1x1(tmp_path):
    p = tmp_path / "one.pgm"
    save_image(GrayImage.constant(1, 1, 0), p)
    assert p.read_bytes() == b"P5\n1 1\n255\n\x00"


def test_save_white_5x5(tmp_path):
    p = tmp_path / "w.pgm"
    save_image(GrayImage.constant(5, 5, 255), p)
    assert p.read_bytes().endswith(b"\n" + b"\xff" * 25)
    assert len(encode_pgm(GrayImage.constant(5, 5, 255))) == len(b"P5\n5 5\n255\n") + 25


def test_roundtrip_random_32(tmp_path, random_image):
    img = random_image(32, 32)
    save_image(img, tmp_path / "r.pgm")
    assert load_image(tmp_path / "r.pgm") == img


@settings(max_examples=40, deadline=None)
@given(images)
def test_roundtrip_property(tmp_path_factory, arr):
    p = tmp_path_factory.mktemp("rt") / "x.pgm"
    img = GrayImage(arr)
    save_image(img, p)
    assert load_image(p) == img


def test_png_gray_roundtrip(tmp_path, random_image):
    img = random_image(7, 9)
    save_image(img, tmp_path / "g.png")
    assert load_image(tmp_path / "g.png") == img


def test_rgb_png_white_is_white(tmp_path):
    Image.new("RGB", (3, 2), (255, 255, 255)).save(tmp_path / "w.png")
    assert load_image(tmp_path / "w.png").data.tolist() == [255] * 6


def test_luma_weights():
    px = np.array([[[255, 0, 0], [0, 255, 0], [0, 0, 255], [10, 20, 30]]], dtype=np.uint8)
    # 76.245, 149.685, 29.07, 18.15 rounded half-up
    assert rgb_to_luma(px).tolist() == [[76, 150, 29, 18]]


def test_invariants_enforced():
    with pytest.raises(ValueError):
        GrayImage(np.array([[256]]))
    with pytest.raises(ValueError):
        GrayImage(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        GrayImage.from_data(2, 2, [1, 2, 3])
    img = GrayImage(np.zeros((2, 2)))
    assert not img.pixels.flags.writeable


def test_pixel_at_examples(random_image):
    img = random_image(6, 5)
    assert pixel_at(img, -1, -1, BorderPolicy.REPLICATE) == img.pixels[0, 0]
    assert pixel_at(img, 0, 0) == img.data[0]
    assert pixel_at(img, img.height + 3, 2) == img.pixels[img.height - 1, 2]


@settings(max_examples=60, deadline=None)
@given(images, st.integers(-20, 20), st.integers(-20, 20))
def test_pixel_at_properties(arr, row, col):
    img = GrayImage(arr)
    v = pixel_at(img, row, col)
    assert v in set(arr.ravel().tolist())
    if 0 <= row < img.height and 0 <= col < img.width:
        assert v == arr[row, col]
