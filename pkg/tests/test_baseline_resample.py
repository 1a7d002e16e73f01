import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from oracles import bicubic_oracle

from gpocr.baseline_resample import (
    ImageTooSmall,
    bicubic_upsample,
    box_downsample,
    keys_cubic,
    nearest_upsample,
)
from gpocr.image_core import GrayImage

images = arrays(np.uint8, st.tuples(st.integers(1, 9), st.integers(1, 9)))


def test_keys_partition_of_unity():
    t = np.linspace(0, 1, 17)
    total = sum(keys_cubic(t - k) for k in range(-1, 3))
    np.testing.assert_allclose(total, 1.0, atol=1e-14)


@pytest.mark.parametrize("c", [0, 77, 255])
@pytest.mark.parametrize("ratio", [2, 3, 4])
def test_bicubic_constant(c, ratio):
    out = bicubic_upsample(GrayImage.constant(5, 4, c), ratio)
    assert out.pixels.shape == (4 * ratio, 5 * ratio)
    assert np.all(out.pixels == c)


def test_bicubic_linear_ramp():
    ratio = 4
    ramp = np.tile(np.arange(0, 200, 10, dtype=np.uint8), (6, 1))  # value = 10 * column
    out = bicubic_upsample(GrayImage(ramp), ratio).pixels.astype(float)
    xs = (np.arange(out.shape[1]) + 0.5) / ratio - 0.5
    interior = (xs >= 1) & (xs <= ramp.shape[1] - 2)
    expected = 10 * xs[interior]
    assert np.max(np.abs(out[:, interior] - expected)) <= 1


def test_bicubic_matches_oracle(random_image):
    img = random_image(8, 8)
    out = bicubic_upsample(img, 2).pixels.astype(int)
    assert np.max(np.abs(out - bicubic_oracle(img.pixels, 2).astype(int))) <= 1


def test_bicubic_ratio_range():
    with pytest.raises(ValueError):
        bicubic_upsample(GrayImage.constant(2, 2, 0), 9)


def test_nearest_examples():
    out = nearest_upsample(GrayImage(np.array([[1, 2]])), 2)
    assert out.pixels.tolist() == [[1, 1, 2, 2], [1, 1, 2, 2]]
    img = GrayImage(np.array([[3, 4], [5, 6]]))
    assert nearest_upsample(img, 1) == img


@settings(max_examples=40, deadline=None)
@given(images, st.integers(1, 5))
def test_nearest_block_structure(arr, r):
    out = nearest_upsample(GrayImage(arr), r).pixels
    ys, xs = np.indices(out.shape)
    assert np.array_equal(out, arr[ys // r, xs // r])


def test_box_examples():
    assert box_downsample(GrayImage.constant(4, 4, 100), 4).pixels.tolist() == [[100]]
    assert box_downsample(GrayImage(np.array([[0, 255], [255, 0]])), 2).pixels.tolist() == [[128]]
    px = np.array([[10, 20, 99], [30, 40, 99], [99, 99, 99]])
    assert box_downsample(GrayImage(px), 2).pixels.tolist() == [[25]]


def test_box_too_small():
    with pytest.raises(ImageTooSmall):
        box_downsample(GrayImage.constant(3, 8, 0), 4)


@settings(max_examples=40, deadline=None)
@given(images, st.integers(2, 5))
def test_box_inverts_nearest(arr, r):
    img = GrayImage(arr)
    assert box_downsample(nearest_upsample(img, r), r) == img


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 255), st.integers(2, 4))
def test_all_preserve_constants(c, r):
    img = GrayImage.constant(4, 4, c)
    for out in (bicubic_upsample(img, r), nearest_upsample(img, r), box_downsample(img, 2)):
        assert np.all(out.pixels == c)
