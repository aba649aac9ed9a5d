import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cohlen import synth
from cohlen.raster import ImageGrid
from cohlen.stats import (
    global_mean,
    global_moment,
    homogeneity_lattice,
    quality_ratio,
    summarize,
    windowed_summary,
)

HALF = ImageGrid(np.hstack([np.zeros((4, 2)), np.full((4, 2), 255.0)]))


@pytest.mark.parametrize("image, expected", [
    (ImageGrid(np.full((8, 8), 100.0)), 100.0),
    (ImageGrid([[0.0, 255.0]]), 127.5),
    (ImageGrid(np.arange(16.0).reshape(4, 4)), 7.5),
])
def test_global_mean(image, expected):
    assert global_mean(image) == expected


def test_moments_analytic():
    assert global_moment(ImageGrid(np.full((3, 3), 9.0)), 2) == 0.0
    assert global_moment(HALF, 2) == 16256.25
    assert global_moment(HALF, 3) == 0.0


def test_moment_order_rejected():
    with pytest.raises(ValueError):
        global_moment(HALF, 1)


def test_windowed_summary():
    img = synth.generate(synth.TextureSpec("noise", 16, seed=3))
    full = windowed_summary(img, 0, 0, 16, 16, orders=(2, 3))
    assert full.m0 == global_mean(img)
    assert full.mk[2] == global_moment(img, 2)
    assert full.mk[3] == global_moment(img, 3)
    one = windowed_summary(img, 5, 7, 1, 1)
    assert one.m0 == img.data[7, 5] and one.mk[2] == 0.0
    sq = windowed_summary(ImageGrid([[0.0, 0.0], [255.0, 255.0]]), 0, 0, 2, 2)
    assert (sq.m0, sq.mk[2]) == (127.5, 16256.25)


@pytest.mark.parametrize("window", [(0, 0, 0, 1), (3, 0, 2, 1), (-1, 0, 1, 1)])
def test_window_bounds(window):
    with pytest.raises(ValueError):
        windowed_summary(ImageGrid(np.zeros((4, 4))), *window)


def test_quality_ratio_sentinels():
    assert quality_ratio(0.0, 0.0) == 0.0
    assert quality_ratio(0.0, 4.0) == math.inf
    assert quality_ratio(10.0, 4.0) == 0.2


def test_lattice_constant():
    grid = homogeneity_lattice(ImageGrid(np.full((10, 10), 50.0)), 3)
    assert grid.verdicts.shape == (4, 4)
    assert grid.verdicts.all() and grid.frame_homogeneous


def test_lattice_half_split():
    grid = homogeneity_lattice(HALF, 2, 0.5)
    assert grid.verdicts.all()
    assert grid.frame.quality_ratio == 1.0
    assert not grid.frame_homogeneous


def test_lattice_every_pixel_once():
    grid = homogeneity_lattice(ImageGrid(np.zeros((10, 7))), 4)
    cover = np.zeros((10, 7), int)
    for row in grid.origins:
        for x0, y0, w, h in row:
            cover[y0:y0 + h, x0:x0 + w] += 1
    assert (cover == 1).all()


def test_lattice_against_bruteforce():
    rng = np.random.default_rng(4)
    data = np.clip(rng.normal(100, 60, (48, 40)), 0, 255)
    data[:16, :16] *= 0.2
    img = ImageGrid(data)
    grid = homogeneity_lattice(img, 16, 0.5)
    expected = []
    for y0 in range(0, 48, 16):
        row = []
        for x0 in range(0, 40, 16):
            vals = data[y0:y0 + 16, x0:x0 + 16].ravel().tolist()
            m = sum(vals) / len(vals)
            var = sum((v - m) ** 2 for v in vals) / len(vals)
            row.append(math.sqrt(var) / m <= 0.5)
        expected.append(row)
    assert grid.verdicts.tolist() == expected
    assert not all(map(all, expected)) and any(map(any, expected))


def test_lattice_window_validation():
    with pytest.raises(ValueError):
        homogeneity_lattice(HALF, 0)
    with pytest.raises(ValueError):
        homogeneity_lattice(HALF, 5)


small = arrays(np.float64, st.tuples(st.integers(2, 9), st.integers(2, 9)),
               elements=st.integers(0, 100).map(float))


@settings(max_examples=50, deadline=None)
@given(small, st.integers(0, 155))
def test_shift_invariance(data, c):
    a = summarize(ImageGrid(data), (2, 3))
    b = summarize(ImageGrid(data + c), (2, 3))
    assert b.m0 == pytest.approx(a.m0 + c, rel=1e-12, abs=1e-12)
    for k in (2, 3):
        assert b.mk[k] == pytest.approx(a.mk[k], rel=1e-9, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(small, st.sampled_from([0.5, 1.5, 2.0, 2.5]))
def test_scale_covariance(data, alpha):
    a = summarize(ImageGrid(data), (2, 3, 4))
    b = summarize(ImageGrid(data * alpha), (2, 3, 4))
    assert b.m0 == pytest.approx(alpha * a.m0, rel=1e-12)
    for k in (2, 3, 4):
        assert b.mk[k] == pytest.approx(alpha ** k * a.mk[k], rel=1e-9, abs=1e-9)
    assert b.quality_ratio == pytest.approx(a.quality_ratio, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_variance_two_pass(seed):
    data = np.random.default_rng(seed).uniform(0, 255, (64, 64))
    vals = data.ravel().tolist()
    mean = sum(vals) / len(vals)
    var = sum((v - mean) ** 2 for v in vals) / len(vals)
    assert global_moment(ImageGrid(data), 2) == pytest.approx(var, rel=1e-9)


@pytest.mark.parametrize("size", [7, 16])
def test_partition_mean(size):
    img = synth.generate(synth.TextureSpec("noise", (50, 37), seed=9))
    grid = homogeneity_lattice(img, size)
    total = sum(c.m0 * w * h for row, orow in zip(grid.cells, grid.origins)
                for c, (_, _, w, h) in zip(row, orow))
    assert total / (50 * 37) == pytest.approx(global_mean(img), rel=1e-9)
