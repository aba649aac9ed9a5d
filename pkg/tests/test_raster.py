import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from cohlen.raster import (
    ImageFormatError,
    ImageGrid,
    NormalizationSpec,
    load_image,
    load_pbm,
    nearest_rank,
    normalize_contrast,
    save_gray,
    save_pbm,
)


def write_pgm(path, width, height, payload, magic=b"P5", maxval=255):
    path.write_bytes(magic + f"\n{width} {height}\n{maxval}\n".encode() + bytes(payload))


def test_load_pgm_bytes(tmp_path):
    p = tmp_path / "a.pgm"
    write_pgm(p, 2, 2, [0, 64, 128, 255])
    img = load_image(p)
    assert (img.width, img.height) == (2, 2)
    assert img.intensities.tolist() == [0.0, 64.0, 128.0, 255.0]


def test_pgm_header_comments(tmp_path):
    p = tmp_path / "c.pgm"
    p.write_bytes(b"P5\n# made by hand\n3 1\n255\n" + bytes([1, 2, 3]))
    assert load_image(p).intensities.tolist() == [1.0, 2.0, 3.0]


def test_row_zero_is_top(tmp_path):
    p = tmp_path / "t.pgm"
    write_pgm(p, 1, 2, [10, 20])
    assert load_image(p).data[0, 0] == 10.0


def test_ascii_pgm_rejected(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P2\n2 1\n255\n0 1\n")
    with pytest.raises(ImageFormatError, match="unsupported format"):
        load_image(p)


def test_16bit_pgm_rejected(tmp_path):
    p = tmp_path / "a.pgm"
    write_pgm(p, 1, 1, [0, 0], maxval=65535)
    with pytest.raises(ImageFormatError, match="unsupported bit depth"):
        load_image(p)


def test_payload_mismatch(tmp_path):
    p = tmp_path / "a.pgm"
    write_pgm(p, 3, 3, [0] * 8)
    with pytest.raises(ImageFormatError, match="payload"):
        load_image(p)


def test_png_8bit(tmp_path):
    p = tmp_path / "a.png"
    Image.fromarray(np.array([[0, 200], [7, 255]], dtype=np.uint8), mode="L").save(p)
    assert load_image(p).data.tolist() == [[0, 200], [7, 255]]


def test_png_16bit_rejected(tmp_path):
    p = tmp_path / "a.png"
    Image.fromarray(np.array([[0, 60000]], dtype=np.uint16)).save(p)
    with pytest.raises(ImageFormatError, match="unsupported bit depth"):
        load_image(p)


def test_png_color_rejected(tmp_path):
    p = tmp_path / "a.png"
    Image.new("RGB", (2, 2)).save(p)
    with pytest.raises(ImageFormatError, match="unsupported format"):
        load_image(p)


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_image(tmp_path / "nope.pgm")


def test_save_rounding(tmp_path):
    p = tmp_path / "r.pgm"
    save_gray(ImageGrid([[127.5, 0.0, 0.49, 254.5]]), p)
    assert load_image(p).intensities.tolist() == [128.0, 0.0, 0.0, 255.0]


@settings(max_examples=30, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 9), st.integers(1, 9))))
def test_integer_roundtrip(tmp_path_factory, data):
    p = tmp_path_factory.mktemp("rt") / "x.pgm"
    img = ImageGrid(data.astype(float))
    save_gray(img, p)
    assert load_image(p) == img


def test_pbm_roundtrip(tmp_path):
    mask = np.random.default_rng(0).random((5, 11)) > 0.5
    save_pbm(mask, tmp_path / "m.pbm")
    assert np.array_equal(load_pbm(tmp_path / "m.pbm"), mask)


def test_grid_invariants():
    with pytest.raises(ValueError):
        ImageGrid([[256.0]])
    with pytest.raises(ValueError):
        ImageGrid([[-1.0]])
    with pytest.raises(ValueError):
        ImageGrid.from_flat(2, 2, [1, 2, 3])
    img = ImageGrid([[1.0, 2.0]])
    with pytest.raises(ValueError):
        img.data[0, 0] = 5.0


# --- normalization ---

def test_stretch_full_range():
    data = np.linspace(50, 150, 101).reshape(1, -1)
    res = normalize_contrast(ImageGrid(data), NormalizationSpec(0.0, 1.0))
    assert not res.degenerate
    out = res.image.data.ravel()
    assert out.min() == 0.0 and out.max() == 255.0
    np.testing.assert_allclose(out, 255 * (data.ravel() - 50) / 100, rtol=0, atol=1e-9)


def test_constant_is_degenerate():
    img = ImageGrid(np.full((4, 4), 128.0))
    res = normalize_contrast(img, NormalizationSpec())
    assert res.degenerate
    assert res.image == img


def test_gradient_percentiles_against_oracle():
    values = np.arange(256, dtype=float)
    img = ImageGrid(np.tile(values, (4, 1)))
    res = normalize_contrast(img, NormalizationSpec(0.01, 0.99))
    # nearest-rank on 1024 sorted values, done by hand
    ordered = sorted(img.intensities.tolist())
    a = ordered[int(np.ceil(0.01 * 1024)) - 1]
    b = ordered[int(np.ceil(0.99 * 1024)) - 1]
    assert (a, b) == (2.0, 253.0)
    expected = [min(255.0, max(0.0, 255.0 * ((v - a) / (b - a)))) for v in img.intensities.tolist()]
    assert res.image.intensities.tolist() == expected
    assert res.image.data[0, 0] == 0.0 and res.image.data[0, 255] == 255.0


def test_nearest_rank_edges():
    s = np.array([1.0, 2.0, 3.0, 4.0])
    assert nearest_rank(s, 0.0) == 1.0
    assert nearest_rank(s, 1.0) == 4.0
    assert nearest_rank(s, 0.5) == 2.0


def test_spec_validation():
    with pytest.raises(ValueError):
        NormalizationSpec(0.5, 0.9)
    with pytest.raises(ValueError):
        NormalizationSpec(0.1, 0.5)


grids = arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 8)),
               elements=st.floats(0, 255, allow_nan=False))


@settings(max_examples=60, deadline=None)
@given(grids)
def test_full_stretch_idempotent(data):
    spec = NormalizationSpec(0.0, 1.0)
    once = normalize_contrast(ImageGrid(data), spec).image
    twice = normalize_contrast(once, spec).image
    assert twice == once


@settings(max_examples=60, deadline=None)
@given(grids, st.sampled_from([(0.0, 1.0), (0.01, 0.99), (0.2, 0.7)]))
def test_stretch_monotone(data, pct):
    img = ImageGrid(data)
    out = normalize_contrast(img, NormalizationSpec(*pct)).image
    order = np.argsort(img.intensities, kind="stable")
    assert np.all(np.diff(out.intensities[order]) >= 0)
