"""Grayscale rasters, PGM/PNG file I/O and contrast normalization.

Intensities are kept as float64 in [0, 255]; quantization to bytes only
happens when writing files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ImageFormatError(ValueError):
    """Raised when an image file cannot be decoded into an ImageGrid."""


@dataclass(frozen=True)
class ImageGrid:
    """Immutable real-valued intensity field, row-major, row 0 at the top.

    Parameters
    ----------
    data : array_like, shape (height, width)
        Grey levels in [0, 255].
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("intensities must be finite")
        if arr.min() < 0.0 or arr.max() > 255.0:
            raise ValueError("intensities must lie in [0, 255]")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def intensities(self) -> np.ndarray:
        """Flat row-major view of the pixel values."""
        return self.data.reshape(-1)

    def __eq__(self, other):
        if not isinstance(other, ImageGrid):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))

    __hash__ = None

    @classmethod
    def from_flat(cls, width: int, height: int, values) -> "ImageGrid":
        values = np.asarray(values, dtype=np.float64)
        if values.size != width * height:
            raise ValueError(f"{values.size} values do not fill a {width}x{height} grid")
        return cls(values.reshape(height, width))


@dataclass(frozen=True)
class NormalizationSpec:
    low_percentile: float = 0.01
    high_percentile: float = 0.99

    def __post_init__(self):
        if not 0.0 <= self.low_percentile < 0.5:
            raise ValueError("low_percentile must lie in [0, 0.5)")
        if not 0.5 < self.high_percentile <= 1.0:
            raise ValueError("high_percentile must lie in (0.5, 1]")


# --- file I/O ---------------------------------------------------------------

def _read_pgm_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n:
        c = buf[pos:pos + 1]
        if c == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ImageFormatError("truncated PGM header")
    return buf[start:pos], pos


def _decode_pgm(buf: bytes) -> ImageGrid:
    magic = buf[:2]
    if magic != b"P5":
        raise ImageFormatError(f"unsupported format: {magic!r} (only binary P5 PGM)")
    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_pgm_token(buf, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise ImageFormatError(f"bad PGM header field {tok!r}") from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ImageFormatError("PGM dimensions must be positive")
    if maxval != 255:
        raise ImageFormatError(f"unsupported bit depth: maxval {maxval} (only 255)")
    # exactly one whitespace byte separates the header from the raster
    pos += 1
    payload = buf[pos:]
    if len(payload) != width * height:
        raise ImageFormatError(
            f"PGM payload has {len(payload)} bytes, header declares {width}x{height}"
        )
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return ImageGrid(arr.astype(np.float64))


def _decode_png(path: Path) -> ImageGrid:
    from PIL import Image

    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("I;16", "I;16B", "I;16L", "I", "F"):
                raise ImageFormatError(f"unsupported bit depth: PNG mode {mode}")
            if mode != "L":
                raise ImageFormatError(f"unsupported format: PNG mode {mode} (need 8-bit grayscale)")
            arr = np.asarray(im, dtype=np.uint8)
    except ImageFormatError:
        raise
    except Exception as exc:
        raise ImageFormatError(f"cannot decode PNG: {exc}") from exc
    return ImageGrid(arr.astype(np.float64))


_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def load_image(path) -> ImageGrid:
    """Read a binary P5 PGM (maxval 255) or an 8-bit grayscale PNG."""
    path = Path(path)
    buf = path.read_bytes()
    if buf.startswith(_PNG_SIGNATURE):
        return _decode_png(path)
    return _decode_pgm(buf)


def quantize(values) -> np.ndarray:
    """Round half-up and clamp to bytes."""
    arr = np.floor(np.asarray(values, dtype=np.float64) + 0.5)
    return np.clip(arr, 0, 255).astype(np.uint8)


def save_gray(image: ImageGrid, path) -> None:
    """Write ``image`` as a binary P5 PGM."""
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(quantize(image.data).tobytes())


def save_rgb_png(rgb: np.ndarray, path) -> None:
    from PIL import Image

    Image.fromarray(np.ascontiguousarray(rgb, dtype=np.uint8), mode="RGB").save(path, format="PNG")


def save_pbm(mask: np.ndarray, path) -> None:
    """Write a boolean mask as binary P4 PBM (True -> 1, i.e. black)."""
    mask = np.asarray(mask, dtype=bool)
    height, width = mask.shape
    packed = np.packbits(mask, axis=1)
    with open(path, "wb") as fh:
        fh.write(f"P4\n{width} {height}\n".encode("ascii"))
        fh.write(packed.tobytes())


def load_pbm(path) -> np.ndarray:
    buf = Path(path).read_bytes()
    if buf[:2] != b"P4":
        raise ImageFormatError("unsupported format: expected P4 PBM")
    pos = 2
    tok_w, pos = _read_pgm_token(buf, pos)
    tok_h, pos = _read_pgm_token(buf, pos)
    width, height = int(tok_w), int(tok_h)
    pos += 1
    row_bytes = (width + 7) // 8
    payload = np.frombuffer(buf[pos:], dtype=np.uint8)
    if payload.size != row_bytes * height:
        raise ImageFormatError("PBM payload size mismatch")
    bits = np.unpackbits(payload.reshape(height, row_bytes), axis=1)[:, :width]
    return bits.astype(bool)


# --- contrast normalization -------------------------------------------------

def nearest_rank(sorted_values: np.ndarray, fraction: float) -> float:
    """Nearest-rank percentile of an ascending array.

    Rank is ``ceil(fraction * N)`` (1-based), with fraction 0 mapping to the
    minimum.
    """
    n = sorted_values.size
    rank = int(np.ceil(fraction * n))
    rank = min(max(rank, 1), n)
    return float(sorted_values[rank - 1])


@dataclass(frozen=True)
class NormalizationResult:
    image: ImageGrid
    low_value: float
    high_value: float
    degenerate: bool


def normalize_contrast(image: ImageGrid, spec: NormalizationSpec | None = None) -> NormalizationResult:
    """Percentile-anchored linear stretch to the full [0, 255] range.

    Values at or below the low percentile map to 0, at or above the high
    percentile to 255. A frame whose two anchors coincide is returned
    unchanged with ``degenerate=True``.
    """
    spec = spec or NormalizationSpec()
    ordered = np.sort(image.data, axis=None)
    a = nearest_rank(ordered, spec.low_percentile)
    b = nearest_rank(ordered, spec.high_percentile)
    if b == a:
        return NormalizationResult(image, a, b, True)
    if (a, b) == (0.0, 255.0):
        # identity map; skipping the arithmetic keeps repeated stretches exact
        return NormalizationResult(image, a, b, False)
    # the ratio is exactly 0 at a and 1 at b, so the anchors land on 0 and 255
    out = np.clip(255.0 * ((image.data - a) / (b - a)), 0.0, 255.0)
    return NormalizationResult(ImageGrid(out), a, b, False)
