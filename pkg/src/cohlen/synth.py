"""Deterministic synthetic textures used as test and demo fixtures.

Noise uses a counter-based generator: pixel ``i`` draws two 64-bit words
``splitmix64(seed, 2*i)`` and ``splitmix64(seed, 2*i + 1)`` (the SplitMix64
finalizer applied to ``seed + (counter + 1) * 0x9E3779B97F4A7C15``), turns
them into uniforms with 53-bit resolution and combines them with the
Box-Muller transform. Values are rounded half-up to integer grey levels and
clamped to [0, 255], so a seed reproduces the same grid on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import ImageGrid

KINDS = ("constant", "stripes", "checkerboard", "noise")
ORIENTATIONS = ("horizontal", "vertical")

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@dataclass(frozen=True)
class TextureSpec:
    kind: str = "noise"
    size: int | tuple = 64
    period: int = 8
    levels: tuple = (0.0, 255.0)
    orientation: str = "vertical"
    seed: int = 0
    noise_std: float = 40.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown texture kind {self.kind!r}; expected one of {KINDS}")
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"orientation must be one of {ORIENTATIONS}")
        w, h = self.shape
        if w < 1 or h < 1:
            raise ValueError("size must be positive")
        low, high = self.levels
        if not 0 <= low <= 255 or not 0 <= high <= 255:
            raise ValueError("levels must lie in [0, 255]")
        if self.kind in ("stripes", "checkerboard"):
            if low >= high:
                raise ValueError("levels must satisfy low < high")
            if self.period < 2:
                raise ValueError("period must be >= 2")
        if self.kind == "noise" and self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def shape(self) -> tuple[int, int]:
        """(width, height)."""
        if isinstance(self.size, (tuple, list)):
            return int(self.size[0]), int(self.size[1])
        return int(self.size), int(self.size)


def splitmix64(seed: int, counters: np.ndarray) -> np.ndarray:
    """SplitMix64 output for each counter value under ``seed``."""
    counters = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + (counters + np.uint64(1)) * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def gaussian_field(seed: int, count: int) -> np.ndarray:
    idx = np.arange(count, dtype=np.uint64)
    w1 = splitmix64(seed, idx * np.uint64(2))
    w2 = splitmix64(seed, idx * np.uint64(2) + np.uint64(1))
    scale = 2.0 ** -53
    u1 = ((w1 >> np.uint64(11)).astype(np.float64) + 1.0) * scale  # (0, 1]
    u2 = (w2 >> np.uint64(11)).astype(np.float64) * scale  # [0, 1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def generate(spec: TextureSpec) -> ImageGrid:
    w, h = spec.shape
    low, high = float(spec.levels[0]), float(spec.levels[1])
    ys, xs = np.mgrid[0:h, 0:w]
    if spec.kind == "constant":
        data = np.full((h, w), low)
    elif spec.kind == "stripes":
        axis = xs if spec.orientation == "vertical" else ys
        data = np.where((axis // spec.period) % 2 == 0, high, low)
    elif spec.kind == "checkerboard":
        data = np.where((xs // spec.period + ys // spec.period) % 2 == 0, high, low)
    else:
        g = gaussian_field(int(spec.seed), w * h).reshape(h, w)
        data = np.clip(np.floor(128.0 + spec.noise_std * g + 0.5), 0.0, 255.0)
    return ImageGrid(data.astype(np.float64))


def disk_mask(width: int, height: int, center, radius: float) -> np.ndarray:
    cx, cy = center
    ys, xs = np.mgrid[0:height, 0:width]
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= radius ** 2


def inject_disk(image: ImageGrid, center, radius: float, offset: float) -> ImageGrid:
    """Shift the grey level of a filled disk by ``offset``, clamped to [0, 255]."""
    cx, cy = center
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if cx - radius < 0 or cy - radius < 0 or cx + radius > image.width - 1 or cy + radius > image.height - 1:
        raise ValueError(f"disk at {center} with radius {radius} leaves the frame")
    mask = disk_mask(image.width, image.height, center, radius)
    data = image.data.copy()
    data[mask] = np.clip(data[mask] + offset, 0.0, 255.0)
    return ImageGrid(data)
