"""Global and windowed intensity moments, quality ratio, homogeneity lattice."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .raster import ImageGrid

DEFAULT_ACCEPTANCE_LIMIT = 0.5


def _exact_mean(values: np.ndarray) -> float:
    # fsum is correctly rounded, so the result does not depend on pixel order
    return math.fsum(values.ravel().tolist()) / values.size


def _ipow(x: np.ndarray, k: int) -> np.ndarray:
    out = x
    for _ in range(k - 1):
        out = out * x
    return out


def _central_moment(values: np.ndarray, m0: float, k: int) -> float:
    if k < 2:
        raise ValueError(f"moment order must be >= 2, got {k}")
    return _exact_mean(_ipow(values - m0, k))


def quality_ratio(m0: float, m2: float) -> float:
    """sqrt(M2) / M0; +inf for a black frame with spread, 0 for all-zero."""
    if m0 > 0:
        return math.sqrt(m2) / m0
    return math.inf if m2 > 0 else 0.0


@dataclass(frozen=True)
class MomentSummary:
    m0: float
    mk: dict = field(default_factory=dict)

    @property
    def m2(self) -> float:
        return self.mk[2]

    @property
    def quality_ratio(self) -> float:
        return quality_ratio(self.m0, self.mk[2])

    @property
    def degenerate(self) -> bool:
        """True for a constant frame (M2 = 0)."""
        return self.mk[2] == 0.0

    def to_dict(self) -> dict:
        return {
            "m0": self.m0,
            "mk": {str(k): v for k, v in sorted(self.mk.items())},
            "quality_ratio": self.quality_ratio,
            "degenerate": self.degenerate,
        }


def global_mean(image: ImageGrid) -> float:
    return _exact_mean(image.data)


def global_moment(image: ImageGrid, k: int) -> float:
    """Frame mean of ``(b - M0)**k``."""
    return _central_moment(image.data, global_mean(image), k)


def _summarize(values: np.ndarray, orders) -> MomentSummary:
    m0 = _exact_mean(values)
    orders = sorted(set(orders) | {2})
    return MomentSummary(m0, {k: _central_moment(values, m0, k) for k in orders})


def summarize(image: ImageGrid, orders=(2,)) -> MomentSummary:
    return _summarize(image.data, orders)


def windowed_summary(image: ImageGrid, x0: int, y0: int, w: int, h: int, orders=(2,)) -> MomentSummary:
    """Moments of a rectangular window, centred on the window's own mean."""
    if w < 1 or h < 1:
        raise ValueError("window must be non-empty")
    if x0 < 0 or y0 < 0 or x0 + w > image.width or y0 + h > image.height:
        raise ValueError(
            f"window ({x0}, {y0}, {w}, {h}) exceeds {image.width}x{image.height} frame"
        )
    return _summarize(image.data[y0:y0 + h, x0:x0 + w], orders)


@dataclass(frozen=True)
class HomogeneityGrid:
    window_size: int
    acceptance_limit: float
    cells: list  # rows of MomentSummary
    origins: list  # rows of (x0, y0, w, h)
    frame: MomentSummary

    @property
    def verdicts(self) -> np.ndarray:
        return np.array(
            [[c.quality_ratio <= self.acceptance_limit for c in row] for row in self.cells],
            dtype=bool,
        )

    @property
    def frame_homogeneous(self) -> bool:
        return self.frame.quality_ratio <= self.acceptance_limit


def _edges(extent: int, size: int) -> list[tuple[int, int]]:
    return [(s, min(size, extent - s)) for s in range(0, extent, size)]


def homogeneity_lattice(image: ImageGrid, window_size: int,
                        acceptance_limit: float = DEFAULT_ACCEPTANCE_LIMIT) -> HomogeneityGrid:
    """Tile the frame with square windows and test each quality ratio.

    Edge windows are truncated so every pixel belongs to exactly one cell.
    A cell is homogeneous when its ratio is at most ``acceptance_limit``.
    """
    if not 1 <= window_size <= min(image.width, image.height):
        raise ValueError(
            f"window_size must be in [1, {min(image.width, image.height)}], got {window_size}"
        )
    cells, origins = [], []
    for y0, h in _edges(image.height, window_size):
        row, orow = [], []
        for x0, w in _edges(image.width, window_size):
            row.append(windowed_summary(image, x0, y0, w, h))
            orow.append((x0, y0, w, h))
        cells.append(row)
        origins.append(orow)
    return HomogeneityGrid(window_size, acceptance_limit, cells, origins, summarize(image))
