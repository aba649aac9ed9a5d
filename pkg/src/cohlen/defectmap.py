"""Local mean coherence length, interval defect criterion and half-tone maps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagram import CoherenceDiagram
from .raster import ImageGrid, quantize
from .rays import CoherenceField


class ProvenanceError(ValueError):
    """Field and diagram (or image) do not describe the same analysis."""


def local_mean_lengths(field: CoherenceField) -> np.ndarray:
    """Mean over directions of the order-0 lengths, shape (rows, cols)."""
    totals = field.lengths0.astype(np.int64).sum(axis=2)
    return totals / field.count


def local_mean_length(field: CoherenceField, x: int, y: int) -> float:
    """Mean coherence length at frame pixel ``(x, y)``."""
    cols, rows = field.interior_size
    c, r = x - field.margin, y - field.margin
    if not (0 <= c < cols and 0 <= r < rows):
        raise IndexError(f"pixel ({x}, {y}) is outside the analysed interior")
    return int(field.lengths0[r, c].astype(np.int64).sum()) / field.count


@dataclass(frozen=True)
class DefectMap:
    width: int
    height: int
    margin: int
    local_mean: np.ndarray
    is_defect: np.ndarray
    l_min: float
    l_max: float

    @property
    def bounds(self) -> tuple[float, float]:
        return (self.l_min, self.l_max)

    @property
    def defect_count(self) -> int:
        return int(self.is_defect.sum())

    @property
    def defect_fraction(self) -> float:
        return self.defect_count / self.is_defect.size

    def frame_mask(self) -> np.ndarray:
        """Verdicts on the full frame; margin pixels are never defects."""
        mask = np.zeros((self.height, self.width), dtype=bool)
        rows, cols = self.is_defect.shape
        mask[self.margin:self.margin + rows, self.margin:self.margin + cols] = self.is_defect
        return mask


def classify_defects(field: CoherenceField, diagram: CoherenceDiagram) -> DefectMap:
    """A pixel is a defect when its local mean length lies outside the
    closed interval ``[l_min, l_max]`` of the diagram."""
    if diagram.count != field.count:
        raise ProvenanceError("direction counts differ")
    if diagram.fraction != field.fraction:
        raise ProvenanceError("threshold fractions differ")
    if diagram.r_max is not None and diagram.r_max != field.r_max:
        raise ProvenanceError("r_max differs")
    if diagram.frame_size is not None and tuple(diagram.frame_size) != (field.width, field.height):
        raise ProvenanceError("frame sizes differ")
    local = local_mean_lengths(field)
    lo, hi = diagram.l_min, diagram.l_max
    is_defect = ~((lo <= local) & (local <= hi))
    return DefectMap(field.width, field.height, field.margin, local, is_defect, lo, hi)


def render_defect_map(image: ImageGrid, dmap: DefectMap) -> np.ndarray:
    """Half-tone RGB map, shape (height, width, 3), uint8.

    Interior pixels keep half their grey level in every channel and gain
    128 in red (defect) or green (normal); margin pixels stay grey.
    """
    if (image.width, image.height) != (dmap.width, dmap.height):
        raise ProvenanceError("image and defect map dimensions differ")
    g = quantize(image.data).astype(np.int32)
    rgb = np.repeat(g[:, :, None], 3, axis=2)
    half = g // 2
    rows, cols = dmap.is_defect.shape
    m = dmap.margin
    inner = half[m:m + rows, m:m + cols]
    block = np.repeat(inner[:, :, None], 3, axis=2)
    block[:, :, 0] += 128 * dmap.is_defect
    block[:, :, 1] += 128 * ~dmap.is_defect
    rgb[m:m + rows, m:m + cols] = block
    return rgb.astype(np.uint8)
