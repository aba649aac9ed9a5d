"""Radial sampling, directional moments and per-pixel coherence lengths.

Geometry
--------
Direction ``i`` of ``count`` has angle ``2*pi*i/count`` measured from the
+y axis toward +x; its unit step is ``(sin, cos)`` in (x, y) raster
coordinates with y growing downward. Sample ``j`` (``j = 1..n``) of a ray
from integer pixel ``(x, y)`` sits at ``(x + j*sx, y + j*sy)`` and is read by
bilinear interpolation: a lerp along x on the two bracketing rows, then a
lerp along y. Offsets and fractions depend only on ``j*sx`` and ``j*sy``, so
every pixel sees the same interpolation weights.

A coherence length is the first radius ``n`` at which the running mean of
samples ``1..n`` falls within ``t = fraction * sqrt(M2)`` of the frame mean.
Rays that never get there are censored at ``r_max``.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _backend
from .raster import ImageGrid
from .stats import MomentSummary, summarize

DEFAULT_DIRECTIONS = 32


class FrameTooSmallError(ValueError):
    """The frame cannot hold an interior for the requested ray length."""


class BoundaryError(ValueError):
    """A ray would leave the frame."""


# --- directions --------------------------------------------------------------

def _unit_steps(count: int) -> np.ndarray:
    # Built from one octant by symmetry, so quarter turns and mirror images
    # map step vectors onto each other bit for bit.
    delta = 2.0 * math.pi / count
    steps = np.empty((count, 2))
    if count % 4 == 0:
        q = count // 4
        base = []
        for r in range(q):
            if 2 * r == q:
                s = c = math.sqrt(0.5)
            elif 2 * r < q:
                s, c = math.sin(r * delta), math.cos(r * delta)
            else:
                c, s = math.sin((q - r) * delta), math.cos((q - r) * delta)
            base.append((s, c))
        for quad in range(4):
            for r, (s, c) in enumerate(base):
                for _ in range(quad):
                    s, c = c, -s
                steps[quad * q + r] = (s, c)
    else:
        half = count // 2
        for i in range(half + 1):
            s, c = math.sin(i * delta), math.cos(i * delta)
            if 2 * i == count:
                s, c = 0.0, -1.0
            steps[i] = (s, c)
        for i in range(half + 1, count):
            s, c = steps[count - i]
            steps[i] = (-s, c)
    return steps


@dataclass(frozen=True)
class DirectionSet:
    count: int = DEFAULT_DIRECTIONS

    def __post_init__(self):
        if self.count < 4 or self.count % 2:
            raise ValueError(f"direction count must be even and >= 4, got {self.count}")

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.count) / self.count

    @property
    def steps(self) -> np.ndarray:
        """Unit step ``(sx, sy)`` per direction, shape (count, 2)."""
        return _cached_steps(self.count).copy()

    def mirror(self, i: int) -> int:
        """Index of direction ``i`` reflected about the y axis."""
        return (-i) % self.count


@lru_cache(maxsize=None)
def _cached_steps(count):
    steps = _unit_steps(count)
    steps.setflags(write=False)
    return steps


@lru_cache(maxsize=64)
def _ray_tables(count: int, rmax: int):
    steps = _cached_steps(count)
    j = np.arange(1, rmax + 1, dtype=np.float64)
    ox = steps[:, 0:1] * j
    oy = steps[:, 1:2] * j
    ix = np.floor(ox)
    iy = np.floor(oy)
    tables = (
        np.ascontiguousarray(ix.astype(np.int64)),
        np.ascontiguousarray(iy.astype(np.int64)),
        np.ascontiguousarray(ox - ix),
        np.ascontiguousarray(oy - iy),
    )
    for arr in tables:
        arr.setflags(write=False)
    return tables


def ray_tables(dirs: DirectionSet, rmax: int):
    """Integer offsets and bilinear fractions for samples ``1..rmax``.

    Returns ``(ix, iy, fx, fy)``, each shaped (count, rmax).
    """
    return _ray_tables(dirs.count, int(rmax))


def _padded(image: ImageGrid) -> np.ndarray:
    # one extra column/row so the zero-weight neighbour of an on-edge sample exists
    return np.ascontiguousarray(np.pad(image.data, ((0, 1), (0, 1)), mode="edge"))


# --- thresholds --------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdSpec:
    """Saturation band: ``absolute_t = fraction * sqrt(M2)`` of the frame."""

    fraction: float
    absolute_t: float | None = None

    def __post_init__(self):
        if not self.fraction > 0:
            raise ValueError(f"threshold fraction must be > 0, got {self.fraction}")
        if self.absolute_t is not None and self.absolute_t < 0:
            raise ValueError("absolute threshold must be >= 0")

    @classmethod
    def for_frame(cls, fraction: float, summary: MomentSummary) -> "ThresholdSpec":
        return cls(fraction, fraction * math.sqrt(summary.m2))

    def resolved(self, summary: MomentSummary) -> "ThresholdSpec":
        if self.absolute_t is not None:
            return self
        return ThresholdSpec.for_frame(self.fraction, summary)


def _as_threshold(threshold) -> ThresholdSpec:
    if isinstance(threshold, ThresholdSpec):
        return threshold
    return ThresholdSpec(float(threshold))


# --- single-ray operations ---------------------------------------------------

def _check_ray(image: ImageGrid, p, dirs: DirectionSet, d: int, n: int):
    if not 0 <= d < dirs.count:
        raise ValueError(f"direction index {d} out of range")
    if n < 1:
        raise ValueError("sample count must be >= 1")
    x, y = p
    ix, iy, fx, fy = ray_tables(dirs, n)
    xs = x + ix[d]
    ys = y + iy[d]
    xs_hi = xs + (fx[d] > 0)
    ys_hi = ys + (fy[d] > 0)
    if xs.min() < 0 or ys.min() < 0 or xs_hi.max() > image.width - 1 or ys_hi.max() > image.height - 1:
        raise BoundaryError(f"ray from {p} along direction {d} leaves the frame within {n} samples")


def ray_samples(image: ImageGrid, p, d: int, n: int, dirs: DirectionSet | None = None) -> np.ndarray:
    """Bilinear samples ``1..n`` along direction ``d`` from pixel ``p = (x, y)``."""
    dirs = dirs or DirectionSet()
    _check_ray(image, p, dirs, d, n)
    x, y = p
    ix, iy, fx, fy = ray_tables(dirs, n)
    img = _padded(image)
    xs = x + ix[d]
    ys = y + iy[d]
    a = img[ys, xs]
    b = img[ys, xs + 1]
    c = img[ys + 1, xs]
    e = img[ys + 1, xs + 1]
    top = a + fx[d] * (b - a)
    bot = c + fx[d] * (e - c)
    return top + fy[d] * (bot - top)


def _running_mean(samples: np.ndarray) -> np.ndarray:
    out = np.empty(samples.size)
    s = 0.0
    for j, v in enumerate(samples.tolist()):
        s = s + v
        out[j] = s / float(j + 1)
    return out


def _moment_k(samples: np.ndarray, mean: float, k: int) -> float:
    acc = 0.0
    for v in samples.tolist():
        dev = v - mean
        p = dev
        for _ in range(k - 1):
            p = p * dev
        acc = acc + p
    return acc / float(samples.size)


def directional_moment0(image: ImageGrid, p, d: int, n: int, dirs: DirectionSet | None = None) -> float:
    """Running mean of the first ``n`` ray samples."""
    return float(_running_mean(ray_samples(image, p, d, n, dirs))[-1])


def directional_momentK(image: ImageGrid, p, d: int, n: int, k: int,
                        dirs: DirectionSet | None = None) -> float:
    """Order-``k`` moment of the first ``n`` samples about their running mean."""
    if k < 2:
        raise ValueError(f"moment order must be >= 2, got {k}")
    samples = ray_samples(image, p, d, n, dirs)
    return _moment_k(samples, float(_running_mean(samples)[-1]), k)


def _check_interior(image: ImageGrid, p, r_max: int):
    x, y = p
    if not (r_max <= x < image.width - r_max and r_max <= y < image.height - r_max):
        raise BoundaryError(f"pixel {p} is closer than r_max={r_max} to the frame edge")


def coherence_length(image: ImageGrid, p, d: int, threshold, r_max: int, order: int = 0,
                     dirs: DirectionSet | None = None,
                     summary: MomentSummary | None = None) -> tuple[int, bool]:
    """Coherence length of one ray: ``(length, censored)``.

    ``order=0`` compares the running mean with M0 inside ``absolute_t``;
    ``order=k`` compares the order-k directional moment with Mk inside the
    relative band ``fraction * |Mk|``.
    """
    dirs = dirs or DirectionSet()
    _check_interior(image, p, r_max)
    threshold = _as_threshold(threshold)
    summary = summary or summarize(image, orders=(2, order) if order >= 2 else (2,))
    samples = ray_samples(image, p, d, r_max, dirs)
    means = _running_mean(samples)
    if order == 0:
        t = threshold.resolved(summary).absolute_t
        for n in range(1, r_max + 1):
            if abs(means[n - 1] - summary.m0) <= t:
                return n, False
        return r_max, True
    if order < 2:
        raise ValueError(f"order must be 0 or >= 2, got {order}")
    mk = summary.mk[order] if order in summary.mk else summarize(image, (order,)).mk[order]
    band = threshold.fraction * abs(mk)
    for n in range(1, r_max + 1):
        if abs(_moment_k(samples[:n], float(means[n - 1]), order) - mk) <= band:
            return n, False
    return r_max, True


# --- whole-frame field -------------------------------------------------------

def default_rmax(width: int, height: int) -> int:
    return min(width, height) // 4


@dataclass(frozen=True)
class CoherenceField:
    """Per-interior-pixel coherence lengths, arrays shaped (rows, cols, count).

    Entry ``[r, c, i]`` belongs to frame pixel ``(margin + c, margin + r)``.
    """

    width: int
    height: int
    margin: int
    fraction: float
    absolute_t: float
    lengths0: np.ndarray
    censored0: np.ndarray
    order_k: int = 0
    lengthsK: np.ndarray | None = None
    censoredK: np.ndarray | None = None

    @property
    def r_max(self) -> int:
        return self.margin

    @property
    def interior_origin(self) -> tuple[int, int]:
        return (self.margin, self.margin)

    @property
    def interior_size(self) -> tuple[int, int]:
        """(cols, rows) of the interior rectangle."""
        return (self.lengths0.shape[1], self.lengths0.shape[0])

    @property
    def count(self) -> int:
        return self.lengths0.shape[2]

    @property
    def censored(self) -> np.ndarray:
        return self.censored0

    def __eq__(self, other):
        if not isinstance(other, CoherenceField):
            return NotImplemented
        same_k = (self.lengthsK is None) == (other.lengthsK is None)
        if same_k and self.lengthsK is not None:
            same_k = (np.array_equal(self.lengthsK, other.lengthsK)
                      and np.array_equal(self.censoredK, other.censoredK))
        return (
            (self.width, self.height, self.margin, self.order_k) ==
            (other.width, other.height, other.margin, other.order_k)
            and self.fraction == other.fraction
            and self.absolute_t == other.absolute_t
            and np.array_equal(self.lengths0, other.lengths0)
            and np.array_equal(self.censored0, other.censored0)
            and same_k
        )

    __hash__ = None


def coherence_field(image: ImageGrid, dirs: DirectionSet | None = None, threshold=0.5,
                    r_max: int | None = None, order: int = 0, threads: int = 1,
                    backend=None) -> CoherenceField:
    """Coherence lengths for every interior pixel and direction.

    The interior excludes a margin of ``r_max`` pixels on every side so
    each retained pixel supports full-length rays in all directions.
    ``order >= 2`` additionally fills ``lengthsK``.
    """
    dirs = dirs or DirectionSet()
    if r_max is None:
        r_max = default_rmax(image.width, image.height)
    r_max = int(r_max)
    if r_max < 1:
        raise FrameTooSmallError(f"r_max must be >= 1, got {r_max}")
    if 2 * r_max >= min(image.width, image.height):
        raise FrameTooSmallError(
            f"r_max={r_max} leaves no interior in a {image.width}x{image.height} frame"
        )
    if order not in (0,) and order < 2:
        raise ValueError(f"order must be 0 or >= 2, got {order}")
    kernels = backend if backend is not None else _backend.kernels
    orders = (2, order) if order >= 2 else (2,)
    summary = summarize(image, orders)
    threshold = _as_threshold(threshold).resolved(summary)
    rows = image.height - 2 * r_max
    cols = image.width - 2 * r_max
    ix, iy, fx, fy = ray_tables(dirs, r_max)
    padded = _padded(image)
    lengths0, censored0 = kernels.scan_order0(
        padded, r_max, rows, cols, ix, iy, fx, fy, summary.m0, threshold.absolute_t, threads
    )
    lengthsK = censoredK = None
    if order >= 2:
        mk = summary.mk[order]
        lengthsK, censoredK = kernels.scan_orderk(
            padded, r_max, rows, cols, ix, iy, fx, fy, order, mk,
            threshold.fraction * abs(mk), threads
        )
        lengthsK, censoredK = np.asarray(lengthsK), np.asarray(censoredK, dtype=bool)
    return CoherenceField(
        image.width, image.height, r_max, threshold.fraction, threshold.absolute_t,
        np.asarray(lengths0), np.asarray(censored0, dtype=bool), order, lengthsK, censoredK,
    )


# --- serialization -----------------------------------------------------------

FIELD_MAGIC = b"CLF1"
_HEADER = struct.Struct("<4s7I2d")


def field_to_bytes(field: CoherenceField) -> bytes:
    """Flat little-endian layout, see README ("Coherence field format")."""
    cols, rows = field.interior_size
    header = _HEADER.pack(
        FIELD_MAGIC, field.width, field.height, field.margin, rows, cols,
        field.count, field.order_k, field.fraction, field.absolute_t,
    )
    parts = [header, field.lengths0.astype("<u2").tobytes(), np.packbits(field.censored0.ravel()).tobytes()]
    if field.order_k:
        parts.append(field.lengthsK.astype("<u2").tobytes())
        parts.append(np.packbits(field.censoredK.ravel()).tobytes())
    return b"".join(parts)


def field_from_bytes(buf: bytes) -> CoherenceField:
    if len(buf) < _HEADER.size:
        raise ValueError("truncated coherence field header")
    magic, width, height, margin, rows, cols, ndir, order_k, fraction, absolute_t = _HEADER.unpack_from(buf)
    if magic != FIELD_MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    total = rows * cols * ndir
    mask_bytes = (total + 7) // 8
    blocks = 2 if order_k else 1
    if len(buf) != _HEADER.size + blocks * (2 * total + mask_bytes):
        raise ValueError("coherence field payload size mismatch")
    shape = (rows, cols, ndir)

    def block(offset):
        lengths = np.frombuffer(buf, dtype="<u2", count=total, offset=offset).reshape(shape).astype(np.uint16)
        bits = np.frombuffer(buf, dtype=np.uint8, count=mask_bytes, offset=offset + 2 * total)
        censored = np.unpackbits(bits)[:total].astype(bool).reshape(shape)
        return lengths, censored

    pos = _HEADER.size
    lengths0, censored0 = block(pos)
    lengthsK = censoredK = None
    if order_k:
        lengthsK, censoredK = block(pos + 2 * total + mask_bytes)
    return CoherenceField(width, height, margin, fraction, absolute_t,
                          lengths0, censored0, order_k, lengthsK, censoredK)


def write_field(field: CoherenceField, path) -> None:
    with open(path, "wb") as fh:
        fh.write(field_to_bytes(field))


def read_field(path) -> CoherenceField:
    with open(path, "rb") as fh:
        return field_from_bytes(fh.read())


def field_to_csv(field: CoherenceField) -> str:
    """One line per (pixel, direction) in frame coordinates."""
    head = "x,y,direction,length0,censored0"
    if field.order_k:
        head += f",length{field.order_k},censored{field.order_k}"
    lines = [head]
    rows, cols, ndir = field.lengths0.shape
    for r in range(rows):
        for c in range(cols):
            for d in range(ndir):
                row = f"{c + field.margin},{r + field.margin},{d},{field.lengths0[r, c, d]},{int(field.censored0[r, c, d])}"
                if field.order_k:
                    row += f",{field.lengthsK[r, c, d]},{int(field.censoredK[r, c, d])}"
                lines.append(row)
    return "\n".join(lines) + "\n"
