"""Frame-averaged coherence lengths and their CSV / SVG renderings."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rays import CoherenceField, DirectionSet


class EmptyFieldError(ValueError):
    pass


@dataclass(frozen=True)
class CoherenceDiagram:
    """Per-direction mean coherence lengths ``L0`` (and optionally ``Lk``)."""

    L0: tuple
    fraction: float
    censored_fraction: float = 0.0
    Lk: tuple | None = None
    order_k: int = 0
    absolute_t: float | None = None
    r_max: int | None = None
    frame_size: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "L0", tuple(float(v) for v in self.L0))
        if self.Lk is not None:
            Lk = tuple(float(v) for v in self.Lk)
            if len(Lk) != len(self.L0):
                raise ValueError("Lk and L0 must have the same direction count")
            object.__setattr__(self, "Lk", Lk)
        if not self.L0:
            raise ValueError("diagram needs at least one direction")

    @property
    def count(self) -> int:
        return len(self.L0)

    @property
    def l_min(self) -> float:
        return min(self.L0)

    @property
    def l_max(self) -> float:
        return max(self.L0)

    @property
    def anisotropy(self) -> float:
        return self.l_max / self.l_min

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.count) / self.count


def _direction_means(lengths: np.ndarray) -> tuple:
    n = lengths.shape[0] * lengths.shape[1]
    # integer totals are exact, so the mean is correctly rounded
    totals = lengths.reshape(n, -1).astype(np.int64).sum(axis=0)
    return tuple(int(t) / n for t in totals)


def average_diagram(field: CoherenceField) -> CoherenceDiagram:
    """Average each direction's lengths over the interior (censored entries
    count at their capped value)."""
    rows, cols, _ = field.lengths0.shape
    if rows * cols == 0:
        raise EmptyFieldError("coherence field has an empty interior")
    Lk = _direction_means(field.lengthsK) if field.order_k else None
    return CoherenceDiagram(
        L0=_direction_means(field.lengths0),
        fraction=field.fraction,
        censored_fraction=float(field.censored0.mean()),
        Lk=Lk,
        order_k=field.order_k,
        absolute_t=field.absolute_t,
        r_max=field.r_max,
        frame_size=(field.width, field.height),
    )


# --- CSV ---------------------------------------------------------------------

def diagram_to_csv(d: CoherenceDiagram) -> str:
    head = "index,angle_radians,L0"
    if d.Lk is not None:
        head += f",L{d.order_k}"
    lines = [head]
    for i, (theta, v) in enumerate(zip(d.angles, d.L0)):
        row = f"{i},{theta:.6f},{v:.6f}"
        if d.Lk is not None:
            row += f",{d.Lk[i]:.6f}"
        lines.append(row)
    lines += [
        f"l_min,{d.l_min:.6f}",
        f"l_max,{d.l_max:.6f}",
        f"censored_fraction,{d.censored_fraction:.6f}",
        f"threshold_fraction,{d.fraction:.6f}",
    ]
    return "\n".join(lines) + "\n"


def diagram_from_csv(text: str) -> CoherenceDiagram:
    lines = text.strip().splitlines()
    head = lines[0].split(",")
    if head[:3] != ["index", "angle_radians", "L0"]:
        raise ValueError(f"unexpected CSV header {lines[0]!r}")
    order_k = int(head[3][1:]) if len(head) > 3 else 0
    L0, Lk, summary = [], [], {}
    for line in lines[1:]:
        cells = line.split(",")
        if cells[0].isdigit():
            L0.append(float(cells[2]))
            if order_k:
                Lk.append(float(cells[3]))
        else:
            summary[cells[0]] = float(cells[1])
    return CoherenceDiagram(
        L0=L0,
        fraction=summary["threshold_fraction"],
        censored_fraction=summary["censored_fraction"],
        Lk=Lk if order_k else None,
        order_k=order_k,
    )


# --- SVG ---------------------------------------------------------------------

_COLORS = ("#c0392b", "#2471a3", "#229954", "#7d3c98")
SVG_MARGIN = 40


def _tick_step(limit: float) -> int:
    raw = limit / 4.0
    mag = 10 ** math.floor(math.log10(raw)) if raw >= 1 else 1
    for m in (1, 2, 5, 10):
        if m * mag >= raw:
            return max(1, int(m * mag))
    return max(1, int(10 * mag))


def diagram_to_svg(diagrams, canvas: int = 400) -> str:
    """Overlay up to four diagrams as closed polygons on a polar plot.

    Screen y is flipped so direction 0 (the +y axis) points up. All
    polygons share one scale, set by the largest ``l_max``.
    """
    diagrams = list(diagrams)
    if not 1 <= len(diagrams) <= 4:
        raise ValueError("between one and four diagrams can be drawn")
    count = diagrams[0].count
    if any(d.count != count for d in diagrams):
        raise ValueError("diagrams have mismatched direction counts")
    steps = DirectionSet(count).steps
    c = canvas / 2.0
    limit = max(d.l_max for d in diagrams)
    scale = (c - SVG_MARGIN) / limit
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{canvas}" height="{canvas}" '
        f'viewBox="0 0 {canvas} {canvas}">',
        f'<rect x="0" y="0" width="{canvas}" height="{canvas}" fill="white"/>',
        '<g id="axes" stroke="#888888" stroke-width="1">',
        f'<line x1="{SVG_MARGIN / 2:.3f}" y1="{c:.3f}" x2="{canvas - SVG_MARGIN / 2:.3f}" y2="{c:.3f}"/>',
        f'<line x1="{c:.3f}" y1="{SVG_MARGIN / 2:.3f}" x2="{c:.3f}" y2="{canvas - SVG_MARGIN / 2:.3f}"/>',
    ]
    step = _tick_step(limit)
    ticks = []
    for v in range(step, int(math.floor(limit)) + 1, step):
        off = v * scale
        for sign in (-1, 1):
            x = c + sign * off
            y = c - sign * off
            out.append(f'<line x1="{x:.3f}" y1="{c - 3:.3f}" x2="{x:.3f}" y2="{c + 3:.3f}"/>')
            out.append(f'<line x1="{c - 3:.3f}" y1="{y:.3f}" x2="{c + 3:.3f}" y2="{y:.3f}"/>')
            label = str(sign * v)
            ticks.append(f'<text x="{x:.3f}" y="{c + 14:.3f}" text-anchor="middle">{label}</text>')
            ticks.append(f'<text x="{c - 6:.3f}" y="{y + 4:.3f}" text-anchor="end">{label}</text>')
    out.append("</g>")
    out.append('<g id="ticks" font-family="sans-serif" font-size="10" fill="#444444">')
    out += ticks
    out.append("</g>")
    for n, d in enumerate(diagrams):
        pts = " ".join(
            f"{c + scale * L * sx:.3f},{c - scale * L * sy:.3f}"
            for L, (sx, sy) in zip(d.L0, steps)
        )
        color = _COLORS[n]
        out.append(
            f'<polygon class="diagram" data-fraction="{d.fraction:.6f}" points="{pts}" '
            f'fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        out.append(
            f'<text x="{SVG_MARGIN / 2:.3f}" y="{14 + 14 * n:.3f}" font-family="sans-serif" '
            f'font-size="11" fill="{color}">f = {d.fraction:.2f}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
