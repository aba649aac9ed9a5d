"""End-to-end analysis: moments, diagrams per threshold, defect map, reports."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import defectmap, diagram, raster, rays, stats

DEFAULT_FRACTIONS = (0.5, 0.2)
DEFAULT_WINDOW = 32


@dataclass(frozen=True)
class AnalysisConfig:
    fractions: tuple = DEFAULT_FRACTIONS
    directions: int = rays.DEFAULT_DIRECTIONS
    r_max: int | None = None
    order: int = 2
    normalize: bool = False
    percentiles: tuple = (0.01, 0.99)
    window: int = DEFAULT_WINDOW
    limit: float = stats.DEFAULT_ACCEPTANCE_LIMIT
    threads: int = 1

    def __post_init__(self):
        if not self.fractions or any(not f > 0 for f in self.fractions):
            raise ValueError("threshold fractions must all be > 0")
        if len(self.fractions) > 4:
            raise ValueError("at most four threshold fractions")
        if self.directions < 4 or self.directions % 2:
            raise ValueError("direction count must be even and >= 4")
        if self.r_max is not None and self.r_max < 2:
            raise ValueError("r_max must be >= 2")
        if self.order != 0 and self.order < 2:
            raise ValueError("moment order must be 0 (off) or >= 2")
        if self.window < 1:
            raise ValueError("window size must be >= 1")
        if not self.limit > 0:
            raise ValueError("acceptance limit must be > 0")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        raster.NormalizationSpec(*self.percentiles)

    def resolved_rmax(self, image: raster.ImageGrid) -> int:
        if self.r_max is not None:
            return self.r_max
        return rays.default_rmax(image.width, image.height)


@dataclass
class ThresholdResult:
    field: rays.CoherenceField
    diagram: diagram.CoherenceDiagram
    defects: defectmap.DefectMap


@dataclass
class AnalysisResult:
    config: AnalysisConfig
    source: raster.ImageGrid
    image: raster.ImageGrid
    normalization: raster.NormalizationResult | None
    moments: stats.MomentSummary
    homogeneity: stats.HomogeneityGrid
    r_max: int
    thresholds: list = field(default_factory=list)

    @property
    def primary(self) -> ThresholdResult:
        return self.thresholds[0]


def preprocess(image: raster.ImageGrid, config: AnalysisConfig):
    if not config.normalize:
        return image, None
    norm = raster.normalize_contrast(image, raster.NormalizationSpec(*config.percentiles))
    return norm.image, norm


def homogeneity_for(image: raster.ImageGrid, config: AnalysisConfig) -> stats.HomogeneityGrid:
    window = min(config.window, image.width, image.height)
    return stats.homogeneity_lattice(image, window, config.limit)


def analyze(image: raster.ImageGrid, config: AnalysisConfig | None = None) -> AnalysisResult:
    config = config or AnalysisConfig()
    work, norm = preprocess(image, config)
    orders = (2, config.order) if config.order >= 2 else (2,)
    moments = stats.summarize(work, orders)
    r_max = config.resolved_rmax(work)
    dirs = rays.DirectionSet(config.directions)
    result = AnalysisResult(config, image, work, norm, moments, homogeneity_for(work, config), r_max)
    for f in config.fractions:
        fld = rays.coherence_field(work, dirs, f, r_max, config.order, config.threads)
        dia = diagram.average_diagram(fld)
        result.thresholds.append(ThresholdResult(fld, dia, defectmap.classify_defects(fld, dia)))
    return result


# --- reports -----------------------------------------------------------------

def _encode(obj, indent: int | None = 0) -> str:
    compact = indent is None
    inner = None if compact else indent + 1
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k), ensure_ascii=False)}: {_encode(obj[k], inner)}" for k in sorted(obj)]
        if compact:
            return "{" + ", ".join(items) + "}"
        pad, end = "  " * (indent + 1), "  " * indent
        return "{\n" + ",\n".join(pad + item for item in items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v, inner) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        # JSON has no infinity; non-finite values become null
        return f"{obj:.6f}" if math.isfinite(obj) else "null"
    if hasattr(obj, "item"):
        return _encode(obj.item(), indent)
    return json.dumps(obj, ensure_ascii=False)


def dumps(obj, compact: bool = False) -> str:
    """JSON with sorted keys and fixed 6-decimal floats."""
    return _encode(obj, None if compact else 0) + "\n"


def moments_record(m: stats.MomentSummary) -> dict:
    return {
        "m0": m.m0,
        "mk": {str(k): v for k, v in sorted(m.mk.items())},
        "quality_ratio": m.quality_ratio,
        "quality_ratio_infinite": math.isinf(m.quality_ratio),
        "degenerate": m.degenerate,
    }


def homogeneity_record(h: stats.HomogeneityGrid) -> dict:
    verdicts = h.verdicts
    return {
        "window_size": h.window_size,
        "acceptance_limit": h.acceptance_limit,
        "frame_quality_ratio": h.frame.quality_ratio,
        "frame_homogeneous": h.frame_homogeneous,
        "cells": int(verdicts.size),
        "homogeneous_cells": int(verdicts.sum()),
    }


def homogeneity_lines(h: stats.HomogeneityGrid) -> list[str]:
    """One compact JSON object per line: the frame first, then each cell."""
    def line(obj):
        return dumps(obj, compact=True).rstrip("\n")

    frame = {"kind": "frame", **moments_record(h.frame), "homogeneous": h.frame_homogeneous,
             "acceptance_limit": h.acceptance_limit, "window_size": h.window_size}
    out = [line(frame)]
    for row, orow in zip(h.cells, h.origins):
        for cell, (x0, y0, w, hh) in zip(row, orow):
            rec = {"kind": "cell", "x0": x0, "y0": y0, "w": w, "h": hh, **moments_record(cell),
                   "homogeneous": cell.quality_ratio <= h.acceptance_limit}
            out.append(line(rec))
    return out


def threshold_record(t: ThresholdResult) -> dict:
    d, dm = t.diagram, t.defects
    rec = {
        "fraction": d.fraction,
        "absolute_t": d.absolute_t,
        "l_min": d.l_min,
        "l_max": d.l_max,
        "anisotropy": d.anisotropy,
        "censored_fraction": d.censored_fraction,
        "defect_fraction": dm.defect_fraction,
        "defect_count": dm.defect_count,
        "L0": list(d.L0),
        "order_k": d.order_k,
        "Lk": list(d.Lk) if d.Lk is not None else None,
    }
    if t.field.censoredK is not None:
        rec["censored_fraction_k"] = float(t.field.censoredK.mean())
    else:
        rec["censored_fraction_k"] = None
    return rec


def build_report(result: AnalysisResult, input_name: str) -> dict:
    cfg = result.config
    norm = result.normalization
    cols, rows = result.primary.field.interior_size
    return {
        "input": {"name": input_name, "width": result.source.width, "height": result.source.height},
        "config": {
            "fractions": list(cfg.fractions),
            "directions": cfg.directions,
            "r_max": result.r_max,
            "order": cfg.order,
            "normalize": cfg.normalize,
            "percentiles": list(cfg.percentiles),
            "window": cfg.window,
            "limit": cfg.limit,
        },
        "normalization": {
            "applied": norm is not None,
            "low_value": norm.low_value if norm else None,
            "high_value": norm.high_value if norm else None,
            "degenerate": norm.degenerate if norm else None,
        },
        "moments": moments_record(result.moments),
        "degenerate": result.moments.degenerate,
        "homogeneity": homogeneity_record(result.homogeneity),
        "interior": {"margin": result.r_max, "width": cols, "height": rows},
        "thresholds": [threshold_record(t) for t in result.thresholds],
        "defects": {
            "fraction": result.primary.diagram.fraction,
            "defect_fraction": result.primary.defects.defect_fraction,
            "defect_count": result.primary.defects.defect_count,
            "l_min": result.primary.defects.l_min,
            "l_max": result.primary.defects.l_max,
            "censored_fraction": result.primary.diagram.censored_fraction,
        },
    }


def csv_name(index: int, fraction: float) -> str:
    return "diagram.csv" if index == 0 else f"diagram_f{fraction:.6g}.csv"


def write_diagrams(result: AnalysisResult, out_dir: Path) -> None:
    for i, t in enumerate(result.thresholds):
        (out_dir / csv_name(i, t.diagram.fraction)).write_text(diagram.diagram_to_csv(t.diagram), encoding="utf-8")
    svg = diagram.diagram_to_svg([t.diagram for t in result.thresholds])
    (out_dir / "diagram.svg").write_text(svg, encoding="utf-8")


def write_defects(result: AnalysisResult, out_dir: Path) -> None:
    dm = result.primary.defects
    raster.save_rgb_png(defectmap.render_defect_map(result.image, dm), out_dir / "defects.png")
    raster.save_pbm(dm.frame_mask(), out_dir / "defects.pbm")


def write_outputs(result: AnalysisResult, out_dir, input_name: str) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(dumps(build_report(result, input_name)), encoding="utf-8")
    write_diagrams(result, out_dir)
    write_defects(result, out_dir)
