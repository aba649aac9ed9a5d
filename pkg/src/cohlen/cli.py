"""Command-line interface.

Exit codes: 0 success, 2 invalid configuration, 3 I/O failure,
4 frame too small for the requested ``--rmax``.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from . import pipeline, raster, rays, synth

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_FRAME = 4


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _float_list(ctx, param, value):
    if value is None:
        return None
    try:
        return tuple(float(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}") from None


def _load(path):
    try:
        return raster.load_image(path)
    except (OSError, raster.ImageFormatError) as exc:
        _fail(EXIT_IO, f"cannot read {path}: {exc}")


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot create output directory {out}: {exc}")
    return out


def analysis_options(fn):
    opts = [
        click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False),
                     help="Input PGM (P5) or 8-bit grayscale PNG."),
        click.option("--out-dir", default="out", show_default=True, type=click.Path(file_okay=False)),
        click.option("--fractions", default="0.5,0.2", show_default=True, callback=_float_list,
                     help="Threshold fractions of sqrt(M2), comma-separated."),
        click.option("--directions", default=rays.DEFAULT_DIRECTIONS, show_default=True, type=int),
        click.option("--rmax", type=int, default=None, help="Ray length; default min(W, H) // 4."),
        click.option("--order", default=2, show_default=True, type=int,
                     help="Moment order k for the l_k lengths (0 disables)."),
        click.option("--normalize/--no-normalize", default=False, show_default=True,
                     help="Percentile contrast stretch before analysis."),
        click.option("--percentiles", default="0.01,0.99", show_default=True, callback=_float_list),
        click.option("--window", default=pipeline.DEFAULT_WINDOW, show_default=True, type=int,
                     help="Homogeneity lattice window size."),
        click.option("--limit", default=0.5, show_default=True, type=float,
                     help="Quality-ratio acceptance limit."),
        click.option("--threads", default=1, show_default=True, type=int),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _config(fractions, directions, rmax, order, normalize, percentiles, window, limit, threads):
    if percentiles is None or len(percentiles) != 2:
        _fail(EXIT_CONFIG, "--percentiles needs exactly two values")
    try:
        return pipeline.AnalysisConfig(
            fractions=fractions, directions=directions, r_max=rmax, order=order,
            normalize=normalize, percentiles=percentiles, window=window, limit=limit,
            threads=threads,
        )
    except ValueError as exc:
        _fail(EXIT_CONFIG, str(exc))


def _run(image, config):
    try:
        return pipeline.analyze(image, config)
    except rays.FrameTooSmallError as exc:
        _fail(EXIT_FRAME, str(exc))


def _io_guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except OSError as exc:
            _fail(EXIT_IO, str(exc))
    return wrapper


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Coherence-length texture analysis."""


@main.command()
@analysis_options
@_io_guard
def analyze(input_path, out_dir, fractions, directions, rmax, order, normalize, percentiles,
            window, limit, threads):
    """Full pipeline: report.json, diagram CSV/SVG, defect map PNG/PBM."""
    config = _config(fractions, directions, rmax, order, normalize, percentiles, window, limit, threads)
    image = _load(input_path)
    result = _run(image, config)
    out = _out_dir(out_dir)
    pipeline.write_outputs(result, out, Path(input_path).name)
    p = result.primary
    click.echo(
        f"{Path(input_path).name}: L0 in [{p.diagram.l_min:.3f}, {p.diagram.l_max:.3f}], "
        f"defects {p.defects.defect_fraction:.4f}, outputs in {out}"
    )


@main.command("diagram")
@analysis_options
@click.option("--save-field", is_flag=True, help="Also write the raw coherence field per threshold.")
@_io_guard
def diagram_cmd(input_path, out_dir, fractions, directions, rmax, order, normalize, percentiles,
                window, limit, threads, save_field):
    """Coherence-length diagrams (CSV per threshold plus one overlaid SVG)."""
    config = _config(fractions, directions, rmax, order, normalize, percentiles, window, limit, threads)
    result = _run(_load(input_path), config)
    out = _out_dir(out_dir)
    pipeline.write_diagrams(result, out)
    for i, t in enumerate(result.thresholds):
        if save_field:
            rays.write_field(t.field, out / f"field_f{t.diagram.fraction:.6g}.bin")
        click.echo(f"f={t.diagram.fraction:g}: l_min {t.diagram.l_min:.6f} l_max {t.diagram.l_max:.6f} "
                   f"censored {t.diagram.censored_fraction:.6f} -> {pipeline.csv_name(i, t.diagram.fraction)}")


@main.command()
@analysis_options
@_io_guard
def defects(input_path, out_dir, fractions, directions, rmax, order, normalize, percentiles,
            window, limit, threads):
    """Defect map for the first threshold fraction (PNG half-tone plus PBM mask)."""
    config = _config(fractions[:1] if fractions else fractions, directions, rmax, 0, normalize,
                     percentiles, window, limit, threads)
    result = _run(_load(input_path), config)
    out = _out_dir(out_dir)
    pipeline.write_defects(result, out)
    dm = result.primary.defects
    summary = {"fraction": result.primary.diagram.fraction, "defect_fraction": dm.defect_fraction,
               "defect_count": dm.defect_count, "l_min": dm.l_min, "l_max": dm.l_max,
               "censored_fraction": result.primary.diagram.censored_fraction}
    click.echo(pipeline.dumps(summary, compact=True), nl=False)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out-dir", default="out", show_default=True, type=click.Path(file_okay=False))
@click.option("--percentiles", default="0.01,0.99", show_default=True, callback=_float_list)
@_io_guard
def normalize(input_path, out_dir, percentiles):
    """Percentile contrast stretch, written as normalized.pgm."""
    try:
        spec = raster.NormalizationSpec(*percentiles)
    except (TypeError, ValueError) as exc:
        _fail(EXIT_CONFIG, f"bad --percentiles: {exc}")
    res = raster.normalize_contrast(_load(input_path), spec)
    out = _out_dir(out_dir)
    raster.save_gray(res.image, out / "normalized.pgm")
    click.echo(pipeline.dumps({"low_value": res.low_value, "high_value": res.high_value,
                               "degenerate": res.degenerate}, compact=True), nl=False)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False))
@click.option("--window", default=pipeline.DEFAULT_WINDOW, show_default=True, type=int)
@click.option("--limit", default=0.5, show_default=True, type=float)
@click.option("--out-dir", default=None, type=click.Path(file_okay=False),
              help="Write homogeneity.jsonl here instead of stdout.")
@_io_guard
def homogeneity(input_path, window, limit, out_dir):
    """Windowed quality ratios as JSON lines (frame first, then each cell)."""
    from . import stats

    image = _load(input_path)
    try:
        grid = stats.homogeneity_lattice(image, window, limit)
    except ValueError as exc:
        _fail(EXIT_CONFIG, str(exc))
    text = "\n".join(pipeline.homogeneity_lines(grid)) + "\n"
    if out_dir is None:
        click.echo(text, nl=False)
    else:
        (_out_dir(out_dir) / "homogeneity.jsonl").write_text(text, encoding="utf-8")


@main.command("synth")
@click.option("--kind", type=click.Choice(synth.KINDS), default="noise", show_default=True)
@click.option("--size", default=64, show_default=True, type=int)
@click.option("--period", default=8, show_default=True, type=int)
@click.option("--levels", default="0,255", show_default=True, callback=_float_list)
@click.option("--orientation", type=click.Choice(synth.ORIENTATIONS), default="vertical", show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--std", "noise_std", default=40.0, show_default=True, type=float)
@click.option("--disk", default=None, callback=_float_list,
              help="Inject a disk: cx,cy,radius,offset.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@_io_guard
def synth_cmd(kind, size, period, levels, orientation, seed, noise_std, disk, out_path):
    """Write a synthetic texture as PGM."""
    try:
        spec = synth.TextureSpec(kind, size, period, tuple(levels), orientation, seed, noise_std)
        image = synth.generate(spec)
        if disk is not None:
            if len(disk) != 4:
                raise ValueError("--disk needs cx,cy,radius,offset")
            cx, cy, r, off = disk
            image = synth.inject_disk(image, (cx, cy), r, off)
    except ValueError as exc:
        _fail(EXIT_CONFIG, str(exc))
    raster.save_gray(image, out_path)


if __name__ == "__main__":
    main()
