"""CSV records, run manifests and standalone SVG plots."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from .experiments import FidelityRecord

HEADER = ("scenario", "model", "category", "N", "base", "L", "delta_L", "sigma", "realization", "fidelity")
_INT_FIELDS = ("N", "base", "L", "delta_L", "realization")
_FLOAT_FIELDS = ("sigma", "fidelity")


class SchemaError(ValueError):
    """A records file does not match the fixed CSV schema."""


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _atomic_write(path, text: str) -> None:
    """Write through a temporary file in the target directory, then rename.

    On failure the temporary file is removed and nothing is left at ``path``.
    """
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in records:
        w.writerow([r.scenario, r.model, r.category, r.N, r.base, r.L, r.delta_L,
                    format_float(r.sigma), r.realization, format_float(r.fidelity)])
    return buf.getvalue()


def write_records(records, path) -> None:
    _atomic_write(path, records_to_csv(records))


def read_records(path) -> list[FidelityRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != HEADER:
            raise SchemaError(f"{path}: expected header {','.join(HEADER)}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(HEADER):
                raise SchemaError(f"{path}:{lineno}: expected {len(HEADER)} fields, got {len(row)}")
            d = dict(zip(HEADER, row))
            try:
                for k in _INT_FIELDS:
                    d[k] = int(d[k])
                for k in _FLOAT_FIELDS:
                    d[k] = float(d[k])
                out.append(FidelityRecord(**d))
            except ValueError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from None
    return out


def write_table(rows, columns, path) -> None:
    """Generic CSV for non-fidelity outputs (profiles, band averages, fits)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    _atomic_write(path, buf.getvalue())


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, config: dict, files, master_seed: int, started: str, finished: str) -> dict:
    from . import __version__

    manifest = {
        "version": __version__,
        "master_seed": master_seed,
        "config": config,
        "started": started,
        "finished": finished,
        "files": {os.path.basename(f): sha256_file(f) for f in files},
    }
    _atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


# --- SVG -------------------------------------------------------------------

MARKERS = {"typed-asym": "triangle", "typed-sym": "circle", "non-typed": "square"}
COLORS = {"relative": "#1f5fa8", "absolute": "#c0392b"}
_FALLBACK_COLORS = ("#1f5fa8", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#555555")


@dataclass
class Series:
    label: str
    points: list
    marker: str = "circle"
    color: str = "#1f5fa8"
    line: bool = True


@dataclass
class Axes:
    xlabel: str = "x"
    ylabel: str = "y"
    xlog2: bool = False
    xlim: tuple | None = None
    ylim: tuple | None = None
    width: int = 640
    height: int = 440
    title: str = ""
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.width < 100 or self.height < 100:
            raise ValueError("plot area too small")
        for lim in (self.xlim, self.ylim):
            if lim is not None and not (len(lim) == 2 and lim[0] < lim[1]):
                raise ValueError(f"invalid axis limits {lim}")
        if self.xlog2 and self.xlim is not None and self.xlim[0] <= 0:
            raise ValueError("log axis needs positive limits")


def series_for_config(model: str, category: str, points) -> Series:
    return Series(f"{category} ({model})", list(points), MARKERS.get(category, "circle"),
                  COLORS.get(model, "#333333"))


def _marker(kind, x, y, color):
    r = 4.0
    if kind == "square":
        return (f'<rect class="datum" x="{x - r:.2f}" y="{y - r:.2f}" width="{2 * r:.2f}" '
                f'height="{2 * r:.2f}" fill="none" stroke="{color}"/>')
    if kind == "triangle":
        pts = f"{x:.2f},{y - r:.2f} {x - r:.2f},{y + r:.2f} {x + r:.2f},{y + r:.2f}"
        return f'<polygon class="datum" points="{pts}" fill="none" stroke="{color}"/>'
    return f'<circle class="datum" cx="{x:.2f}" cy="{y:.2f}" r="{r:.2f}" fill="none" stroke="{color}"/>'


def _ticks(lo, hi, n=5):
    step = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(step))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= step), default=step)
    start = math.ceil(lo / step) * step
    out, t = [], start
    while t <= hi + 1e-12 * abs(hi):
        out.append(round(t, 12))
        t += step
    return out


def render_svg(series, axes: Axes) -> str:
    if not series:
        raise ValueError("need at least one series")
    axes.validate()
    tx = (lambda v: math.log2(v)) if axes.xlog2 else (lambda v: v)
    pts = [(tx(x), y) for s in series for x, y in s.points]
    if not pts:
        raise ValueError("series contain no points")
    if axes.xlog2 and any(x <= 0 for s in series for x, _ in s.points):
        raise ValueError("log axis needs positive x values")
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    x0, x1 = (tx(axes.xlim[0]), tx(axes.xlim[1])) if axes.xlim else (min(xs), max(xs))
    y0, y1 = axes.ylim if axes.ylim else (min(ys), max(ys))
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    W, H = axes.width, axes.height
    left, right, top, bottom = 70, 170, 30, 50
    pw, ph = W - left - right, H - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1 - (y - y0) / (y1 - y0)) * ph

    out = ['<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>']
    if axes.title:
        out.append(f'<text x="{left + pw / 2:.1f}" y="18" text-anchor="middle">{escape(axes.title)}</text>')
    out.append(f'<g class="axes" stroke="black" fill="none">'
               f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}"/></g>')
    for t in _ticks(x0, x1):
        label = f"2^{t:g}" if axes.xlog2 else f"{t:g}"
        out.append(f'<line x1="{px(t):.2f}" y1="{top + ph}" x2="{px(t):.2f}" y2="{top + ph + 5}" stroke="black"/>'
                   f'<text x="{px(t):.2f}" y="{top + ph + 18}" text-anchor="middle">{escape(label)}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{left - 5}" y1="{py(t):.2f}" x2="{left}" y2="{py(t):.2f}" stroke="black"/>'
                   f'<text x="{left - 8}" y="{py(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{H - 10}" text-anchor="middle">{escape(axes.xlabel)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(axes.ylabel)}</text>')
    for i, s in enumerate(series):
        coords = [(px(tx(x)), py(y)) for x, y in s.points]
        out.append(f'<g class="series" data-label="{escape(s.label)}">')
        if s.line and len(coords) > 1:
            path = " ".join(f"{x:.2f},{y:.2f}" for x, y in coords)
            out.append(f'<polyline points="{path}" fill="none" stroke="{s.color}" '
                       f'stroke-dasharray="4 3" stroke-width="1"/>')
        out.extend(_marker(s.marker, x, y, s.color) for x, y in coords)
        out.append("</g>")
        ly = top + 14 + 18 * i
        out.append(f'<g class="legend">{_marker(s.marker, left + pw + 16, ly - 4, s.color).replace("datum", "key")}'
                   f'<text x="{left + pw + 26}" y="{ly}">{escape(s.label)}</text></g>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(series, axes: Axes, path) -> None:
    _atomic_write(path, render_svg(series, axes))
