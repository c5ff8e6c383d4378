"""CSV and SVG writers with provenance headers. Output is byte-deterministic."""

from __future__ import annotations

import base64
import csv
import io
import math
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import __version__

__all__ = [
    "RHO_COLUMNS",
    "FIELD_COLUMNS",
    "Curve",
    "provenance_lines",
    "emit_csv",
    "read_csv",
    "emit_svg_lineplot",
    "field_rows",
    "emit_field_svg",
]

RHO_COLUMNS = (
    "preset", "bc", "omega", "r", "gamma", "N", "L_nominal", "L_effective",
    "xi", "xi_over_omega", "rho", "diverged", "note",
)
FIELD_COLUMNS = ("x", "y", "re", "im", "abs")

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def provenance_lines(meta: Mapping | None) -> list[str]:
    lines = [f"# tool: dampedschwarz {__version__}"]
    for key, value in (meta or {}).items():
        lines.append(f"# {key}: {_fmt(value)}")
    return lines


def emit_csv(rows: Sequence[Mapping], path, columns: Sequence[str] | None = None, meta: Mapping | None = None) -> Path:
    """Write ``rows`` after ``#``-prefixed provenance lines.

    Floats are written with ``repr`` so :func:`read_csv` returns them exactly;
    ``inf`` is written literally.
    """
    rows = list(rows)
    if columns is None:
        if not rows:
            raise ValueError("no rows and no columns given")
        columns = list(rows[0].keys())
    buf = io.StringIO()
    for line in provenance_lines(meta):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def _parse(value: str):
    if value in ("true", "false"):
        return value == "true"
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def read_csv(path) -> tuple[dict, list[dict]]:
    """Inverse of :func:`emit_csv`: ``(meta, rows)`` with numbers parsed back."""
    meta: dict = {}
    body = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = value
        else:
            body.append(line)
    reader = csv.DictReader(body)
    return meta, [{k: _parse(v) for k, v in row.items()} for row in reader]


@dataclass(frozen=True)
class Curve:
    label: str
    x: Sequence[float]
    y: Sequence[float]


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def emit_svg_lineplot(
    curves: Sequence[Curve],
    path,
    title: str = "",
    x_label: str = "",
    y_label: str = "",
    logy: bool = False,
    y_range: tuple[float, float] | None = None,
    meta: Mapping | None = None,
) -> Path:
    """Self-contained SVG line chart, one ``<polyline>`` per curve.

    Non-finite ``y`` values are drawn at the top of the axis with a marker.
    With ``logy`` nonpositive values are clamped to the bottom of the axis.
    """
    curves = list(curves)
    if not curves:
        raise ValueError("no curves to plot")
    width, height = 820, 520
    left, right, top, bottom = 80, 200, 50, 70
    pw, ph = width - left - right, height - top - bottom

    xs = np.concatenate([np.asarray(c.x, dtype=float) for c in curves])
    ys = np.concatenate([np.asarray(c.y, dtype=float) for c in curves])
    if xs.size == 0:
        raise ValueError("curves contain no points")
    x0, x1 = float(xs.min()), float(xs.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    finite = ys[np.isfinite(ys)]
    if y_range is not None:
        y0, y1 = y_range
    elif logy:
        pos = finite[finite > 0]
        y1 = 10 ** math.ceil(math.log10(pos.max())) if pos.size else 1.0
        y0 = 10 ** math.floor(math.log10(pos.min())) if pos.size else 1e-3
        y0 = max(y0, y1 * 1e-12)
        if y0 == y1:
            y0 = y1 / 10
    else:
        y0 = float(min(0.0, finite.min())) if finite.size else 0.0
        y1 = float(finite.max()) if finite.size else 1.0
        if y1 == y0:
            y1 = y0 + 1.0

    def tx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def ty(y):
        if not math.isfinite(y):
            return float(top)
        if logy:
            y = max(y, y0)
            frac = (math.log10(y) - math.log10(y0)) / (math.log10(y1) - math.log10(y0))
        else:
            frac = (y - y0) / (y1 - y0)
        frac = min(max(frac, 0.0), 1.0)
        return top + (1.0 - frac) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">'
    ]
    for line in provenance_lines(meta):
        out.append(f"<!-- {_escape(line[2:])} -->")
    out.append('<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>')
    if title:
        out.append(
            f'<text x="{left + pw / 2:.1f}" y="28" text-anchor="middle" font-size="16" font-family="sans-serif">{_escape(title)}</text>'
        )
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#000000"/>')

    for t in _nice_ticks(x0, x1):
        px = tx(t)
        out.append(f'<line x1="{px:.2f}" y1="{top + ph}" x2="{px:.2f}" y2="{top + ph + 5}" stroke="#000000"/>')
        out.append(
            f'<text x="{px:.2f}" y="{top + ph + 20}" text-anchor="middle" font-size="12" font-family="sans-serif">{t:g}</text>'
        )
    if logy:
        yticks = [10.0**e for e in range(int(round(math.log10(y0))), int(round(math.log10(y1))) + 1)]
    else:
        yticks = _nice_ticks(y0, y1)
    for t in yticks:
        py = ty(t)
        out.append(f'<line x1="{left - 5}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="#000000"/>')
        out.append(f'<line x1="{left}" y1="{py:.2f}" x2="{left + pw}" y2="{py:.2f}" stroke="#dddddd"/>')
        out.append(
            f'<text x="{left - 8}" y="{py + 4:.2f}" text-anchor="end" font-size="12" font-family="sans-serif">{t:g}</text>'
        )
    if x_label:
        out.append(
            f'<text x="{left + pw / 2:.1f}" y="{height - 20}" text-anchor="middle" font-size="14" font-family="sans-serif">{_escape(x_label)}</text>'
        )
    if y_label:
        out.append(
            f'<text x="20" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="14" font-family="sans-serif" '
            f'transform="rotate(-90 20 {top + ph / 2:.1f})">{_escape(y_label)}</text>'
        )

    for i, c in enumerate(curves):
        color = COLORS[i % len(COLORS)]
        pts = [(tx(float(x)), ty(float(y))) for x, y in zip(c.x, c.y)]
        coords = " ".join(f"{px:.2f},{py:.2f}" for px, py in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        for (px, py), y in zip(pts, c.y):
            if not math.isfinite(float(y)):
                out.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" fill="{color}"/>')
        ly = top + 16 + 20 * i
        lx = left + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(
            f'<text x="{lx + 30}" y="{ly + 4}" font-size="12" font-family="sans-serif">{_escape(c.label)}</text>'
        )
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path


def field_rows(field) -> Iterable[dict]:
    """One row per node (Dirichlet boundary zeros included), x-major."""
    full = field.to_full()
    n = field.grid.n_interior
    coords = np.arange(n + 2) * field.grid.h
    for i in range(n + 2):
        for j in range(n + 2):
            v = full[i, j]
            yield {"x": coords[i], "y": coords[j], "re": v.real, "im": v.imag, "abs": abs(v)}


def _png(rgb: np.ndarray) -> bytes:
    """Minimal RGB PNG encoder (8-bit, no interlace)."""
    h, w, _ = rgb.shape
    raw = b"".join(b"\x00" + rgb[row].astype(np.uint8).tobytes() for row in range(h))

    def chunk(tag, data):
        return struct.pack(">I", len(data)) + tag + data + struct.pack(">I", zlib.crc32(tag + data) & 0xFFFFFFFF)

    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0))
        + chunk(b"IDAT", zlib.compress(raw, 9))
        + chunk(b"IEND", b"")
    )


def _colorize(values: np.ndarray, kind: str) -> np.ndarray:
    if kind == "abs":
        vmax = values.max()
        t = values / vmax if vmax > 0 else values
        g = np.round(255 * (1.0 - t)).astype(np.uint8)
        return np.stack([g, g, g], axis=-1)
    vmax = np.abs(values).max()
    t = values / vmax if vmax > 0 else values
    # blue (-1) through white (0) to red (+1)
    pos = np.clip(t, 0, 1)
    neg = np.clip(-t, 0, 1)
    r = 255 * (1 - neg)
    g = 255 * (1 - np.maximum(pos, neg))
    b = 255 * (1 - pos)
    return np.round(np.stack([r, g, b], axis=-1)).astype(np.uint8)


def emit_field_svg(field, path, quantity: str = "abs", title: str = "", meta: Mapping | None = None) -> Path:
    """Raster SVG of ``|u|`` (grayscale) or ``Re u`` (diverging), auto-scaled."""
    full = field.to_full()
    if quantity == "abs":
        values = np.abs(full)
    elif quantity == "real":
        values = full.real
    else:
        raise ValueError("quantity must be 'abs' or 'real'")
    # image rows run top to bottom, so y is flipped
    rgb = _colorize(values.T[::-1], quantity)
    data = base64.b64encode(_png(rgb)).decode("ascii")
    size = 512
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size + 30}" viewBox="0 0 {size} {size + 30}">'
    ]
    for line in provenance_lines(meta):
        out.append(f"<!-- {_escape(line[2:])} -->")
    if title:
        out.append(
            f'<text x="{size / 2}" y="20" text-anchor="middle" font-size="14" font-family="sans-serif">{_escape(title)}</text>'
        )
    out.append(
        f'<image x="0" y="30" width="{size}" height="{size}" preserveAspectRatio="none" '
        f'style="image-rendering:pixelated" href="data:image/png;base64,{data}"/>'
    )
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path
