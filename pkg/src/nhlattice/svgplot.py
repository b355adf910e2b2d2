"""Hand-rolled SVG 1.1 emitters: line/point series and grid heatmaps.

No plotting dependency; output is a deterministic function of the data so
figures can be golden-file tested and hashed.  Coordinates are formatted
with %.6g, which is far below visual resolution but stable.
"""

from __future__ import annotations

import numpy as np

__all__ = ["render_line_svg", "render_heatmap_svg"]

_PALETTE = ["#1f6fb4", "#d1495b", "#2e8b57", "#8a5cb8", "#c97b1f", "#3aa0a0"]
_W, _H = 720, 460
_ML, _MR, _MT, _MB = 72, 24, 40, 56


def _fmt(v: float) -> str:
    return format(float(v), ".6g")


def _check_finite(arr) -> np.ndarray:
    a = np.asarray(arr, dtype=float)
    if a.size == 0:
        raise ValueError("empty data series")
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite values in plot data")
    return a


def _ticks(lo: float, hi: float, n: int = 5):
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return np.linspace(lo, hi, n), lo, hi


def _header(width: int, height: int, metadata: str | None) -> list:
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
    ]
    if metadata:
        out.append("<!-- " + metadata.replace("--", "..") + " -->")
    out.append(f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>')
    return out


def _axes(parts: list, xt, yt, x0, x1, y0, y1, sx, sy, title, xlabel, ylabel):
    px0, px1 = _ML, _W - _MR
    py0, py1 = _H - _MB, _MT
    parts.append(
        f'<rect x="{px0}" y="{py1}" width="{px1 - px0}" height="{py0 - py1}" '
        f'fill="none" stroke="#333333" stroke-width="1"/>')
    for xv in xt:
        xp = sx(xv)
        parts.append(f'<line x1="{_fmt(xp)}" y1="{py0}" x2="{_fmt(xp)}" y2="{py0 + 5}" '
                     f'stroke="#333333" stroke-width="1"/>')
        parts.append(f'<text x="{_fmt(xp)}" y="{py0 + 20}" font-size="12" '
                     f'text-anchor="middle" font-family="sans-serif">{_fmt(xv)}</text>')
    for yv in yt:
        yp = sy(yv)
        parts.append(f'<line x1="{px0 - 5}" y1="{_fmt(yp)}" x2="{px0}" y2="{_fmt(yp)}" '
                     f'stroke="#333333" stroke-width="1"/>')
        parts.append(f'<text x="{px0 - 8}" y="{_fmt(yp + 4)}" font-size="12" '
                     f'text-anchor="end" font-family="sans-serif">{_fmt(yv)}</text>')
    if title:
        parts.append(f'<text x="{(px0 + px1) // 2}" y="{_MT - 14}" font-size="15" '
                     f'text-anchor="middle" font-family="sans-serif">{title}</text>')
    if xlabel:
        parts.append(f'<text x="{(px0 + px1) // 2}" y="{_H - 14}" font-size="13" '
                     f'text-anchor="middle" font-family="sans-serif">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="18" y="{(py0 + py1) // 2}" font-size="13" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'transform="rotate(-90 18 {(py0 + py1) // 2})">{ylabel}</text>')


def render_line_svg(series, title: str = "", xlabel: str = "", ylabel: str = "",
                    draw: str = "lines", metadata: str | None = None) -> str:
    """SVG of (x, y, label) series as polylines or point markers."""
    if not series:
        raise ValueError("no series to plot")
    if draw not in ("lines", "points"):
        raise ValueError("draw must be 'lines' or 'points'")
    data = [(_check_finite(x), _check_finite(y), str(label)) for x, y, label in series]
    for x, y, _ in data:
        if x.shape != y.shape:
            raise ValueError("x and y lengths differ")

    x0 = min(d[0].min() for d in data)
    x1 = max(d[0].max() for d in data)
    y0 = min(d[1].min() for d in data)
    y1 = max(d[1].max() for d in data)
    xt, x0, x1 = _ticks(x0, x1)
    yt, y0, y1 = _ticks(y0, y1)
    sx = lambda v: _ML + (v - x0) / (x1 - x0) * (_W - _ML - _MR)
    sy = lambda v: _H - _MB - (v - y0) / (y1 - y0) * (_H - _MT - _MB)

    parts = _header(_W, _H, metadata)
    _axes(parts, xt, yt, x0, x1, y0, y1, sx, sy, title, xlabel, ylabel)
    for i, (x, y, label) in enumerate(data):
        color = _PALETTE[i % len(_PALETTE)]
        if draw == "lines":
            pts = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in zip(x, y))
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                         f'stroke-width="1.5"/>')
        else:
            for a, b in zip(x, y):
                parts.append(f'<circle cx="{_fmt(sx(a))}" cy="{_fmt(sy(b))}" r="2.5" '
                             f'fill="{color}"/>')
        if label:
            parts.append(f'<text x="{_W - _MR - 6}" y="{_MT + 16 + 16 * i}" font-size="12" '
                         f'text-anchor="end" font-family="sans-serif" '
                         f'fill="{color}">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_heatmap_svg(xs, ys, values, tol: float = 0.0, title: str = "",
                       xlabel: str = "", ylabel: str = "",
                       metadata: str | None = None) -> str:
    """Sign heatmap: one rect per grid cell, colored by sign(values) vs tol.

    values has shape (len(ys), len(xs)).  Negative cells are blue, positive
    red, |value| <= tol white (the boundary band).
    """
    xs = _check_finite(xs)
    ys = _check_finite(ys)
    v = np.asarray(values, dtype=float)
    if v.shape != (len(ys), len(xs)):
        raise ValueError(f"values shape {v.shape} != (len(ys), len(xs))")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite values in heatmap")

    dx = (xs[-1] - xs[0]) / max(len(xs) - 1, 1) or 1.0
    dy = (ys[-1] - ys[0]) / max(len(ys) - 1, 1) or 1.0
    x0, x1 = xs[0] - dx / 2, xs[-1] + dx / 2
    y0, y1 = ys[0] - dy / 2, ys[-1] + dy / 2
    sx = lambda val: _ML + (val - x0) / (x1 - x0) * (_W - _ML - _MR)
    sy = lambda val: _H - _MB - (val - y0) / (y1 - y0) * (_H - _MT - _MB)

    parts = _header(_W, _H, metadata)
    cw = abs(sx(xs[0] + dx) - sx(xs[0]))
    ch = abs(sy(ys[0] + dy) - sy(ys[0]))
    for iy, yv in enumerate(ys):
        for ix, xv in enumerate(xs):
            val = v[iy, ix]
            color = "#ffffff" if abs(val) <= tol else ("#d1495b" if val > 0 else "#1f6fb4")
            parts.append(
                f'<rect x="{_fmt(sx(xv) - cw / 2)}" y="{_fmt(sy(yv) - ch / 2)}" '
                f'width="{_fmt(cw)}" height="{_fmt(ch)}" fill="{color}"/>')
    xt, *_ = _ticks(x0, x1)
    yt, *_ = _ticks(y0, y1)
    _axes(parts, xt, yt, x0, x1, y0, y1, sx, sy, title, xlabel, ylabel)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
