"""Minimal SVG line charts: axes, one polyline per series, a legend."""

from __future__ import annotations

import math
from typing import List, Sequence, Tuple
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f")

Series = Tuple[str, Sequence[float], Sequence[float]]


def _finite(xs, ys) -> List[Tuple[float, float]]:
    return [(x, y) for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]


def _ticks(lo: float, hi: float, count: int = 5) -> List[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def line_chart(series: Sequence[Series], title: str = "", x_label: str = "", y_label: str = "",
               width: int = 720, height: int = 440) -> str:
    """Render ``(name, xs, ys)`` series; non-finite points are skipped."""
    left, right, top, bottom = 70, 170, 40, 50
    pw, ph = width - left - right, height - top - bottom
    pts = [p for _, xs, ys in series for p in _finite(xs, ys)]
    if pts:
        x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
        y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(x: float) -> float:
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y: float) -> float:
        return top + (1 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left}" y="{top - 15}" font-family="sans-serif" font-size="14">{escape(title)}</text>',
        f'<g class="axes" stroke="black" stroke-width="1">'
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}"/>'
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}"/></g>',
    ]
    for x in _ticks(x0, x1):
        out.append(f'<text x="{sx(x):.1f}" y="{top + ph + 16}" font-family="sans-serif" font-size="10" '
                   f'text-anchor="middle">{x:.3g}</text>')
    for y in _ticks(y0, y1):
        out.append(f'<text x="{left - 6}" y="{sy(y) + 3:.1f}" font-family="sans-serif" font-size="10" '
                   f'text-anchor="end">{y:.3g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 10}" font-family="sans-serif" font-size="12" '
               f'text-anchor="middle">{escape(x_label)}</text>')
    out.append(f'<text x="15" y="{top + ph / 2}" font-family="sans-serif" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 15 {top + ph / 2})">{escape(y_label)}</text>')
    for i, (name, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in _finite(xs, ys))
        out.append(f'<polyline class="series" data-name="{escape(name, {chr(34): "&quot;"})}" fill="none" '
                   f'stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        ly = top + 14 * i + 8
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 36}" y="{ly + 4}" font-family="sans-serif" font-size="11">'
                   f'{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


__all__ = ["line_chart"]
