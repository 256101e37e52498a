"""Minimal static SVG line plots (no plotting dependency)."""
from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 150, 40, 50
COLORS = ("#c0392b", "#2c6fbb", "#222222", "#27ae60", "#8e44ad", "#d35400", "#16a085")
DASHES = ("", "6,4", "2,3", "8,3,2,3", "", "6,4", "2,3")


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _ticks(lo: float, hi: float, count: int = 5) -> list:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def line_plot(
    path: Path,
    series: Sequence[tuple],
    title: str,
    xlabel: str,
    ylabel: str,
    logy: bool = False,
    markers: bool = False,
) -> Path:
    """Write ``series`` (tuples of ``(label, x, y)``) as one SVG chart.

    On a log axis nonpositive values are dropped.
    """
    prepared = []
    for label, x, y in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = np.isfinite(y) & np.isfinite(x)
        if logy:
            keep &= y > 0
        prepared.append((label, x[keep], np.log10(y[keep]) if logy else y[keep]))
    xs = np.concatenate([p[1] for p in prepared]) if prepared else np.zeros(1)
    ys = np.concatenate([p[2] for p in prepared]) if prepared else np.zeros(1)
    if xs.size == 0:
        xs, ys = np.zeros(1), np.zeros(1)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if logy:
        y0, y1 = math.floor(y0), math.ceil(y1)
    elif y0 > 0:
        y0 = 0.0
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(v):
        return MARGIN_L + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return MARGIN_T + ph - (v - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">{title}</text>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for xv in _ticks(x0, x1):
        out.append(f'<text x="{sx(xv):.1f}" y="{MARGIN_T + ph + 16}" text-anchor="middle">{_fmt(xv)}</text>')
    yticks = [float(k) for k in range(int(y0), int(y1) + 1)] if logy else _ticks(y0, y1)
    if logy and len(yticks) > 8:
        stride = math.ceil(len(yticks) / 8)
        yticks = yticks[::stride]
    for yv in yticks:
        label = f"1e{int(yv)}" if logy else _fmt(yv)
        out.append(f'<text x="{MARGIN_L - 6}" y="{sy(yv) + 4:.1f}" text-anchor="end">{label}</text>')
        out.append(f'<line x1="{MARGIN_L}" x2="{MARGIN_L + pw}" y1="{sy(yv):.1f}" y2="{sy(yv):.1f}" '
                   f'stroke="#dddddd"/>')
    out.append(f'<text x="{MARGIN_L + pw / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{MARGIN_T + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MARGIN_T + ph / 2:.1f})">{ylabel}</text>')

    for k, (label, x, y) in enumerate(prepared):
        color = COLORS[k % len(COLORS)]
        dash = DASHES[k % len(DASHES)]
        if x.size:
            pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
            dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} points="{pts}"/>')
            if markers:
                out.extend(f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="3" fill="{color}"/>'
                           for a, b in zip(x, y))
        ly = MARGIN_T + 16 + 18 * k
        lx = MARGIN_L + pw + 10
        out.append(f'<line x1="{lx}" x2="{lx + 24}" y1="{ly - 4}" y2="{ly - 4}" stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{lx + 30}" y="{ly}">{label}</text>')
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path
