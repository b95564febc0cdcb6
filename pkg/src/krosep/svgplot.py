"""Minimal dependency-free SVG line plots.

CSV files are the machine-readable contract; these plots are a viewing
convenience (axes, optional log scales, legend).  Output is deterministic.
"""

from __future__ import annotations

import math
from pathlib import Path

_WIDTH, _HEIGHT = 640, 420
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 64, 16, 28, 44
_PALETTE = ("#1f5fa8", "#c44e52", "#55a868", "#8172b2", "#ccb974", "#64b5cd")


def _transform(value: float, log: bool) -> float | None:
    if log:
        if value <= 0:
            return None
        return math.log10(value)
    return value


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def _fmt(value: float, log: bool) -> str:
    v = 10.0 ** value if log else value
    return f"{v:.3g}"


def line_plot(path, series, *, title: str = "", xlabel: str = "", ylabel: str = "",
              logx: bool = False, logy: bool = False) -> None:
    """Write an SVG line plot.

    ``series`` is a list of ``(label, xs, ys)`` triples.  Non-positive
    values are dropped on log-scaled axes.
    """
    points = []
    for label, xs, ys in series:
        pts = []
        for x, y in zip(xs, ys):
            tx, ty = _transform(float(x), logx), _transform(float(y), logy)
            if tx is not None and ty is not None:
                pts.append((tx, ty))
        points.append((label, pts))

    all_x = [p[0] for _, pts in points for p in pts]
    all_y = [p[1] for _, pts in points for p in pts]
    if not all_x:
        all_x, all_y = [0.0, 1.0], [0.0, 1.0]
    x_lo, x_hi = min(all_x), max(all_x)
    y_lo, y_hi = min(all_y), max(all_y)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    pad_y = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad_y, y_hi + pad_y

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def px(x: float) -> float:
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return _MARGIN_T + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    axis = f'stroke="#333" stroke-width="1"'
    x0, y0 = _MARGIN_L, _MARGIN_T + plot_h
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}" {axis}/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{_MARGIN_T}" {axis}/>')

    for tx in _ticks(x_lo, x_hi):
        x = px(tx)
        out.append(f'<line x1="{x:.1f}" y1="{y0}" x2="{x:.1f}" y2="{y0 + 4}" {axis}/>')
        out.append(
            f'<text x="{x:.1f}" y="{y0 + 18}" font-size="11" text-anchor="middle" '
            f'font-family="sans-serif">{_fmt(tx, logx)}</text>'
        )
    for ty in _ticks(y_lo, y_hi):
        y = py(ty)
        out.append(f'<line x1="{x0 - 4}" y1="{y:.1f}" x2="{x0}" y2="{y:.1f}" {axis}/>')
        out.append(
            f'<text x="{x0 - 8}" y="{y + 4:.1f}" font-size="11" text-anchor="end" '
            f'font-family="sans-serif">{_fmt(ty, logy)}</text>'
        )

    for idx, (label, pts) in enumerate(points):
        if not pts:
            continue
        color = _PALETTE[idx % len(_PALETTE)]
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = _MARGIN_T + 14 + 16 * idx
        lx = _MARGIN_L + plot_w - 150
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{lx + 28}" y="{ly}" font-size="11" '
                   f'font-family="sans-serif">{label}</text>')

    if title:
        out.append(f'<text x="{_WIDTH / 2}" y="18" font-size="13" text-anchor="middle" '
                   f'font-family="sans-serif">{title}</text>')
    if xlabel:
        out.append(f'<text x="{_MARGIN_L + plot_w / 2}" y="{_HEIGHT - 10}" font-size="12" '
                   f'text-anchor="middle" font-family="sans-serif">{xlabel}</text>')
    if ylabel:
        out.append(
            f'<text x="14" y="{_MARGIN_T + plot_h / 2}" font-size="12" text-anchor="middle" '
            f'font-family="sans-serif" transform="rotate(-90 14 {_MARGIN_T + plot_h / 2})">'
            f'{ylabel}</text>'
        )
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
