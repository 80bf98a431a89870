"""Minimal deterministic SVG line plots.

Hand-written polyline panels with a fixed viewBox so experiment figures are
dependency-free and byte-stable (golden-file testable). Coordinates are
formatted with fixed precision; no timestamps or random ids.
"""

from __future__ import annotations

from typing import Sequence

__all__ = ["Curve", "render_panel"]

WIDTH = 640
HEIGHT = 480
MARGIN_L = 60
MARGIN_R = 15
MARGIN_T = 40
MARGIN_B = 45

PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


class Curve:
    def __init__(self, xs: Sequence[float], ys: Sequence[float],
                 color: str, width: float = 1.0) -> None:
        if len(xs) != len(ys):
            raise ValueError("xs and ys lengths differ")
        self.xs = list(xs)
        self.ys = list(ys)
        self.color = color
        self.width = width


def _fmt(v: float) -> str:
    return "%.3f" % v


def render_panel(path, curves: Sequence[Curve], title: str,
                 x_range: tuple[float, float], y_range: tuple[float, float] = (0.0, 1.0),
                 x_ticks: Sequence[float] = (), y_ticks: Sequence[float] = ()) -> None:
    """Write one panel of polyline curves with axes and tick labels."""
    x0, x1 = x_range
    y0, y1 = y_range
    if not (x1 > x0 and y1 > y0):
        raise ValueError("ranges must be nonempty")
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(x: float) -> float:
        return MARGIN_L + (x - x0) / (x1 - x0) * plot_w

    def py(y: float) -> float:
        return HEIGHT - MARGIN_B - (y - y0) / (y1 - y0) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black" stroke-width="1"/>',
    ]
    for t in x_ticks:
        if not x0 <= t <= x1:
            continue
        xp = _fmt(px(t))
        yb = HEIGHT - MARGIN_B
        parts.append(f'<line x1="{xp}" y1="{yb}" x2="{xp}" y2="{yb + 5}" '
                     'stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{xp}" y="{yb + 18}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="11">{t:.3g}</text>')
    for t in y_ticks:
        if not y0 <= t <= y1:
            continue
        yp = _fmt(py(t))
        parts.append(f'<line x1="{MARGIN_L - 5}" y1="{yp}" x2="{MARGIN_L}" y2="{yp}" '
                     'stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{MARGIN_L - 8}" y="{yp}" text-anchor="end" '
                     f'dominant-baseline="middle" font-family="sans-serif" '
                     f'font-size="11">{t:.3g}</text>')
    for curve in curves:
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}"
                       for x, y in zip(curve.xs, curve.ys)
                       if x0 <= x <= x1)
        if pts:
            parts.append(f'<polyline points="{pts}" fill="none" '
                         f'stroke="{curve.color}" stroke-width="{curve.width:g}"/>')
    parts.append("</svg>")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(parts) + "\n")
