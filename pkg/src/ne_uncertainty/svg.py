"""Minimal SVG output: polyline plots and categorical grid maps.

Linear axes, fixed margins, no plotting dependency.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 20, 50
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def _fmt(v):
    return f"{v:.2f}"


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


class _Frame:
    def __init__(self, xlim, ylim):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1.0
        self.w = WIDTH - LEFT - RIGHT
        self.h = HEIGHT - TOP - BOTTOM

    def px(self, x):
        return LEFT + (x - self.x0) / (self.x1 - self.x0) * self.w

    def py(self, y):
        return TOP + (1.0 - (y - self.y0) / (self.y1 - self.y0)) * self.h

    def axes(self, xlabel, ylabel):
        out = [
            f'<rect x="{LEFT}" y="{TOP}" width="{self.w}" height="{self.h}" fill="none" stroke="black"/>',
        ]
        for t in _ticks(self.x0, self.x1):
            x = self.px(t)
            out.append(f'<line x1="{_fmt(x)}" y1="{TOP + self.h}" x2="{_fmt(x)}" y2="{TOP + self.h + 5}" stroke="black"/>')
            out.append(f'<text x="{_fmt(x)}" y="{TOP + self.h + 18}" font-size="11" text-anchor="middle">{t:.3g}</text>')
        for t in _ticks(self.y0, self.y1):
            y = self.py(t)
            out.append(f'<line x1="{LEFT - 5}" y1="{_fmt(y)}" x2="{LEFT}" y2="{_fmt(y)}" stroke="black"/>')
            out.append(f'<text x="{LEFT - 8}" y="{_fmt(y + 4)}" font-size="11" text-anchor="end">{t:.3g}</text>')
        out.append(
            f'<text x="{LEFT + self.w / 2}" y="{HEIGHT - 10}" font-size="13" text-anchor="middle">{escape(xlabel)}</text>'
        )
        out.append(
            f'<text x="15" y="{TOP + self.h / 2}" font-size="13" text-anchor="middle" '
            f'transform="rotate(-90 15 {TOP + self.h / 2})">{escape(ylabel)}</text>'
        )
        return out


def _legend(names, colors, dashed=()):
    out = []
    for k, (name, color) in enumerate(zip(names, colors)):
        y = TOP + 15 + 20 * k
        x = WIDTH - RIGHT + 12
        dash = ' stroke-dasharray="5,3"' if name in dashed else ""
        out.append(f'<line x1="{x}" y1="{y}" x2="{x + 22}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{x + 28}" y="{y + 4}" font-size="12">{escape(name)}</text>')
    return out


def _document(body):
    head = f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">'
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *body, "</svg>"]) + "\n"


def line_plot(x, series, xlabel, ylabel, path, dashed=()):
    """``series`` maps a legend name to y values aligned with ``x``; NaN or
    None values break the line."""
    finite = [v for ys in series.values() for v in ys if v is not None and math.isfinite(v)]
    lo, hi = (min(finite), max(finite)) if finite else (0.0, 1.0)
    pad = 0.05 * (hi - lo or 1.0)
    frame = _Frame((min(x), max(x)), (lo - pad, hi + pad))
    body = frame.axes(xlabel, ylabel)
    colors = PALETTE[: len(series)]
    for (name, ys), color in zip(series.items(), colors):
        runs, run = [], []
        for xv, yv in zip(x, ys):
            if yv is None or not math.isfinite(yv):
                if run:
                    runs.append(run)
                run = []
            else:
                run.append(f"{_fmt(frame.px(xv))},{_fmt(frame.py(yv))}")
        if run:
            runs.append(run)
        dash = ' stroke-dasharray="5,3"' if name in dashed else ""
        for pts in runs:
            body.append(f'<polyline points="{" ".join(pts)}" fill="none" stroke="{color}" stroke-width="2"{dash}/>')
    body += _legend(list(series), colors, dashed)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_document(body))


def grid_map(xs, ys, labels, colors, xlabel, ylabel, path):
    """Colored cells; ``labels[i][j]`` is the category at (xs[j], ys[i])."""
    dx = (xs[1] - xs[0]) if len(xs) > 1 else 1.0
    dy = (ys[1] - ys[0]) if len(ys) > 1 else 1.0
    frame = _Frame((xs[0] - dx / 2, xs[-1] + dx / 2), (ys[0] - dy / 2, ys[-1] + dy / 2))
    body = []
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            color = colors.get(labels[i][j], "#ffffff")
            x0, x1 = frame.px(x - dx / 2), frame.px(x + dx / 2)
            y0, y1 = frame.py(y + dy / 2), frame.py(y - dy / 2)
            body.append(
                f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0)}" height="{_fmt(y1 - y0)}" fill="{color}"/>'
            )
    body += frame.axes(xlabel, ylabel)
    for k, (name, color) in enumerate(colors.items()):
        y = TOP + 10 + 20 * k
        x = WIDTH - RIGHT + 12
        body.append(f'<rect x="{x}" y="{y}" width="14" height="14" fill="{color}" stroke="black"/>')
        body.append(f'<text x="{x + 20}" y="{y + 11}" font-size="12">{escape(name)}</text>')
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_document(body))
