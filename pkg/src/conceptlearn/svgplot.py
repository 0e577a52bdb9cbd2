"""Tiny deterministic SVG writer for run reports.

Matplotlib pulls in font caches, timestamps and platform-dependent
rasterization; these few primitives cover everything the reports need
(line charts, scatters, heatmaps, small multiples of paths) while keeping
output byte-stable: fixed decimal formatting, no timestamps, no ids.
"""

from __future__ import annotations

import numpy as np

PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939",
    "#8c6d31", "#843c39", "#7b4173", "#3182bd", "#e6550d", "#31a354",
    "#756bb1", "#636363", "#9c9ede", "#cedb9c", "#e7cb94", "#e7969c",
    "#de9ed6", "#9edae5",
]


def _f(x: float) -> str:
    return f"{float(x):.3f}"


def _esc(s: str) -> str:
    return (str(s).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;").replace('"', "&quot;"))


class Canvas:
    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.parts = []

    def rect(self, x, y, w, h, fill="none", stroke="none", stroke_width=1.0):
        self.parts.append(
            f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(h)}" '
            f'fill="{fill}" stroke="{stroke}" stroke-width="{_f(stroke_width)}"/>')

    def line(self, x1, y1, x2, y2, stroke="#000000", stroke_width=1.0):
        self.parts.append(
            f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}" '
            f'stroke="{stroke}" stroke-width="{_f(stroke_width)}"/>')

    def polyline(self, points, stroke="#1f77b4", stroke_width=1.5):
        pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in points)
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{stroke}" '
            f'stroke-width="{_f(stroke_width)}"/>')

    def circle(self, x, y, r, fill="#1f77b4"):
        self.parts.append(
            f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(r)}" fill="{fill}"/>')

    def text(self, x, y, s, size=11, anchor="start", fill="#000000"):
        self.parts.append(
            f'<text x="{_f(x)}" y="{_f(y)}" font-size="{size}" '
            f'font-family="sans-serif" text-anchor="{anchor}" '
            f'fill="{fill}">{_esc(s)}</text>')

    def render(self) -> str:
        body = "\n".join(self.parts)
        return (f'<svg xmlns="http://www.w3.org/2000/svg" '
                f'width="{self.width}" height="{self.height}" '
                f'viewBox="0 0 {self.width} {self.height}">\n'
                f'{body}\n</svg>\n')

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.render())


class Axes:
    """Maps data coordinates into a pixel box (y axis flipped)."""

    def __init__(self, canvas, box, xlim, ylim):
        self.canvas = canvas
        self.x0, self.y0, self.w, self.h = box
        span_x = xlim[1] - xlim[0] or 1.0
        span_y = ylim[1] - ylim[0] or 1.0
        self.xlim = (xlim[0], xlim[0] + span_x)
        self.ylim = (ylim[0], ylim[0] + span_y)

    def px(self, x):
        return self.x0 + (x - self.xlim[0]) / (self.xlim[1] - self.xlim[0]) * self.w

    def py(self, y):
        return self.y0 + self.h - (y - self.ylim[0]) / (self.ylim[1] - self.ylim[0]) * self.h

    def frame(self):
        self.canvas.rect(self.x0, self.y0, self.w, self.h, stroke="#333333")

    def ticks(self, xticks, yticks, fmt="{:g}"):
        for t in xticks:
            x = self.px(t)
            self.canvas.line(x, self.y0 + self.h, x, self.y0 + self.h + 4,
                             stroke="#333333")
            self.canvas.text(x, self.y0 + self.h + 16, fmt.format(t),
                             size=10, anchor="middle")
        for t in yticks:
            y = self.py(t)
            self.canvas.line(self.x0 - 4, y, self.x0, y, stroke="#333333")
            self.canvas.text(self.x0 - 6, y + 3, fmt.format(t),
                             size=10, anchor="end")


def _limits(values, pad=0.05):
    values = np.asarray(values, dtype=float)
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi == lo:
        hi = lo + 1.0
    margin = (hi - lo) * pad
    return lo - margin, hi + margin


def line_chart(path, series, title="", xlabel="", ylabel="",
               width=640, height=400):
    """series: list of (name, xs, ys)."""
    cv = Canvas(width, height)
    cv.rect(0, 0, width, height, fill="#ffffff")
    box = (60, 40, width - 90, height - 90)
    all_x = np.concatenate([np.asarray(xs, dtype=float) for _, xs, _ in series])
    all_y = np.concatenate([np.asarray(ys, dtype=float) for _, _, ys in series])
    ax = Axes(cv, box, _limits(all_x, 0.02), _limits(all_y))
    ax.frame()
    xt = np.linspace(ax.xlim[0], ax.xlim[1], 5)
    yt = np.linspace(ax.ylim[0], ax.ylim[1], 5)
    ax.ticks(xt, yt, fmt="{:.2f}")
    for k, (name, xs, ys) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        pts = [(ax.px(x), ax.py(y)) for x, y in zip(xs, ys)]
        cv.polyline(pts, stroke=color)
        cv.text(box[0] + box[2] - 4, box[1] + 16 + 14 * k, name,
                size=11, anchor="end", fill=color)
    cv.text(width / 2, 22, title, size=14, anchor="middle")
    cv.text(width / 2, height - 10, xlabel, size=11, anchor="middle")
    cv.text(14, height / 2, ylabel, size=11, anchor="middle")
    cv.save(path)


def scatter_chart(path, groups, title="", width=640, height=520):
    """groups: list of (name, xs, ys); one color per group with legend."""
    cv = Canvas(width, height)
    cv.rect(0, 0, width, height, fill="#ffffff")
    box = (50, 40, width - 220, height - 80)
    all_x = np.concatenate([np.asarray(xs, dtype=float) for _, xs, _ in groups])
    all_y = np.concatenate([np.asarray(ys, dtype=float) for _, _, ys in groups])
    ax = Axes(cv, box, _limits(all_x), _limits(all_y))
    ax.frame()
    for k, (name, xs, ys) in enumerate(groups):
        color = PALETTE[k % len(PALETTE)]
        for x, y in zip(xs, ys):
            cv.circle(ax.px(x), ax.py(y), 3.2, fill=color)
        lx = box[0] + box[2] + 16
        ly = box[1] + 10 + 16 * k
        cv.circle(lx, ly - 3, 3.2, fill=color)
        cv.text(lx + 8, ly, name, size=10)
    cv.text(width / 2, 22, title, size=14, anchor="middle")
    cv.save(path)


def heatmap(path, matrix, row_labels, col_labels, title="",
            cell=18, value_fmt=None):
    matrix = np.asarray(matrix, dtype=float)
    n_rows, n_cols = matrix.shape
    left, top = 110, 110
    width = left + n_cols * cell + 30
    height = top + n_rows * cell + 30
    cv = Canvas(width, height)
    cv.rect(0, 0, width, height, fill="#ffffff")
    vmax = float(np.max(matrix)) or 1.0
    for r in range(n_rows):
        for c in range(n_cols):
            frac = matrix[r, c] / vmax
            shade = int(round(255 - 205 * frac))
            color = f"#{shade:02x}{shade:02x}ff" if frac > 0 else "#ffffff"
            cv.rect(left + c * cell, top + r * cell, cell, cell,
                    fill=color, stroke="#dddddd", stroke_width=0.5)
            if value_fmt and matrix[r, c] != 0:
                cv.text(left + c * cell + cell / 2,
                        top + r * cell + cell / 2 + 3,
                        value_fmt.format(matrix[r, c]), size=6,
                        anchor="middle")
    for r, lab in enumerate(row_labels):
        cv.text(left - 6, top + r * cell + cell / 2 + 3, lab,
                size=8, anchor="end")
    for c, lab in enumerate(col_labels):
        x = left + c * cell + cell / 2
        y = top - 6
        cv.parts.append(
            f'<text x="{_f(x)}" y="{_f(y)}" font-size="8" '
            f'font-family="sans-serif" text-anchor="start" '
            f'transform="rotate(-60 {_f(x)} {_f(y)})">{_esc(lab)}</text>')
    cv.text(width / 2, 20, title, size=14, anchor="middle")
    cv.save(path)


def path_grid(path, named_paths, columns=6, tile=120, title=""):
    """Small multiples of 2-D paths: list of (name, (n, 2) array)."""
    n = len(named_paths)
    columns = max(1, min(columns, n))
    rows = (n + columns - 1) // columns
    width = columns * tile + 20
    height = rows * tile + 50
    cv = Canvas(width, height)
    cv.rect(0, 0, width, height, fill="#ffffff")
    for k, (name, pts) in enumerate(named_paths):
        pts = np.asarray(pts, dtype=float)
        r, c = divmod(k, columns)
        x0 = 10 + c * tile
        y0 = 40 + r * tile
        box = (x0 + 6, y0 + 16, tile - 12, tile - 26)
        cv.rect(x0 + 2, y0 + 2, tile - 4, tile - 4, stroke="#cccccc")
        cv.text(x0 + tile / 2, y0 + 13, name, size=9, anchor="middle")
        if len(pts) >= 2:
            ax = Axes(cv, box, _limits(pts[:, 0]), _limits(pts[:, 1]))
            line = [(ax.px(x), ax.py(y)) for x, y in pts]
            cv.polyline(line, stroke=PALETTE[k % len(PALETTE)], stroke_width=1.2)
            cv.circle(ax.px(pts[0, 0]), ax.py(pts[0, 1]), 2.5, fill="#000000")
    cv.text(width / 2, 20, title, size=14, anchor="middle")
    cv.save(path)
