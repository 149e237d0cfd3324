"""Minimal SVG line plots.

Fixed 640x480 canvas with a 56px margin. Data coordinates are mapped
affinely onto the plot area with 5% padding on each side; the y axis points
up. Numbers are written with 2 decimals so files are stable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT, MARGIN = 640, 480, 56
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    markers: bool = False


@dataclass
class Figure:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    series: list = field(default_factory=list)
    vlines: list = field(default_factory=list)  # (x, label)
    points: list = field(default_factory=list)  # (x, y, label)

    def line(self, label, x, y, markers: bool = False) -> "Figure":
        self.series.append(Series(label, np.asarray(x, float), np.asarray(y, float), markers))
        return self

    def bounds(self):
        xs = [s.x for s in self.series] + [np.array([v for v, _ in self.vlines])]
        ys = [s.y for s in self.series]
        xs += [np.array([p[0] for p in self.points])]
        ys += [np.array([p[1] for p in self.points])]
        x = np.concatenate([a[np.isfinite(a)] for a in xs if a.size] or [np.zeros(1)])
        y = np.concatenate([a[np.isfinite(a)] for a in ys if a.size] or [np.zeros(1)])
        x0, x1, y0, y1 = x.min(), x.max(), y.min(), y.max()
        if x1 == x0:
            x0, x1 = x0 - 1, x1 + 1
        if y1 == y0:
            y0, y1 = y0 - 1, y1 + 1
        px, py = 0.05 * (x1 - x0), 0.05 * (y1 - y0)
        return x0 - px, x1 + px, y0 - py, y1 + py

    def render(self) -> str:
        x0, x1, y0, y1 = self.bounds()
        w, h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

        def X(v):
            return MARGIN + (v - x0) / (x1 - x0) * w

        def Y(v):
            return HEIGHT - MARGIN - (v - y0) / (y1 - y0) * h

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<rect x="{MARGIN}" y="{MARGIN}" width="{w}" height="{h}" fill="none" stroke="black"/>',
        ]
        for t in np.linspace(0, 1, 5):
            xv, yv = x0 + t * (x1 - x0), y0 + t * (y1 - y0)
            out.append(f'<text x="{X(xv):.2f}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle">{xv:.3g}</text>')
            out.append(f'<text x="{MARGIN - 6}" y="{Y(yv) + 4:.2f}" text-anchor="end">{yv:.3g}</text>')
        if self.title:
            out.append(f'<text x="{WIDTH / 2:.2f}" y="{MARGIN - 20}" text-anchor="middle" font-size="14">{escape(self.title)}</text>')
        if self.xlabel:
            out.append(f'<text x="{WIDTH / 2:.2f}" y="{HEIGHT - 14}" text-anchor="middle">{escape(self.xlabel)}</text>')
        if self.ylabel:
            out.append(
                f'<text x="16" y="{HEIGHT / 2:.2f}" text-anchor="middle" transform="rotate(-90 16 {HEIGHT / 2:.2f})">'
                f"{escape(self.ylabel)}</text>"
            )
        for v, label in self.vlines:
            out.append(
                f'<line class="stratum" x1="{X(v):.2f}" y1="{MARGIN}" x2="{X(v):.2f}" y2="{HEIGHT - MARGIN}" '
                'stroke="gray" stroke-dasharray="6,4"/>'
            )
            out.append(f'<text x="{X(v) + 4:.2f}" y="{MARGIN + 14}" fill="gray">{escape(label)}</text>')
        for i, s in enumerate(self.series):
            color = PALETTE[i % len(PALETTE)]
            ok = np.isfinite(s.x) & np.isfinite(s.y)
            pts = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(s.x[ok], s.y[ok]))
            out.append(f'<polyline class="series" data-label="{escape(s.label)}" points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
            if s.markers:
                for a, b in zip(s.x[ok], s.y[ok]):
                    out.append(f'<circle cx="{X(a):.2f}" cy="{Y(b):.2f}" r="2" fill="{color}"/>')
            ly = MARGIN + 16 + 16 * i
            out.append(f'<line x1="{WIDTH - MARGIN - 120}" y1="{ly - 4}" x2="{WIDTH - MARGIN - 100}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{WIDTH - MARGIN - 96}" y="{ly}">{escape(s.label)}</text>')
        for a, b, label in self.points:
            out.append(f'<circle class="marker" cx="{X(a):.2f}" cy="{Y(b):.2f}" r="4" fill="black"/>')
            out.append(f'<text x="{X(a) + 6:.2f}" y="{Y(b) - 6:.2f}">{escape(label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.render())
