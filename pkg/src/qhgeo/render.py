"""Deterministic SVG drawings of domains, curves and witness points."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .geometry import Domain, Polyline

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22")
SIZE = 600
MARGIN = 20


def _fmt(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".") if v != 0 else "0"


class _Frame:
    def __init__(self, domain: Domain):
        xmin, ymin, xmax, ymax = domain.bbox
        span = max(xmax - xmin, ymax - ymin)
        self.scale = (SIZE - 2 * MARGIN) / span
        self.x0, self.y1 = xmin, ymax
        self.width = int(round(2 * MARGIN + (xmax - xmin) * self.scale))
        self.height = int(round(2 * MARGIN + (ymax - ymin) * self.scale))

    def points(self, pts) -> str:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        xs = MARGIN + (pts[:, 0] - self.x0) * self.scale
        ys = MARGIN + (self.y1 - pts[:, 1]) * self.scale
        return " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(xs, ys))


def render_svg(domain: Domain, curves=(), path=None, labels=None, witnesses=()) -> str:
    """SVG text for the domain boundary, slits, curves and witness points.

    Curves get distinct strokes from a fixed palette and a legend entry each.
    The output depends only on the inputs, so identical calls give identical
    bytes. When ``path`` is given the text is also written there.
    """
    fr = _Frame(domain)
    curves = [c.path if hasattr(c, "path") else c for c in curves]
    labels = list(labels) if labels is not None else [f"curve {i + 1}" for i in range(len(curves))]
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{fr.width}" height="{fr.height}" '
        f'viewBox="0 0 {fr.width} {fr.height}">',
        f"<title>{escape(domain.name)}</title>",
        '<rect width="100%" height="100%" fill="white"/>',
        f'<polygon points="{fr.points(domain.outer)}" fill="#f4f4f4" stroke="black" stroke-width="1.5"/>',
    ]
    for h in domain.holes:
        out.append(f'<polygon points="{fr.points(h)}" fill="white" stroke="black" stroke-width="1.5"/>')
    for s in domain.slits:
        out.append(f'<polyline points="{fr.points(s)}" fill="none" stroke="black" stroke-width="2"/>')
    for i, c in enumerate(curves):
        v = c.vertices if isinstance(c, Polyline) else np.asarray(c)
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<polyline points="{fr.points(v)}" fill="none" stroke="{color}" '
                   f'stroke-width="1.2"/>')
    for p in witnesses:
        xy = fr.points([p]).split(",")
        out.append(f'<circle cx="{xy[0]}" cy="{xy[1]}" r="4" fill="none" stroke="#d62728" '
                   f'stroke-width="2"/>')
    if curves:
        out.append('<g font-family="monospace" font-size="11">')
        for i, name in enumerate(labels[:len(curves)]):
            y = MARGIN + 14 * i
            color = PALETTE[i % len(PALETTE)]
            out.append(f'<line x1="{MARGIN}" y1="{y}" x2="{MARGIN + 16}" y2="{y}" stroke="{color}" '
                       f'stroke-width="2"/>')
            out.append(f'<text x="{MARGIN + 20}" y="{y + 4}">{escape(str(name))}</text>')
        out.append("</g>")
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
