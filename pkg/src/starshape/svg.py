"""Minimal static SVG overlays of a true shape and its estimate (planar only)."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import ParameterError
from .geometry import StarBoundary

__all__ = ["overlay_svg", "write_overlay_svg"]

TRUTH_STYLE = 'stroke="#1f4e9c" stroke-width="1.5" stroke-dasharray="6 4" fill="none"'
ESTIMATE_STYLE = 'stroke="#c62828" stroke-width="1.5" fill="none"'
AXIS_STYLE = 'stroke="#555555" stroke-width="0.75"'


def _closed(points: np.ndarray) -> np.ndarray:
    return np.vstack([points, points[:1]])


def overlay_svg(truth: StarBoundary, estimate: StarBoundary, scale: float = 1.0,
                title: str = "", size: int = 480) -> str:
    """SVG text with the truth (dashed) and the estimate (solid), both scaled
    by ``scale`` about the origin, over a pair of coordinate axes."""
    if truth.dimension != 2 or estimate.dimension != 2:
        raise ParameterError("overlays are drawn for planar shapes only")
    a = _closed(scale * truth.points)
    b = _closed(scale * estimate.points)
    extent = 1.1 * max(np.abs(a).max(), np.abs(b).max(), 1e-12)
    margin = 30.0
    k = (size - 2 * margin) / (2 * extent)

    def to_px(pts):
        x = margin + (pts[:, 0] + extent) * k
        y = margin + (extent - pts[:, 1]) * k
        return " ".join(f"{u:.2f},{v:.2f}" for u, v in zip(x, y))

    c = margin + extent * k
    lo, hi = margin, size - margin
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<line x1="{lo:.2f}" y1="{c:.2f}" x2="{hi:.2f}" y2="{c:.2f}" {AXIS_STYLE}/>',
        f'<line x1="{c:.2f}" y1="{lo:.2f}" x2="{c:.2f}" y2="{hi:.2f}" {AXIS_STYLE}/>',
        f'<text x="{hi:.2f}" y="{c - 4:.2f}" font-size="10" text-anchor="end">{extent:.3g}</text>',
        f'<polyline id="truth" points="{to_px(a)}" {TRUTH_STYLE}/>',
        f'<polyline id="estimate" points="{to_px(b)}" {ESTIMATE_STYLE}/>',
    ]
    if title:
        lines.append(f'<text x="{size / 2:.1f}" y="18" font-size="13" text-anchor="middle">'
                     f'{escape(title)}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_overlay_svg(path, truth: StarBoundary, estimate: StarBoundary, scale: float = 1.0,
                      title: str = "") -> Path:
    path = Path(path)
    path.write_text(overlay_svg(truth, estimate, scale, title))
    return path
