"""Minimal SVG polyline emitter for curve traces.

No plotting dependency: figures are regenerable from the CSV output, the SVG
is just a quick visual check of spirals and traces.
"""

from __future__ import annotations

__all__ = ["polyline_svg", "write_polyline_svg"]

_TEMPLATE = """\
<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="{vb}">
  <rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="white"/>
  <polyline points="{points}" fill="none" stroke="#1f3a6e" stroke-width="{stroke}"/>
</svg>
"""


def polyline_svg(points, size: int = 600, pad_fraction: float = 0.05) -> str:
    """Render a 2D polyline, y axis up, viewport fitted to the data."""
    pts = [(float(p[0]), float(p[1])) for p in points]
    if not pts:
        raise ValueError("no points to render")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    xmin, xmax = min(xs), max(xs)
    ymin, ymax = min(ys), max(ys)
    span = max(xmax - xmin, ymax - ymin, 1e-9)
    pad = pad_fraction * span
    x0 = xmin - pad
    y0 = -(ymax + pad)  # SVG y grows downward; flip by negating
    w = (xmax - xmin) + 2 * pad
    h = (ymax - ymin) + 2 * pad
    chunks = [f"{x:.6g},{-y:.6g}" for x, y in pts]
    return _TEMPLATE.format(
        size=size,
        vb=f"{x0:.6g} {y0:.6g} {w:.6g} {h:.6g}",
        x0=f"{x0:.6g}", y0=f"{y0:.6g}", w=f"{w:.6g}", h=f"{h:.6g}",
        points=" ".join(chunks),
        stroke=f"{span / 400.0:.6g}",
    )


def write_polyline_svg(path, points, size: int = 600) -> None:
    with open(path, "w") as fh:
        fh.write(polyline_svg(points, size=size))
