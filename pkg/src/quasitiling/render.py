"""Static SVG rendering of Z^2 tilings: one polygon per tile, colored by shape index."""

from __future__ import annotations

import colorsys
from typing import Optional

from shapely.geometry import box as cell
from shapely.ops import unary_union

from .errors import QuasitilingError
from .groups import Z2
from .tiling import WindowedTiling

SCALE = 8


class UnsupportedGroup(QuasitilingError):
    pass


def palette(k: int) -> str:
    """Deterministic color for shape index ``k`` (golden-angle hue walk)."""
    hue = (k * 0.6180339887498949) % 1.0
    r, g, b = colorsys.hsv_to_rgb(hue, 0.55, 0.92)
    return "#{:02x}{:02x}{:02x}".format(round(r * 255), round(g * 255), round(b * 255))


def tile_polygon(tile):
    """Union of the unit cells ``[a, a+1] x [b, b+1]`` of a tile."""
    return unary_union([cell(a, b, a + 1, b + 1) for a, b in sorted(tile)])


def _path(geom) -> str:
    parts = []
    polys = getattr(geom, "geoms", [geom])
    for poly in polys:
        for ring in [poly.exterior, *poly.interiors]:
            pts = [(x * SCALE, -y * SCALE) for x, y in ring.coords[:-1]]
            parts.append("M" + " L".join(f"{x:g},{y:g}" for x, y in pts) + " Z")
    return " ".join(parts)


def render_svg(wt: WindowedTiling, frame: Optional[tuple] = None) -> str:
    if wt.group is not Z2:
        raise UnsupportedGroup(f"rendering needs Z2, got {wt.group.tag}")
    tiles = wt.tiling.tile_sets()
    cells = [c for c in wt.window.members]
    for t in tiles.values():
        cells.extend(t)
    if frame is None:
        if cells:
            xs = [c[0] for c in cells]
            ys = [c[1] for c in cells]
            frame = (min(xs), min(ys), max(xs) + 1, max(ys) + 1)
        else:
            frame = (0, 0, 1, 1)
    x0, y0, x1, y1 = frame
    w, h = (x1 - x0) * SCALE, (y1 - y0) * SCALE
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0 * SCALE} {-y1 * SCALE} {w} {h}" '
        f'width="{w}" height="{h}">',
        f'<rect x="{x0 * SCALE}" y="{-y1 * SCALE}" width="{w}" height="{h}" '
        'fill="white" stroke="black" stroke-width="1"/>',
    ]
    for (k, c), tile in sorted(tiles.items()):
        geom = tile_polygon(tile)
        out.append(f'<path data-shape="{k}" data-center="{c[0]},{c[1]}" d="{_path(geom)}" '
                   f'fill="{palette(k)}" fill-opacity="0.7" fill-rule="evenodd" '
                   'stroke="black" stroke-width="0.5"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
