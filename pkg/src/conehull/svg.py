"""Deterministic SVG rendering of planar tessellations, cells and polygons.

Byte-identical output for identical input: fixed viewbox, fixed float
formatting, no timestamps.
"""

from __future__ import annotations

import math

import numpy as np

VIEW = 1000.0


def _fmt(x: float) -> str:
    return f"{x:.6f}"


class SvgCanvas:
    """1000 x 1000 viewbox mapping the disc of a given radius."""

    def __init__(self, world_radius: float):
        self.world_radius = float(world_radius)
        self.parts: list[str] = []

    def _pt(self, x: float, y: float) -> tuple[float, float]:
        s = VIEW / (2.0 * self.world_radius)
        return (VIEW / 2.0 + x * s, VIEW / 2.0 - y * s)

    def circle(self, radius: float, stroke: str = "#444444") -> None:
        r = radius * VIEW / (2.0 * self.world_radius)
        self.parts.append(
            f'<circle cx="{_fmt(VIEW / 2)}" cy="{_fmt(VIEW / 2)}" r="{_fmt(r)}" '
            f'fill="none" stroke="{stroke}" stroke-width="1.5"/>'
        )

    def chord(self, direction, distance: float, stroke: str = "#1f77b4") -> None:
        """Line {<u, x> = t} clipped to the window circle."""
        u = np.asarray(direction, dtype=float)
        R = self.world_radius
        if abs(distance) >= R:
            return
        half = math.sqrt(R * R - distance * distance)
        tang = np.array([-u[1], u[0]])
        a = distance * u - half * tang
        b = distance * u + half * tang
        (x1, y1), (x2, y2) = self._pt(*a), self._pt(*b)
        self.parts.append(
            f'<path d="M {_fmt(x1)} {_fmt(y1)} L {_fmt(x2)} {_fmt(y2)}" '
            f'stroke="{stroke}" stroke-width="1" fill="none"/>'
        )

    def polygon(self, vertices, fill: str = "#ff7f0e", opacity: float = 0.55,
                stroke: str = "#333333") -> None:
        pts = " ".join(
            f"{_fmt(px)},{_fmt(py)}" for px, py in (self._pt(v[0], v[1]) for v in vertices)
        )
        self.parts.append(
            f'<polygon points="{pts}" fill="{fill}" fill-opacity="{opacity:.3f}" '
            f'stroke="{stroke}" stroke-width="1"/>'
        )

    def render(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_fmt(VIEW)} {_fmt(VIEW)}">\n'
            f'<rect width="{_fmt(VIEW)}" height="{_fmt(VIEW)}" fill="white"/>\n'
        )
        return head + "\n".join(self.parts) + "\n</svg>\n"


def render_svg(objects: list[dict], out_path: str, world_radius: float | None = None) -> str:
    """Write tessellation objects to an SVG file and return the markup.

    Objects are dicts: {"type": "circle", "radius": r}, {"type": "chord",
    "direction": [ux, uy], "distance": t}, or {"type": "polygon",
    "vertices": [[x, y], ...]}.
    """
    if world_radius is None:
        world_radius = 1.0
        for obj in objects:
            if obj["type"] == "circle":
                world_radius = max(world_radius, 1.1 * float(obj["radius"]))
            elif obj["type"] == "polygon":
                v = np.asarray(obj["vertices"], dtype=float)
                if len(v):
                    world_radius = max(world_radius, 1.2 * float(np.abs(v).max()))
    canvas = SvgCanvas(world_radius)
    for obj in objects:
        kind = obj["type"]
        if kind == "circle":
            canvas.circle(float(obj["radius"]), stroke=obj.get("stroke", "#444444"))
        elif kind == "chord":
            canvas.chord(obj["direction"], float(obj["distance"]),
                         stroke=obj.get("stroke", "#1f77b4"))
        elif kind == "polygon":
            canvas.polygon(obj["vertices"], fill=obj.get("fill", "#ff7f0e"))
        else:
            raise ValueError(f"unknown object type {kind!r}")
    markup = canvas.render()
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(markup)
    return markup
