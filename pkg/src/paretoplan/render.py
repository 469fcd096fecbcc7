"""Cost-layer images with path overlays, as binary PGM or SVG.

Grid row 0 is the bottom of the map, so images are flipped vertically. In a
PGM, free cells are drawn in a mid-gray band, occupied cells at 0 and paths
at the extremes (0 for black styles, 255 for white). The SVG variant draws
cells as rectangles, elevation contours as ``<path>`` elements and one
``<polyline>`` per planned path.
"""
from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path as FsPath

import numpy as np
from skimage.measure import find_contours

from .exceptions import ConfigError
from .workspace import Workspace, risk_layer, solar_vector_at

LAYERS = ("occupancy+heuristic", "elevation-contour", "risk", "solar")
FORMATS = ("pgm", "svg")
STYLES = {
    "dashed-black": {"stroke": "black", "stroke-dasharray": "4 3"},
    "black": {"stroke": "black"},
    "white": {"stroke": "white"},
    "dotted-white": {"stroke": "white", "stroke-dasharray": "1 2"},
}
ALGORITHM_STYLES = {"astar": "dashed-black", "dstar": "black", "dstar_po": "white", "astar_po": "dotted-white"}
FREE_BAND = (40, 220)
CONTOUR_LEVELS = 8


@dataclass(frozen=True)
class RenderSpec:
    layer: str = "occupancy+heuristic"
    paths: tuple = ()  # (label, waypoints, style) triples
    output_format: str = "svg"
    scale: int = 6

    def __post_init__(self):
        if self.layer not in LAYERS:
            raise ConfigError(f"unknown layer {self.layer!r}; expected one of {LAYERS}")
        if self.output_format not in FORMATS:
            raise ConfigError(f"unknown format {self.output_format!r}; expected pgm or svg")
        if self.scale < 1:
            raise ConfigError("scale must be at least 1")
        for _, _, style in self.paths:
            if style not in STYLES:
                raise ConfigError(f"unknown path style {style!r}; expected one of {tuple(STYLES)}")


def default_style(algorithm: str) -> str:
    return ALGORITHM_STYLES.get(algorithm.replace("-", "_"), "black")


def layer_values(ws: Workspace, layer: str) -> np.ndarray:
    """The layer as an array in [0, 1] indexed like the grid; NaN marks occupied cells."""
    height, width = ws.shape
    rows, cols = np.mgrid[0:height, 0:width]
    if layer == "occupancy+heuristic":
        values = np.hypot(rows - ws.goal[0], cols - ws.goal[1])
    elif layer == "elevation-contour":
        values = ws.elevation.values.astype(float)
    elif layer == "risk":
        # Log scale; the raw inverse-square field is a single bright spot.
        values = np.log(risk_layer(ws.risk, ws.shape))
    elif layer == "solar":
        # Alignment of the initial sun with a straight run from each cell to the goal.
        sx, sy = solar_vector_at(ws.solar, 0)
        dx, dy = ws.goal[1] - cols, ws.goal[0] - rows
        norm = np.hypot(dx, dy)
        with np.errstate(invalid="ignore", divide="ignore"):
            values = np.where(norm > 0, (dx * sx + dy * sy) / norm, 0.0)
    else:
        raise ConfigError(f"unknown layer {layer!r}; expected one of {LAYERS}")
    lo, hi = values.min(), values.max()
    out = (values - lo) / (hi - lo) if hi > lo else np.zeros_like(values, dtype=float)
    out[ws.grid.cells == 1] = np.nan
    return out


def _gray(values: np.ndarray) -> np.ndarray:
    lo, hi = FREE_BAND
    g = np.where(np.isnan(values), 0, lo + np.nan_to_num(values) * (hi - lo))
    return np.rint(g).astype(np.uint8)


def render_pgm(ws: Workspace, spec: RenderSpec) -> bytes:
    k = spec.scale
    img = np.kron(_gray(layer_values(ws, spec.layer))[::-1], np.ones((k, k), dtype=np.uint8))
    h = img.shape[0]
    for _, waypoints, style in spec.paths:
        value = 255 if STYLES[style]["stroke"] == "white" else 0
        dashed = "stroke-dasharray" in STYLES[style]
        for (r0, c0), (r1, c1) in zip(waypoints, waypoints[1:]):
            n = 2 * k + 1
            for t in range(n):
                if dashed and (t // 2) % 2:
                    continue
                r = r0 + (r1 - r0) * t / (n - 1)
                c = c0 + (c1 - c0) * t / (n - 1)
                y = h - 1 - int(r * k + k // 2)
                x = int(c * k + k // 2)
                img[max(y - 1, 0):y + 1, max(x - 1, 0):x + 1] = value
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    return header + img.tobytes()


def _contour_paths(ws: Workspace, k: int) -> list[str]:
    values = ws.elevation.values
    if np.ptp(values) == 0:
        return []
    h = ws.height * k
    out = []
    for level in np.linspace(0, 1, CONTOUR_LEVELS + 2)[1:-1]:
        for line in find_contours(values, level):
            if len(line) < 2:
                continue
            pts = [f"{c * k + k / 2:.1f},{h - (r * k + k / 2):.1f}" for r, c in line]
            out.append(f"M {pts[0]} L " + " ".join(pts[1:]))
    return out


def render_svg(ws: Workspace, spec: RenderSpec) -> str:
    k = spec.scale
    height, width = ws.shape
    h_px, w_px = height * k, width * k
    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(w_px), height=str(h_px),
                     viewBox=f"0 0 {w_px} {h_px}")
    cells = ET.SubElement(svg, "g", id="layer", attrib={"data-layer": spec.layer})
    gray = _gray(layer_values(ws, spec.layer))
    for r in range(height):
        for c in range(width):
            v = int(gray[r, c])
            ET.SubElement(cells, "rect", x=str(c * k), y=str(h_px - (r + 1) * k), width=str(k), height=str(k),
                          fill=f"rgb({v},{v},{v})")
    if spec.layer == "elevation-contour":
        contours = ET.SubElement(svg, "g", id="contours", fill="none", stroke="#806040",
                                 attrib={"stroke-width": "0.8"})
        for d in _contour_paths(ws, k):
            ET.SubElement(contours, "path", d=d)
    if spec.layer == "solar":
        _solar_arrows(svg, ws, spec, k, h_px)
    paths = ET.SubElement(svg, "g", id="paths", fill="none", attrib={"stroke-width": str(max(1.0, k / 3))})
    for label, waypoints, style in spec.paths:
        pts = " ".join(f"{c * k + k / 2:g},{h_px - (r * k + k / 2):g}" for r, c in waypoints)
        attrs = {"points": pts, "data-label": label}
        attrs.update(STYLES[style])
        ET.SubElement(paths, "polyline", attrib=attrs)
    for at, color, name in ((ws.start, "red", "start"), (ws.goal, "green", "goal")):
        ET.SubElement(svg, "rect", id=name, x=str(at[1] * k), y=str(h_px - (at[0] + 1) * k),
                      width=str(k), height=str(k), fill=color)
    return ET.tostring(svg, encoding="unicode", xml_declaration=True) + "\n"


def _solar_arrows(svg, ws, spec, k, h_px):
    """Sun direction at the start and, per path, at its final step."""
    arrows = ET.SubElement(svg, "g", id="solar", stroke="orange", attrib={"stroke-width": "2"})
    marks = [(ws.start, 0)] + [(ws.goal, len(wp) - 1) for _, wp, _ in spec.paths]
    length = 4 * k
    for at, step in marks:
        sx, sy = solar_vector_at(ws.solar, step)
        x0, y0 = at[1] * k + k / 2, h_px - (at[0] * k + k / 2)
        ET.SubElement(arrows, "line", x1=f"{x0:g}", y1=f"{y0:g}",
                      x2=f"{x0 + length * sx:.2f}", y2=f"{y0 - length * sy:.2f}")


def render(ws: Workspace, spec: RenderSpec, out) -> FsPath:
    out = FsPath(out)
    if spec.output_format == "pgm":
        out.write_bytes(render_pgm(ws, spec))
    else:
        out.write_text(render_svg(ws, spec))
    return out


def format_for(path) -> str:
    suffix = FsPath(path).suffix.lower().lstrip(".")
    if suffix not in FORMATS:
        raise ConfigError(f"cannot infer image format from {str(path)!r}; use .pgm or .svg")
    return suffix


__all__ = ["LAYERS", "RenderSpec", "default_style", "layer_values", "render", "render_pgm", "render_svg"]
