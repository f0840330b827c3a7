"""Deterministic SVG pictures of stochastic matrices.

``Tetrahedron3D`` draws the columns of a 4-row matrix as points of the
3-simplex under a fixed isometric camera.  ``Plane2D`` draws the rank-3
nested-polygon picture: the section polygon, the column points and, when
given, a nested triangle.
"""

from __future__ import annotations

import enum
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import BadMode, NNRankError
from .matcore import Matrix, to_stochastic
from .simplexgeo import NestedInstance, section_polygon

DIGITS = 3
MARGIN = 36
SVG_NS = "{http://www.w3.org/2000/svg}"


class Mode(str, enum.Enum):
    TETRAHEDRON = "Tetrahedron3D"
    PLANE = "Plane2D"


@dataclass(frozen=True)
class RenderSpec:
    mode: Mode
    input: Union[Matrix, NestedInstance]
    width: int = 480
    height: int = 480
    drop_coordinate: Optional[int] = None  # default: last
    witness: Optional[tuple] = None  # polygon in chart coordinates (Plane2D)

    def __post_init__(self):
        try:
            object.__setattr__(self, "mode", Mode(self.mode))
        except ValueError:
            raise BadMode(f"unknown render mode {self.mode!r}") from None
        if self.width <= 2 * MARGIN or self.height <= 2 * MARGIN:
            raise BadMode(f"canvas must exceed {2 * MARGIN} pixels per side")


def _num(x: float) -> str:
    s = f"{x:.{DIGITS}f}"
    return "0.000" if s == "-0.000" else s


def _fit(pts: np.ndarray, width: int, height: int):
    """Uniform scale + translation taking ``pts`` into the canvas, y flipped."""
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    s = min((width - 2 * MARGIN) / span[0], (height - 2 * MARGIN) / span[1])
    mid = (lo + hi) / 2

    def to_px(p):
        p = np.asarray(p, dtype=float)
        return (width / 2 + s * (p[..., 0] - mid[0]), height / 2 - s * (p[..., 1] - mid[1]))

    return to_px


class _Doc:
    def __init__(self, width: int, height: int, title: str):
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">',
            f"<title>{title}</title>",
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        ]

    def add(self, s: str):
        self.parts.append(s)

    def polygon(self, xs, ys, **attrs):
        pts = " ".join(f"{_num(x)},{_num(y)}" for x, y in zip(xs, ys))
        self.add(f'<polygon points="{pts}"{_attrs(attrs)}/>')

    def line(self, a, b, **attrs):
        self.add(
            f'<line x1="{_num(a[0])}" y1="{_num(a[1])}" x2="{_num(b[0])}" y2="{_num(b[1])}"{_attrs(attrs)}/>'
        )

    def point(self, x, y, label: str, **attrs):
        self.add(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="4"{_attrs(attrs)}/>')
        self.add(f'<text x="{_num(x + 6)}" y="{_num(y - 6)}" font-size="12">{label}</text>')

    def text(self) -> str:
        return "\n".join(self.parts + ["</svg>", ""])


def _attrs(attrs: dict) -> str:
    return "".join(f' {k.rstrip("_").replace("_", "-")}="{v}"' for k, v in attrs.items())


def _isometric(xyz: np.ndarray) -> np.ndarray:
    c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    return np.stack([(x - y) * c, z - (x + y) * s], axis=-1)


def _tetrahedron(spec: RenderSpec) -> str:
    P = spec.input
    if not isinstance(P, Matrix) or P.rows != 4:
        raise BadMode("Tetrahedron3D needs a matrix with 4 rows")
    d = 3 if spec.drop_coordinate is None else spec.drop_coordinate
    if not 0 <= d < 4:
        raise BadMode(f"drop_coordinate must lie in 0..3, got {d}")
    S = to_stochastic(P).to_numpy()
    pts3 = np.delete(S, d, axis=0).T
    verts3 = np.vstack([np.zeros(3), np.eye(3)])
    verts, pts = _isometric(verts3), _isometric(pts3)
    to_px = _fit(np.vstack([verts, pts]), spec.width, spec.height)
    vx, vy = to_px(verts)
    px, py = to_px(pts)
    doc = _Doc(spec.width, spec.height, "columns in the 3-simplex")
    doc.add('<g id="simplex" stroke="#555" stroke-width="1">')
    for i in range(4):
        for j in range(i + 1, 4):
            doc.line((vx[i], vy[i]), (vx[j], vy[j]))
    doc.add("</g>")
    doc.add('<g id="columns" fill="#1f5fa8">')
    for j in range(len(px)):
        doc.point(px[j], py[j], f"c_{j + 1}", class_="column", id=f"c_{j + 1}")
    doc.add("</g>")
    return doc.text()


def _plane_frame(inst: NestedInstance):
    """Orthonormal float coordinates on the section plane, centred on the outer barycentre."""
    lift = lambda p: np.array([float(v) for v in inst.chart.lift(p)])  # noqa: E731
    outer = np.array([lift(p) for p in inst.outer])
    origin = outer.mean(axis=0)
    q, _ = np.linalg.qr(np.stack([lift((1, 0)) - lift((0, 0)), lift((0, 1)) - lift((0, 0))], axis=1))
    return lambda p: (lift(p) - origin) @ q


def _plane(spec: RenderSpec) -> str:
    inst = spec.input
    if isinstance(inst, Matrix):
        try:
            inst = section_polygon(to_stochastic(inst))
        except NNRankError as e:
            raise BadMode(f"Plane2D needs a rank-3 matrix: {e}") from None
    frame = _plane_frame(inst)
    outer = np.array([frame(p) for p in inst.outer])
    inner = np.array([frame(p) for p in inst.inner])
    to_px = _fit(outer, spec.width, spec.height)
    doc = _Doc(spec.width, spec.height, "nested polygon picture")
    ox, oy = to_px(outer)
    doc.polygon(ox, oy, id="outer", fill="#eef2f7", stroke="#555", stroke_width="1")
    if spec.witness is not None:
        w = np.array([frame(p) for p in spec.witness])
        wx, wy = to_px(w)
        doc.polygon(wx, wy, id="witness", fill="none", stroke="#c0392b", stroke_width="1.5")
    ix, iy = to_px(inner)
    doc.add('<g id="inner" fill="#1f5fa8">')
    for j in range(len(ix)):
        doc.point(ix[j], iy[j], f"c_{j + 1}", class_="inner", id=f"c_{j + 1}")
    doc.add("</g>")
    return doc.text()


def render_svg(spec: RenderSpec) -> str:
    if spec.mode is Mode.TETRAHEDRON:
        return _tetrahedron(spec)
    return _plane(spec)


def svg_points(svg: str, cls: str) -> list:
    """Read back ``(cx, cy)`` of every circle with the given class."""
    root = ET.fromstring(svg.encode())
    return [(float(c.get("cx")), float(c.get("cy"))) for c in root.iter(f"{SVG_NS}circle") if c.get("class") == cls]


def svg_polygon(svg: str, pid: str) -> Optional[list]:
    root = ET.fromstring(svg.encode())
    for p in root.iter(f"{SVG_NS}polygon"):
        if p.get("id") == pid:
            return [tuple(map(float, xy.split(","))) for xy in p.get("points").split()]
    return None


def pixel_polygon_contains(poly: Sequence, pts: Sequence, tol: float = 0.01) -> bool:
    """Containment test in SVG pixel space, either orientation, ``tol`` in pixels."""

    def cross(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    area = cross(*poly[:3])
    sgn = 1 if area > 0 else -1
    n = len(poly)
    for z in pts:
        for i in range(n):
            a, b = poly[i], poly[(i + 1) % n]
            # signed distance of z from edge ab, positive inside
            dist = sgn * cross(a, b, z) / math.hypot(b[0] - a[0], b[1] - a[1])
            if dist < -tol:
                return False
    return True
