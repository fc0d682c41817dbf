# ===== IMPORTS & DEPENDENCIES =====
import logging
import os
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from lxml import etree

from src.config import (
    SVG_BACKGROUND, SVG_BOX_COLOR, SVG_BROKEN_LINE_COLOR, SVG_CUT_COLOR, SVG_HEIGHT, SVG_MARGIN,
    SVG_ORDER_PALETTE, SVG_SINGULARITY_COLOR, SVG_WIDTH,
)
from src.core.lattice import IntVec2, RatPoint
from src.scattering.diagram import ScatteringDiagram

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

SVG_NS = "http://www.w3.org/2000/svg"

# ===== UTILITY FUNCTIONS =====

def ray_color(min_grade: int) -> str:
    index = max(min_grade - 1, 0)
    return SVG_ORDER_PALETTE[min(index, len(SVG_ORDER_PALETTE) - 1)]


def _to_box_edge(q: RatPoint, d: IntVec2, radius: int) -> RatPoint:
    limits = []
    for coord, step in ((q.x, d.a), (q.y, d.b)):
        if step > 0:
            limits.append((radius - coord) / step)
        elif step < 0:
            limits.append((-radius - coord) / step)
    t = min(limits) if limits else Fraction(0)
    return q.shifted(d, t)


class _Canvas:
    """Maps the box [-R, R]^2 onto pixels, y pointing up."""

    def __init__(self, radius: int, width: int, height: int):
        self.radius = radius
        self.width = width
        self.height = height
        self.root = etree.Element(f"{{{SVG_NS}}}svg", nsmap={None: SVG_NS},
                                  width=str(width), height=str(height), viewBox=f"0 0 {width} {height}")
        etree.SubElement(self.root, f"{{{SVG_NS}}}rect", x="0", y="0", width=str(width), height=str(height),
                         fill=SVG_BACKGROUND)

    def xy(self, q: RatPoint) -> Tuple[str, str]:
        span = 2 * self.radius
        sx = SVG_MARGIN + float(q.x + self.radius) / span * (self.width - 2 * SVG_MARGIN)
        sy = SVG_MARGIN + float(self.radius - q.y) / span * (self.height - 2 * SVG_MARGIN)
        return f"{sx:.2f}", f"{sy:.2f}"

    def group(self, name: str) -> etree._Element:
        return etree.SubElement(self.root, f"{{{SVG_NS}}}g", id=name)

    def line(self, parent, a: RatPoint, b: RatPoint, color: str, width: str = "1", dashed: bool = False, **attrs):
        (x1, y1), (x2, y2) = self.xy(a), self.xy(b)
        el = etree.SubElement(parent, f"{{{SVG_NS}}}line", x1=x1, y1=y1, x2=x2, y2=y2,
                              stroke=color, **{"stroke-width": width})
        if dashed:
            el.set("stroke-dasharray", "4,3")
        for key, value in attrs.items():
            el.set(key.replace("_", "-"), str(value))
        return el

# ===== CORE BUSINESS LOGIC =====

def render_diagram(diagram: ScatteringDiagram, broken_lines: Optional[Sequence] = None,
                   width: int = SVG_WIDTH, height: int = SVG_HEIGHT) -> bytes:
    """SVG of the box, the cuts, the singular points and every ray, coloured by lowest grade."""
    base = diagram.base
    canvas = _Canvas(base.radius, width, height)
    r = base.radius

    box = canvas.group("box")
    corners = [RatPoint.of(-r, -r), RatPoint.of(r, -r), RatPoint.of(r, r), RatPoint.of(-r, r)]
    for a, b in zip(corners, corners[1:] + corners[:1]):
        canvas.line(box, a, b, SVG_BOX_COLOR)

    cuts = canvas.group("cuts")
    for s in base.singularities:
        for d in (s.cut_plus, s.cut_minus):
            canvas.line(cuts, s.position, _to_box_edge(s.position, d, r), SVG_CUT_COLOR, dashed=True,
                        data_singularity=s.name)

    rays = canvas.group("rays")
    for ray in sorted(diagram.rays, key=lambda x: x.id):
        color = ray_color(ray.min_grade)
        for seg in ray.support.segments:
            canvas.line(rays, seg.start, seg.end, color, width="1.5", data_ray=ray.id, data_grade=ray.min_grade)

    if broken_lines:
        lines = canvas.group("broken-lines")
        for line in broken_lines:
            for seg in line.segments:
                canvas.line(lines, seg.start, seg.end, SVG_BROKEN_LINE_COLOR, width="2",
                            data_asymptote=line.asymptote)

    points = canvas.group("singularities")
    for s in base.singularities:
        cx, cy = canvas.xy(s.position)
        etree.SubElement(points, f"{{{SVG_NS}}}circle", cx=cx, cy=cy, r="4", fill=SVG_SINGULARITY_COLOR,
                         id=f"singularity-{s.name}")

    logger.debug(f"[render_diagram] {len(diagram.rays)} rays, {len(base.singularities)} singularities")
    return etree.tostring(canvas.root, pretty_print=True, xml_declaration=True, encoding="utf-8")


def write_svg(diagram: ScatteringDiagram, path: str, broken_lines: Optional[List] = None,
              width: int = SVG_WIDTH, height: int = SVG_HEIGHT) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "wb") as f:
        f.write(render_diagram(diagram, broken_lines, width, height))
    logger.info(f"💾 [write_svg] Saved {path}")
