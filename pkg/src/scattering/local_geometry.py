# ===== IMPORTS & DEPENDENCIES =====
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Set, Tuple

from src.core.affine_base import AffineBase, Segment
from src.core.lattice import IntVec2, Matrix2, RatPoint, cross

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

# ===== TYPES & INTERFACES =====

@dataclass(frozen=True)
class Germ:
    """
    The piece of a ray leaving a point, in the local chart. At a point of a cut the
    chart is unfolded: pieces seen at the glued twin on cut_minus are pulled back by
    the inverse gluing matrix (`chart`).
    """
    ray_id: int
    segment: int
    kind: str
    direction: IntVec2
    chart: Matrix2
    born_here: bool = False

    @property
    def klass(self) -> IntVec2:
        return self.direction if self.kind == "out" else -self.direction

    @property
    def epsilon(self) -> int:
        # Counterclockwise loops cross outgoing germs against their class.
        return -1 if self.kind == "out" else 1


def point_key(q: RatPoint) -> Tuple[Fraction, Fraction]:
    return (q.x, q.y)

# ===== CORE BUSINESS LOGIC =====

def chart_pieces(base: AffineBase, q: RatPoint) -> List[Tuple[RatPoint, Matrix2]]:
    """Chart locations that make up the neighbourhood of a canonical point."""
    pieces = [(q, Matrix2.identity())]
    s = base.cut_plus_of(q)
    if s is not None:
        pieces.append((s.glue(q), s.inverse))
    return pieces


def ray_germs(ray, pieces: Iterable[Tuple[RatPoint, Matrix2]], q: RatPoint) -> List[Germ]:
    germs: List[Germ] = []
    for x, chart in pieces:
        for i, seg in enumerate(ray.support.segments):
            s = seg.param_of(x)
            if s is None:
                continue
            d = chart.apply(seg.direction)
            if 0 < s < seg.length:
                germs.append(Germ(ray.id, i, "in", -d, chart))
                germs.append(Germ(ray.id, i, "out", d, chart))
            elif s == 0 and seg.length > 0:
                germs.append(Germ(ray.id, i, "out", d, chart, born_here=(i == 0 and ray.origin == q)))
            elif s == seg.length and seg.length > 0:
                germs.append(Germ(ray.id, i, "in", -d, chart))
    return germs


def germs_at(diagram, q: RatPoint) -> List[Germ]:
    pieces = chart_pieces(diagram.base, q)
    germs: List[Germ] = []
    for ray in diagram.rays:
        germs.extend(ray_germs(ray, pieces, q))
    return germs


def segment_intersection(s1: Segment, s2: Segment) -> Optional[RatPoint]:
    den = cross(s1.direction, s2.direction)
    if den == 0:
        return None
    w = s2.start.minus(s1.start)
    t = Fraction(cross(w, s2.direction)) / den
    r = Fraction(cross(w, s1.direction)) / den
    if 0 <= t <= s1.length and 0 <= r <= s2.length:
        return s1.start.shifted(s1.direction, t)
    return None


def has_transverse_pair(germs: List[Germ]) -> bool:
    classes = {g.klass for g in germs}
    return any(c1.pairing(c2) != 0 for c1 in classes for c2 in classes)


class CollisionIndex:
    """
    Candidate scattering points of a diagram with the germs meeting there. Supports
    never change once traced, so the index grows incrementally as rays are added.
    """

    def __init__(self, base: AffineBase):
        self.base = base
        self.points: Dict[RatPoint, List[Germ]] = {}
        self.skipped: Set[RatPoint] = set()
        self._rays: Dict[int, object] = {}
        self._segments: List[Tuple[int, int, Segment]] = []

    def point_status(self, q: RatPoint) -> str:
        """'ok', 'singular', 'boundary' or 'open-cut' (glued twin outside the box)."""
        if not self.base.in_box(q, strict=True):
            return "boundary"
        if self.base.singular_at(q) is not None:
            return "singular"
        s = self.base.cut_plus_of(q)
        if s is not None and not self.base.in_box(s.glue(q), strict=True):
            return "open-cut"
        return "ok"

    def add_ray(self, ray) -> None:
        self._rays[ray.id] = ray
        found: Set[RatPoint] = set()
        own: List[Tuple[int, int, Segment]] = []
        for i, seg in enumerate(ray.support.segments):
            found.add(self.base.canonical(seg.start))
            found.add(self.base.canonical(seg.end))
            for _rid, _j, other in self._segments + own:
                x = segment_intersection(seg, other)
                if x is not None:
                    found.add(self.base.canonical(x))
            own.append((ray.id, i, seg))
        self._segments.extend(own)

        for q, germs in self.points.items():
            germs.extend(ray_germs(ray, chart_pieces(self.base, q), q))
        for q in found:
            if q in self.points or q in self.skipped:
                continue
            status = self.point_status(q)
            if status != "ok":
                if status == "open-cut":
                    logger.warning(f"⚠️ [{self.__class__.__name__}] Skipping {q}: its twin across the cut leaves the box")
                self.skipped.add(q)
                continue
            pieces = chart_pieces(self.base, q)
            germs: List[Germ] = []
            for r in self._rays.values():
                germs.extend(ray_germs(r, pieces, q))
            self.points[q] = germs

    def collision_points(self) -> List[RatPoint]:
        """Indexed points where two non-parallel classes meet, in canonical order."""
        return sorted((q for q, g in self.points.items() if has_transverse_pair(g)), key=point_key)
