# ===== IMPORTS & DEPENDENCIES =====
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cmp_to_key
from typing import List, NamedTuple, Optional, Sequence, Tuple

from src.config import MAX_SEGMENTS
from src.core.errors import (
    InvalidPoint, OnBoundary, PathThroughSingularity, RadiusExceeded,
    RayEntersDiscardedSector, RayHitsSingularity,
)
from src.core.lattice import (
    IntVec2, Matrix2, RatPoint, ccw_compare, cross, dot, in_open_cone,
    integer_kernel, is_positive_multiple, point_on_segment, segment_meets_open_cone,
)

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

# Distance used to compare where cuts meet a loop "at infinity"; far beyond any bounding box.
FAR_AWAY = 10 ** 6

# ===== TYPES & INTERFACES =====

@dataclass(frozen=True)
class Singularity:
    """
    A focus-focus point with its branch cut. The discarded wedge is the open
    clockwise sweep from cut_plus to cut_minus; x on cut_plus is identified with
    position + matrix (x - position) on cut_minus.
    """
    name: str
    position: RatPoint
    cut_plus: IntVec2
    cut_minus: IntVec2
    matrix: Matrix2
    invariant_dir: Optional[IntVec2] = None

    def __post_init__(self):
        if self.matrix.det() != 1:
            raise ValueError(f"[{self.name}] gluing matrix {self.matrix} must have determinant 1")
        if not is_positive_multiple(self.matrix.apply(self.cut_plus), self.cut_minus):
            raise ValueError(f"[{self.name}] matrix must map cut_plus {self.cut_plus} onto cut_minus {self.cut_minus}")
        if cross(self.cut_minus, self.cut_plus) <= 0:
            raise ValueError(f"[{self.name}] discarded wedge must be convex")
        if self.invariant_dir is not None and self.matrix.apply(self.invariant_dir) != self.invariant_dir:
            raise ValueError(f"[{self.name}] {self.invariant_dir} is not fixed by {self.matrix}")

    @property
    def inverse(self) -> Matrix2:
        return self.matrix.inverse()

    def is_type_a1(self) -> bool:
        return self.matrix.trace() == 2 and not self.matrix.is_identity()

    def in_wedge(self, q: RatPoint) -> bool:
        return in_open_cone(self.cut_minus, self.cut_plus, q.minus(self.position))

    def _on_ray(self, q: RatPoint, direction: IntVec2) -> bool:
        w = q.minus(self.position)
        return cross(direction, w) == 0 and dot(direction, w) > 0

    def on_cut_plus(self, q: RatPoint) -> bool:
        return self._on_ray(q, self.cut_plus)

    def on_cut_minus(self, q: RatPoint) -> bool:
        return self._on_ray(q, self.cut_minus)

    def glue(self, q: RatPoint) -> RatPoint:
        """cut_plus point -> its twin on cut_minus (also used as the affine chart change)."""
        return self.position.shifted(self.matrix.apply_rat(q.minus(self.position)))

    def unglue(self, q: RatPoint) -> RatPoint:
        return self.position.shifted(self.inverse.apply_rat(q.minus(self.position)))


@dataclass(frozen=True)
class Asymptote:
    """An end of the base: the strip lo < <m_out, q> < hi, whose rays leave along m_out."""
    name: str
    m_out: IntVec2
    lo: Fraction
    hi: Fraction

    def contains(self, q: RatPoint) -> bool:
        return self.lo < cross(self.m_out, q) < self.hi

    @property
    def incoming_class(self) -> IntVec2:
        return -self.m_out


@dataclass(frozen=True)
class Region:
    """
    The part of the chart between cut_plus of `opening` and cut_minus of `closing`,
    closed off by the segments joining both singularities to `centre`. Convex, so it is
    the intersection of the open half-planes on the left of its boundary lines.
    """
    name: str
    opening: str
    closing: str
    scale_vector: IntVec2
    centre: RatPoint = RatPoint(Fraction(0), Fraction(0))

    def boundary(self, base: "AffineBase") -> List[Tuple[RatPoint, Tuple]]:
        """(anchor, direction) per boundary line, counterclockwise."""
        s, e = base.singularity(self.opening), base.singularity(self.closing)
        return [
            (s.position, s.cut_plus),
            (e.position, -e.cut_minus),
            (e.position, self.centre.minus(e.position)),
            (self.centre, s.position.minus(self.centre)),
        ]

    def sides(self, base: "AffineBase", q: RatPoint) -> List[Fraction]:
        return [cross(d, q.minus(p)) for p, d in self.boundary(base)]


@dataclass(frozen=True)
class InitialWall:
    """Initial data not sourced by a singularity: 1 + t^grade z^(multiple * direction) from origin."""
    name: str
    origin: RatPoint
    direction: IntVec2
    grade: int = 1
    multiple: int = 1


@dataclass(frozen=True)
class AffineBase:
    name: str
    singularities: Tuple[Singularity, ...] = ()
    asymptotes: Tuple[Asymptote, ...] = ()
    regions: Tuple[Region, ...] = ()
    initial_walls: Tuple[InitialWall, ...] = ()
    # Display names of the monomials z^m used when printing superpotentials.
    variables: Tuple[Tuple[str, IntVec2], ...] = ()
    radius: int = 8

    def singularity(self, name: str) -> Singularity:
        for s in self.singularities:
            if s.name == name:
                return s
        raise KeyError(name)

    def wedge_containing(self, q: RatPoint) -> Optional[Singularity]:
        for s in self.singularities:
            if s.in_wedge(q):
                return s
        return None

    def singular_at(self, q: RatPoint) -> Optional[Singularity]:
        for s in self.singularities:
            if s.position == q:
                return s
        return None

    def validate_point(self, q: RatPoint) -> None:
        s = self.wedge_containing(q)
        if s is not None:
            raise InvalidPoint(f"{q} lies in the discarded sector of {s.name}",
                               {"point": [str(q.x), str(q.y)], "singularity": s.name})

    def cut_plus_of(self, q: RatPoint) -> Optional[Singularity]:
        for s in self.singularities:
            if s.on_cut_plus(q):
                return s
        return None

    def cut_minus_of(self, q: RatPoint) -> Optional[Singularity]:
        for s in self.singularities:
            if s.on_cut_minus(q):
                return s
        return None

    def canonical(self, q: RatPoint) -> RatPoint:
        """Points of a cut_minus are represented by their cut_plus twin."""
        s = self.cut_minus_of(q)
        return s.unglue(q) if s is not None else q

    def in_box(self, q: RatPoint, radius: Optional[int] = None, strict: bool = True) -> bool:
        r = self.radius if radius is None else radius
        if strict:
            return abs(q.x) < r and abs(q.y) < r
        return abs(q.x) <= r and abs(q.y) <= r

    def with_radius(self, radius: int) -> "AffineBase":
        return replace(self, radius=radius)

    def transform(self, g: Matrix2) -> "AffineBase":
        """The same base seen through the global chart change q -> g q (g in SL(2,Z))."""
        gi = g.inverse()
        dual = Matrix2(gi.a, gi.c, gi.b, gi.d)

        def pt(q: RatPoint) -> RatPoint:
            return RatPoint(*g.apply_rat(q))

        return AffineBase(
            name=f"{self.name}@{g}",
            singularities=tuple(
                Singularity(s.name, pt(s.position), g.apply(s.cut_plus), g.apply(s.cut_minus),
                            g @ s.matrix @ gi, g.apply(s.invariant_dir) if s.invariant_dir else None)
                for s in self.singularities),
            asymptotes=tuple(Asymptote(a.name, g.apply(a.m_out), a.lo, a.hi) for a in self.asymptotes),
            regions=tuple(replace(r, scale_vector=dual.apply(r.scale_vector), centre=pt(r.centre))
                          for r in self.regions),
            initial_walls=tuple(replace(w, origin=pt(w.origin), direction=g.apply(w.direction))
                                for w in self.initial_walls),
            variables=tuple((n, g.apply(m)) for n, m in self.variables),
            radius=self.radius,
        )


class Segment(NamedTuple):
    """start + s * direction for 0 <= s <= length."""
    start: RatPoint
    end: RatPoint
    direction: IntVec2
    length: Fraction

    def param_of(self, q: RatPoint) -> Optional[Fraction]:
        w = q.minus(self.start)
        if cross(self.direction, w) != 0:
            return None
        s = Fraction(dot(w, self.direction)) / dot(self.direction, self.direction)
        return s if 0 <= s <= self.length else None


class CutCrossing(NamedTuple):
    """A jump across the cut of `singularity`: +1 maps by its matrix, -1 by the inverse."""
    singularity: Singularity
    orientation: int
    point: RatPoint
    before_segment: int


@dataclass
class TransportPath:
    segments: List[Segment] = field(default_factory=list)
    crossings: List[CutCrossing] = field(default_factory=list)
    final_direction: Optional[IntVec2] = None
    escaped: bool = False

    @property
    def waypoints(self) -> List[RatPoint]:
        points: List[RatPoint] = []
        for seg in self.segments:
            if not points or points[-1] != seg.start:
                points.append(seg.start)
            points.append(seg.end)
        return points

    def crossings_before(self, segment_index: int) -> List[CutCrossing]:
        return [c for c in self.crossings if c.before_segment <= segment_index]

# ===== CORE BUSINESS LOGIC =====

def cross_cut(v: IntVec2, s: Singularity, orientation: int) -> IntVec2:
    return s.matrix.apply(v) if orientation > 0 else s.inverse.apply(v)


def transport(path: TransportPath, v: IntVec2) -> IntVec2:
    for crossing in path.crossings:
        v = cross_cut(v, crossing.singularity, crossing.orientation)
    return v


def path_monodromy(path: TransportPath) -> Matrix2:
    m = Matrix2.identity()
    for crossing in path.crossings:
        step = crossing.singularity.matrix if crossing.orientation > 0 else crossing.singularity.inverse
        m = step @ m
    return m


def rational_direction(delta: Sequence[Fraction]) -> Tuple[IntVec2, Fraction]:
    """Splits a nonzero rational vector into (primitive integer direction, length factor)."""
    dx, dy = Fraction(delta[0]), Fraction(delta[1])
    lcm_den = dx.denominator * dy.denominator
    v = IntVec2(int(dx * lcm_den), int(dy * lcm_den)).primitive()
    length = dx / v.a if v.a else dy / v.b
    return v, length


def path_from_waypoints(base: AffineBase, waypoints: Sequence[RatPoint]) -> TransportPath:
    """
    Builds a path through chart points. Consecutive waypoints that are twins on the
    two sides of a cut record a crossing; every other leg is a straight segment that
    must avoid singular points and discarded wedges.
    """
    path = TransportPath()
    for i, p in enumerate(waypoints):
        base.validate_point(p)
    for a, b in zip(waypoints, waypoints[1:]):
        s_plus, s_minus = base.cut_plus_of(a), base.cut_minus_of(a)
        if s_plus is not None and s_plus.glue(a) == b:
            path.crossings.append(CutCrossing(s_plus, 1, a, len(path.segments)))
            continue
        if s_minus is not None and s_minus.unglue(a) == b:
            path.crossings.append(CutCrossing(s_minus, -1, a, len(path.segments)))
            continue
        if a == b:
            continue
        for s in base.singularities:
            if point_on_segment(s.position, a, b):
                raise PathThroughSingularity(f"leg {a} -> {b} passes through {s.name}",
                                             {"singularity": s.name})
            if segment_meets_open_cone(s.position, s.cut_minus, s.cut_plus, a, b):
                raise RayEntersDiscardedSector(f"leg {a} -> {b} enters the wedge of {s.name}",
                                               {"singularity": s.name})
        direction, length = rational_direction(b.minus(a))
        path.segments.append(Segment(a, b, direction, length))
    return path


def _box_exit_param(q: RatPoint, d: IntVec2, radius: int) -> Fraction:
    candidates = []
    for coord, comp in ((q.x, d.a), (q.y, d.b)):
        if comp > 0:
            candidates.append((radius - coord) / comp)
        elif comp < 0:
            candidates.append((-radius - coord) / comp)
    return min(candidates)


def _first_event(base: AffineBase, q: RatPoint, d: IntVec2, limit: Fraction) -> Optional[Tuple[Fraction, str, Singularity]]:
    best: Optional[Tuple[Fraction, str, Singularity]] = None
    for s in base.singularities:
        w = s.position.minus(q)
        if s.position != q and cross(w, d) == 0 and dot(w, d) > 0:
            t = Fraction(dot(w, d)) / dot(d, d)
            if t <= limit and (best is None or t <= best[0]):
                best = (t, "hit", s)
        for kind, e, entering in (("plus", s.cut_plus, cross(s.cut_plus, d) < 0),
                                  ("minus", s.cut_minus, cross(s.cut_minus, d) > 0)):
            if not entering:
                continue
            denom = cross(d, e)
            t = Fraction(cross(w, e)) / denom
            r = Fraction(cross(w, d)) / denom
            if r <= 0 or t < 0 or t >= limit:
                continue
            if best is None or t < best[0]:
                best = (t, kind, s)
    return best


def trace_ray(base: AffineBase, start: RatPoint, direction: IntVec2,
              radius: Optional[int] = None, max_segments: int = MAX_SEGMENTS) -> TransportPath:
    """
    Follows the straight line from start, refracting at every cut it enters, until it
    leaves the box |x|, |y| < radius. A cut jump that lands outside the box also ends
    the ray; final_direction is then the refracted direction.
    """
    radius = base.radius if radius is None else radius
    if not base.in_box(start, radius, strict=False):
        raise RadiusExceeded(f"ray start {start} lies outside the box of radius {radius}",
                             {"point": [str(start.x), str(start.y)], "radius": radius})
    wedge = base.wedge_containing(start)
    if wedge is not None:
        raise RayEntersDiscardedSector(f"ray start {start} lies in the wedge of {wedge.name}",
                                       {"singularity": wedge.name})
    path = TransportPath()
    q, d = start, direction
    while len(path.segments) < max_segments:
        limit = _box_exit_param(q, d, radius)
        event = _first_event(base, q, d, limit)
        if event is None:
            path.segments.append(Segment(q, q.shifted(d, limit), d, limit))
            path.final_direction, path.escaped = d, True
            return path
        t, kind, s = event
        hit = q.shifted(d, t)
        if kind == "hit":
            raise RayHitsSingularity(f"ray from {start} along {direction} hits {s.name} at {hit}",
                                     {"singularity": s.name, "start": [str(start.x), str(start.y)]})
        if t > 0:
            path.segments.append(Segment(q, hit, d, t))
        if kind == "plus":
            q, d, orientation = s.glue(hit), s.matrix.apply(d), 1
        else:
            q, d, orientation = s.unglue(hit), s.inverse.apply(d), -1
        path.crossings.append(CutCrossing(s, orientation, hit, len(path.segments)))
        if not base.in_box(q, radius, strict=True):
            path.final_direction, path.escaped = d, True
            return path
    logger.warning(f"⚠️ [trace_ray] Ray from {start} along {direction} still inside the box after {max_segments} segments")
    path.final_direction = d
    return path


def region_of(base: AffineBase, p: RatPoint) -> Region:
    if not base.regions:
        raise InvalidPoint(f"base '{base.name}' defines no regions")
    base.validate_point(p)
    for region in base.regions:
        sides = region.sides(base, p)
        if all(v > 0 for v in sides):
            return region
        if all(v >= 0 for v in sides):
            raise OnBoundary(f"{p} lies on the boundary of {region.name}",
                             {"point": [str(p.x), str(p.y)], "region": region.name})
    raise InvalidPoint(f"{p} lies in no region of base '{base.name}'", {"point": [str(p.x), str(p.y)]})


def scale(v: IntVec2, region: Region) -> int:
    return dot(v, region.scale_vector)


def loop_at_infinity(base: AffineBase) -> Matrix2:
    """
    Monodromy of a large counterclockwise loop starting in the first asymptotic strip.
    The loop meets each cut_minus far out, in the angular order of the far points.
    """
    ref = base.asymptotes[0].m_out if base.asymptotes else IntVec2(1, 0)

    def far(s: Singularity) -> Tuple[Fraction, Fraction]:
        return s.position.shifted(s.cut_minus, FAR_AWAY)

    ordered = sorted(base.singularities, key=cmp_to_key(lambda s1, s2: ccw_compare(ref, far(s1), far(s2))))
    m = Matrix2.identity()
    for s in ordered:
        m = s.inverse @ m
    logger.debug(f"[loop_at_infinity] Order {[s.name for s in ordered]} gives {m}")
    return m


def invariant_direction(s: Singularity) -> IntVec2:
    return s.invariant_dir if s.invariant_dir is not None else integer_kernel(s.matrix)
