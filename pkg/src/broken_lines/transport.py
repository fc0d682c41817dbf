# ===== IMPORTS & DEPENDENCIES =====
import logging
from collections import defaultdict
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from src.config import HUB_POINT
from src.core.affine_base import (
    Asymptote, CutCrossing, Segment, TransportPath, path_from_waypoints, trace_ray,
)
from src.core.formal_series import (
    ClassExponent, FormalSeries, UNIT, WallAutomorphism, WallFunction, apply_automorphism,
)
from src.core.lattice import IntVec2, RatPoint, cross
from src.scattering.diagram import ScatteringDiagram
from src.scattering.local_geometry import segment_intersection

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

# ===== UTILITY FUNCTIONS =====

def hub_point() -> RatPoint:
    return RatPoint.of(*HUB_POINT)


def reverse_path(path: TransportPath) -> TransportPath:
    """The same path walked backwards: segments flipped, cut crossings undone in reverse order."""
    n = len(path.segments)
    segments = [Segment(s.end, s.start, -s.direction, s.length) for s in reversed(path.segments)]
    crossings = []
    for c in reversed(path.crossings):
        landing = c.singularity.glue(c.point) if c.orientation > 0 else c.singularity.unglue(c.point)
        crossings.append(CutCrossing(c.singularity, -c.orientation, landing, n - c.before_segment))
    return TransportPath(segments, crossings, -path.segments[0].direction if path.segments else None, False)


def asymptote_path(diagram: ScatteringDiagram, asymptote: Asymptote, u: RatPoint) -> Tuple[TransportPath, ClassExponent]:
    """
    A path from the box boundary in the asymptote's strip to u: the trace from the
    hub outwards along m_out, walked back, then the straight leg hub -> u. Returns the
    path and the incoming monomial class at its start.
    """
    hub = hub_point()
    outward = trace_ray(diagram.base, hub, asymptote.m_out)
    inward = reverse_path(outward)
    leg = path_from_waypoints(diagram.base, [hub, u])
    offset = len(inward.segments)
    inward.segments.extend(leg.segments)
    inward.crossings.extend(CutCrossing(c.singularity, c.orientation, c.point, c.before_segment + offset)
                            for c in leg.crossings)
    inward.final_direction = leg.segments[-1].direction if leg.segments else inward.final_direction
    start_class = ClassExponent(-outward.final_direction, 1)
    return inward, start_class


def positive_closure(f: WallFunction) -> FormalSeries:
    """sum_j (f+ - 1)^j with f+ the wall function with absolute coefficients; covers the support of every f^k."""
    h = FormalSeries({e: abs(c) for e, c in f.series if e != UNIT}, f.trunc)
    total = FormalSeries.one(f.trunc)
    power = FormalSeries.one(f.trunc)
    while True:
        power = power * h
        if power.is_zero():
            return total
        total = total + power


def _crossings_on_segment(diagram: ScatteringDiagram, seg: Segment) -> List[Tuple[Fraction, int, IntVec2]]:
    """(parameter, ray id, wall class) for every transverse crossing strictly inside both segments."""
    hits = []
    for ray in diagram.rays:
        for other in ray.support.segments:
            if cross(seg.direction, other.direction) == 0:
                continue
            x = segment_intersection(seg, other)
            if x is None:
                continue
            s, r = seg.param_of(x), other.param_of(x)
            if 0 < s < seg.length and 0 < r < other.length:
                hits.append((s, ray.id, other.direction))
    return sorted(hits, key=lambda h: (h[0], h[1]))

# ===== CORE BUSINESS LOGIC =====

def transport_series(diagram: ScatteringDiagram, path: TransportPath, g: FormalSeries, N: int,
                     positive: bool = False) -> FormalSeries:
    """
    Applies every wall-crossing met along the path, K^eps with eps = sgn <travel, class>,
    and the chart change at each cut crossing. With positive=True the crossings are
    replaced by their positive closures, which only over-approximate the support.
    """
    rays = diagram.by_id()
    g = g.truncate(N)
    for i, seg in enumerate(path.segments):
        for c in path.crossings:
            if c.before_segment == i:
                step = c.singularity.matrix if c.orientation > 0 else c.singularity.inverse
                g = g.transform(step)
        hits = _crossings_on_segment(diagram, seg)
        params = [h[0] for h in hits]
        if len(set(params)) < len(params):
            logger.debug(f"[transport_series] Several walls crossed at one point of {seg.start} -> {seg.end}")
        for _s, rid, klass in hits:
            wall = rays[rid].wall.reoriented(klass).truncate(N)
            if positive:
                g = _positive_crossing(g, wall, klass)
            else:
                eps = 1 if cross(seg.direction, klass) > 0 else -1
                g = apply_automorphism(WallAutomorphism(wall, klass, eps), g)
    for c in path.crossings:
        if c.before_segment >= len(path.segments):
            step = c.singularity.matrix if c.orientation > 0 else c.singularity.inverse
            g = g.transform(step)
    return g


def _positive_crossing(g: FormalSeries, wall: WallFunction, klass: IntVec2) -> FormalSeries:
    closure = positive_closure(wall)
    acc: Dict[ClassExponent, Fraction] = defaultdict(Fraction)
    for e, c in g:
        if e.m.pairing(klass) == 0:
            acc[e] += abs(c)
            continue
        for e2, c2 in closure * FormalSeries._raw({e: abs(c)}, g.trunc):
            acc[e2] += c2
    return FormalSeries(dict(acc), g.trunc)


def transport_theta(diagram: ScatteringDiagram, asymptote: Asymptote, u: RatPoint, N: int,
                    positive: bool = False) -> FormalSeries:
    """The incoming monomial of an asymptote carried to u: the theta function it defines there."""
    path, start = asymptote_path(diagram, asymptote, u)
    return transport_series(diagram, path, FormalSeries({start: 1}, N), N, positive)


def candidate_classes(diagram: ScatteringDiagram, u: RatPoint, N: int) -> List[ClassExponent]:
    """Every class a broken line ending at u can carry, from the positive closures of all asymptotes."""
    found = set()
    for asymptote in diagram.base.asymptotes:
        for e, _c in transport_theta(diagram, asymptote, u, N, positive=True):
            if 1 <= e.grade <= N and not e.m.is_zero():
                found.add(e)
    return sorted(found, key=lambda e: e.sort_key())


def asymptote_by_name(diagram: ScatteringDiagram, name: Optional[str]) -> List[Asymptote]:
    if name is None:
        return list(diagram.base.asymptotes)
    return [a for a in diagram.base.asymptotes if a.name == name]
