# ===== IMPORTS & DEPENDENCIES =====
import asyncio
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import islice
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Set, Tuple

from src.config import (
    CANDIDATE_ROUNDS, DEFAULT_THREADS, ENDPOINT_OFFSET, RANDOM_SEED, SWEEP_EXTENT, SWEEP_STEP, WALLCROSS_ATTEMPTS,
)
from src.core.affine_base import AffineBase, path_from_waypoints
from src.core.errors import (
    EndpointInDiscardedSector, EndpointOnWall, NotAdjacent, PathThroughSingularity, RadiusExceeded,
    RayEntersDiscardedSector,
)
from src.core.formal_series import ClassExponent, FormalSeries, WallAutomorphism, apply_automorphism
from src.core.lattice import IntVec2, RatPoint, cross, format_rat
from src.scattering.diagram import ScatteringDiagram
from src.scattering.local_geometry import germs_at, segment_intersection
from src.broken_lines.enumeration import BrokenLine, BrokenLineSearch, is_generic_endpoint, validate_endpoint

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

# ===== TYPES & INTERFACES =====

@dataclass
class Superpotential:
    """W^trop at a fixed endpoint: class -> weighted count of broken lines, up to `order`."""
    point: RatPoint
    order: int
    terms: Dict[ClassExponent, Fraction] = field(default_factory=dict)
    lines: List[BrokenLine] = field(default_factory=list, repr=False)

    def as_series(self) -> FormalSeries:
        return FormalSeries(dict(self.terms), self.order)

    def coefficient(self, klass: ClassExponent) -> Fraction:
        return self.terms.get(klass, Fraction(0))

    def minimal_grade_terms(self) -> Dict[ClassExponent, Fraction]:
        if not self.terms:
            return {}
        low = min(e.grade for e in self.terms)
        return {e: c for e, c in self.terms.items() if e.grade == low}

    def display(self, base: AffineBase) -> str:
        return format_series(self.as_series(), base)


@dataclass
class Chamber:
    terms: Dict[ClassExponent, Fraction]
    points: List[RatPoint] = field(default_factory=list)

# ===== UTILITY FUNCTIONS =====

def monomial_powers(base: AffineBase, m: IntVec2) -> List[Tuple[str, int]]:
    """Exponents of m in the base's display variables (a lattice basis)."""
    if len(base.variables) != 2:
        return [(f"z^{m}", 1)]
    (n1, v1), (n2, v2) = base.variables
    det = cross(v1, v2)
    return [(n1, cross(m, v2) // det), (n2, cross(v1, m) // det)]


def format_monomial(base: AffineBase, e: ClassExponent) -> str:
    """t^(grade - 1) times the monomial in display variables, e.g. 't*x^-1*y'."""
    parts = []
    if e.grade - 1 == 1:
        parts.append("t")
    elif e.grade - 1 > 1:
        parts.append(f"t^{e.grade - 1}")
    for name, k in monomial_powers(base, e.m):
        if k == 1:
            parts.append(name)
        elif k != 0:
            parts.append(f"{name}^{k}")
    return "*".join(parts) or "1"


def format_series(series: FormalSeries, base: AffineBase) -> str:
    out = []
    for e, c in series:
        mono = format_monomial(base, e)
        if c == 1:
            term = mono
        elif c == -1:
            term = f"-{mono}"
        else:
            term = f"{format_rat(c)}*{mono}" if mono != "1" else format_rat(c)
        out.append(term)
    return " + ".join(out).replace("+ -", "- ") or "0"


def grid(extent: Fraction, step: Fraction) -> List[Fraction]:
    values, x = [], -extent
    while x <= extent:
        values.append(x)
        x += step
    return values


def _paired_potentials(diagram: ScatteringDiagram, u1: RatPoint, u2: RatPoint, N: int, threads: int,
                       carry: Callable[[FormalSeries, int], FormalSeries]) -> Tuple[FormalSeries, FormalSeries]:
    """
    W at two endpoints on either side of a wall. Every class one side carries across,
    before or after the walls act, is searched on the other side as well.
    """
    extra1: Set[ClassExponent] = set()
    extra2: Set[ClassExponent] = set()
    for _ in range(CANDIDATE_ROUNDS):
        w1 = superpotential(diagram, u1, N, threads, extra1).as_series()
        w2 = superpotential(diagram, u2, N, threads, extra2).as_series()
        new1 = {e for e, _c in w2} | {e for e, _c in carry(w2, 1)}
        new2 = {e for e, _c in w1} | {e for e, _c in carry(w1, -1)}
        if new1 <= extra1 and new2 <= extra2:
            break
        extra1 |= new1
        extra2 |= new2
    return w1, w2

# ===== CORE BUSINESS LOGIC =====

def superpotential(diagram: ScatteringDiagram, u: RatPoint, N: Optional[int] = None,
                   threads: int = DEFAULT_THREADS, extra: Iterable[ClassExponent] = ()) -> Superpotential:
    N = diagram.order if N is None else N
    lines = asyncio.run(BrokenLineSearch(diagram, N, threads).enumerate(u, extra=extra))
    terms: Dict[ClassExponent, Fraction] = {}
    for line in lines:
        terms[line.klass] = terms.get(line.klass, Fraction(0)) + line.weight
    terms = {e: c for e, c in sorted(terms.items(), key=lambda kv: kv[0].sort_key()) if c}
    logger.info(f"✅ [superpotential] {len(lines)} broken lines, {len(terms)} classes at {u}")
    return Superpotential(u, N, terms, lines)


def sweep_superpotentials(diagram: ScatteringDiagram, extent: Fraction = Fraction(SWEEP_EXTENT),
                          step: Fraction = Fraction(SWEEP_STEP), N: Optional[int] = None,
                          threads: int = DEFAULT_THREADS) -> List[Chamber]:
    """W on a rational grid, skipping non-generic points; equal potentials are grouped into chambers."""
    N = diagram.order if N is None else N
    chambers: Dict[frozenset, Chamber] = {}
    skipped = 0
    for x in grid(Fraction(extent), Fraction(step)):
        for y in grid(Fraction(extent), Fraction(step)):
            u = RatPoint(x, y)
            if not is_generic_endpoint(diagram, u):
                skipped += 1
                continue
            w = superpotential(diagram, u, N, threads)
            key = frozenset(w.terms.items())
            chambers.setdefault(key, Chamber(w.terms)).points.append(u)
    logger.info(f"🏁 [sweep_superpotentials] {len(chambers)} chambers, {skipped} grid points skipped")
    return sorted(chambers.values(), key=lambda c: (c.points[0].x, c.points[0].y))


def wallcross_check(diagram: ScatteringDiagram, u1: RatPoint, u2: RatPoint, ray_id: Optional[int],
                    N: Optional[int] = None, threads: int = DEFAULT_THREADS) -> bool:
    """
    W(u1) = K^eps(W(u2)) for the walls between two endpoints joined by a straight
    segment meeting the support at one point, eps = sgn <u1 - u2, class>.
    """
    N = diagram.order if N is None else N
    validate_endpoint(diagram, u1)
    validate_endpoint(diagram, u2)
    if u1 == u2:
        return True
    try:
        leg = path_from_waypoints(diagram.base, [u2, u1])
    except (RayEntersDiscardedSector, PathThroughSingularity) as e:
        raise NotAdjacent(f"{u2} -> {u1} is not a straight path in the chart: {e.message}",
                          {"u1": [str(u1.x), str(u1.y)], "u2": [str(u2.x), str(u2.y)]})
    if len(leg.segments) != 1:
        raise NotAdjacent(f"{u2} -> {u1} crosses a cut", {"u1": [str(u1.x), str(u1.y)], "u2": [str(u2.x), str(u2.y)]})
    seg = leg.segments[0]
    points = set()
    for ray in diagram.rays:
        for other in ray.support.segments:
            x = segment_intersection(seg, other)
            if x is not None:
                points.add(diagram.base.canonical(x))
    if len(points) > 1:
        raise NotAdjacent(f"{u2} -> {u1} meets the support at {len(points)} points",
                          {"points": [[str(p.x), str(p.y)] for p in sorted(points)]})

    if not points:
        if ray_id is not None:
            raise NotAdjacent(f"{u2} -> {u1} does not cross ray {ray_id}", {"ray": ray_id})
        w1, w2 = _paired_potentials(diagram, u1, u2, N, threads, lambda g, sign: g)
        return w1 == w2

    (q,) = points
    germs = germs_at(diagram, q)
    lines = {g.klass if (g.klass.a, g.klass.b) > (0, 0) else -g.klass for g in germs}
    if len(lines) != 1 or any(g.born_here for g in germs):
        raise NotAdjacent(f"{u2} -> {u1} passes through the vertex {q}", {"point": [str(q.x), str(q.y)]})
    if ray_id is not None and ray_id not in {g.ray_id for g in germs}:
        raise NotAdjacent(f"ray {ray_id} does not pass between {u2} and {u1}", {"ray": ray_id})

    rays = diagram.by_id()
    walls = [(rays[rid].wall.reoriented(klass).truncate(N), klass)
             for rid, klass in sorted({(g_.ray_id, g_.klass) for g_ in germs})]

    def cross_walls(g: FormalSeries, sign: int) -> FormalSeries:
        # sign = 1 carries W from u2 over to u1, sign = -1 back again.
        order = walls if sign > 0 else list(reversed(walls))
        for wall, klass in order:
            eps = 1 if cross(seg.direction, klass) > 0 else -1
            g = apply_automorphism(WallAutomorphism(wall, klass, sign * eps), g)
        return g

    w1, w2 = _paired_potentials(diagram, u1, u2, N, threads, cross_walls)
    ok = cross_walls(w2, 1) == w1
    if not ok:
        logger.warning(f"⚠️ [wallcross_check] Superpotentials at {u1} and {u2} are not related by the walls at {q}")
    return ok


@dataclass
class WallcrossReport:
    checked: int = 0
    skipped: int = 0
    failures: List[Tuple[int, RatPoint, RatPoint]] = field(default_factory=list)


def wallcross_samples(diagram: ScatteringDiagram, seed: int = RANDOM_SEED) -> Iterator[Tuple[int, RatPoint, RatPoint]]:
    """Endpoint pairs straddling a random point of a random ray, offset along the local normal."""
    rng = random.Random(seed)
    delta = Fraction(ENDPOINT_OFFSET)
    rays = sorted(diagram.rays, key=lambda r: r.id)
    while rays:
        ray = rng.choice(rays)
        seg = rng.choice(ray.support.segments)
        q = seg.start.shifted(seg.direction, seg.length * Fraction(rng.randint(1, 99), 100))
        normal = (-seg.direction.b, seg.direction.a)
        yield ray.id, q.shifted(normal, delta), q.shifted(normal, -delta)


def check_wallcrossings(diagram: ScatteringDiagram, samples: int, N: Optional[int] = None,
                        threads: int = DEFAULT_THREADS, seed: int = RANDOM_SEED) -> WallcrossReport:
    """Runs `samples` wall-crossing checks, drawing new pairs for the ones that cannot be checked."""
    report = WallcrossReport()
    if samples <= 0:
        return report
    for ray_id, u1, u2 in islice(wallcross_samples(diagram, seed), samples * WALLCROSS_ATTEMPTS):
        try:
            ok = wallcross_check(diagram, u1, u2, ray_id, N, threads)
        except (NotAdjacent, EndpointOnWall, EndpointInDiscardedSector, RadiusExceeded) as e:
            logger.debug(f"[check_wallcrossings] Skipping sample across ray {ray_id}: {e.message}")
            report.skipped += 1
            continue
        report.checked += 1
        if not ok:
            report.failures.append((ray_id, u1, u2))
        if report.checked == samples:
            break
    else:
        logger.warning(f"⚠️ [check_wallcrossings] Only {report.checked} of {samples} samples could be checked")
    logger.info(f"🏁 [check_wallcrossings] {report.checked} checked, {report.skipped} skipped, "
                f"{len(report.failures)} failed")
    return report
