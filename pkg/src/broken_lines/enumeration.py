# ===== IMPORTS & DEPENDENCIES =====
import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Set, Tuple

from src.config import CANDIDATE_ROUNDS, DEFAULT_THREADS, ENDPOINT_OFFSET, OFFSET_DIRECTIONS, OFFSET_SCALES
from src.core.affine_base import cross_cut, trace_ray
from src.core.errors import (
    EndpointInDiscardedSector, EndpointOnWall, RadiusExceeded, RayEntersDiscardedSector, RayHitsSingularity,
    ScatteringError,
)
from src.core.formal_series import ClassExponent, FormalSeries, UNIT
from src.core.lattice import IntVec2, RatPoint, is_positive_multiple
from src.scattering.diagram import ScatteringDiagram
from src.scattering.local_geometry import Germ, germs_at, segment_intersection
from src.broken_lines.transport import candidate_classes

# ===== CONFIGURATION & CONSTANTS =====
logger = logging.getLogger(__name__)

# ===== TYPES & INTERFACES =====

@dataclass(frozen=True)
class LineSegment:
    """A straight piece of a broken line carrying coeff * t^grade * z^m, m along the travel direction."""
    start: RatPoint
    end: RatPoint
    klass: ClassExponent
    coeff: Fraction


@dataclass(frozen=True)
class Bend:
    point: RatPoint
    ray_ids: Tuple[int, ...]
    term: ClassExponent
    coeff: Fraction


@dataclass(frozen=True)
class BrokenLine:
    """
    A broken line from infinity to `endpoint`.

    Attributes:
        asymptote (str): Name of the end it comes in from.
        segments (Tuple[LineSegment, ...]): Pieces in travel order; the first carries the incoming class with coefficient 1.
        bends (Tuple[Bend, ...]): Bends in travel order, each adding one term of the crossed wall functions.
    """
    endpoint: RatPoint
    asymptote: str
    segments: Tuple[LineSegment, ...]
    bends: Tuple[Bend, ...]

    @property
    def klass(self) -> ClassExponent:
        return self.segments[-1].klass

    @property
    def weight(self) -> Fraction:
        return self.segments[-1].coeff

    @property
    def incoming(self) -> ClassExponent:
        return self.segments[0].klass

    def sort_key(self):
        return (self.klass.sort_key(), self.asymptote, tuple((b.point.x, b.point.y) for b in self.bends))

# ===== UTILITY FUNCTIONS =====

def _endpoint_error(diagram: ScatteringDiagram, u: RatPoint) -> Optional[ScatteringError]:
    """The reason u cannot end a broken line, without looking for a replacement point."""
    base = diagram.base
    where = [str(u.x), str(u.y)]
    if not base.in_box(u, strict=True):
        return RadiusExceeded(f"endpoint {u} is outside the box of radius {base.radius}",
                              {"point": where, "radius": base.radius})
    wedge = base.wedge_containing(u)
    if wedge is not None:
        return EndpointInDiscardedSector(f"endpoint {u} lies in the discarded sector of {wedge.name}",
                                         {"point": where, "singularity": wedge.name})
    if base.singular_at(u) or base.cut_plus_of(u) or base.cut_minus_of(u) or germs_at(diagram, base.canonical(u)):
        return EndpointOnWall(f"endpoint {u} lies on the support of the diagram or on a cut",
                              {"point": where, "suggested": None})
    return None


def validate_endpoint(diagram: ScatteringDiagram, u: RatPoint) -> None:
    error = _endpoint_error(diagram, u)
    if error is None:
        return
    if isinstance(error, EndpointOnWall):
        suggestion = suggest_offset(diagram, u)
        if suggestion is not None:
            error.details["suggested"] = [str(suggestion.x), str(suggestion.y)]
    raise error


def is_generic_endpoint(diagram: ScatteringDiagram, u: RatPoint) -> bool:
    return _endpoint_error(diagram, u) is None


def suggest_offset(diagram: ScatteringDiagram, u: RatPoint) -> Optional[RatPoint]:
    """u + eps * v for the first fixed direction v and shrinking eps that lands off every wall."""
    eps = Fraction(ENDPOINT_OFFSET)
    for scale in OFFSET_SCALES:
        for v in OFFSET_DIRECTIONS:
            candidate = u.shifted(v, eps * Fraction(scale))
            if is_generic_endpoint(diagram, candidate):
                return candidate
    return None

# ===== CORE BUSINESS LOGIC =====

class BrokenLineSearch:
    """
    Backward search from the endpoint. Walking against the monomial, every wall met
    may be passed or un-bent: the previous monomial is m - w for a term w of the
    crossing, which lowers the grade, so the search is finite for a grade budget.
    """

    def __init__(self, diagram: ScatteringDiagram, N: int, threads: int = DEFAULT_THREADS):
        self.diagram = diagram
        self.base = diagram.base
        self.N = N
        self.threads = max(1, threads)
        self.rays = diagram.by_id()
        self._segments = [(r.id, s) for r in diagram.rays for s in r.support.segments]
        self._germs: Dict[RatPoint, List[Germ]] = {}

    def _germs_at(self, q: RatPoint) -> List[Germ]:
        if q not in self._germs:
            self._germs[q] = germs_at(self.diagram, q)
        return self._germs[q]

    def _points_on(self, seg, skip_start: bool) -> List[Tuple[Fraction, RatPoint]]:
        found: Dict[RatPoint, Fraction] = {}
        for _rid, other in self._segments:
            x = segment_intersection(seg, other)
            if x is None:
                continue
            s = seg.param_of(x)
            if s is None or s >= seg.length or (s == 0 and skip_start):
                continue
            found[x] = s
        return sorted(((s, x) for x, s in found.items()), key=lambda item: item[0])

    def _bend_terms(self, q: RatPoint, m: ClassExponent) -> List[Tuple[ClassExponent, Fraction, Tuple[int, ...]]]:
        """Terms w of prod f_i^|<m, d_i>| over the walls at q, or nothing if q does not admit bends."""
        germs = self._germs_at(q)
        if not germs or any(g.born_here for g in germs):
            return []
        lines = {g.klass if (g.klass.a, g.klass.b) > (0, 0) else -g.klass for g in germs}
        if len(lines) != 1:
            return []
        walls: Dict[Tuple[int, IntVec2], None] = {}
        for g in germs:
            walls[(g.ray_id, g.klass)] = None
        product = FormalSeries.one(m.grade - 1)
        for rid, klass in sorted(walls):
            k = abs(m.m.pairing(klass))
            if k == 0:
                continue
            f = self.rays[rid].wall.reoriented(klass).series.truncate(m.grade - 1)
            product = product * f.power(k)
        ids = tuple(sorted({rid for rid, _ in walls}))
        return [(w, c, ids) for w, c in product if w != UNIT]

    def _accepts(self, path, m: ClassExponent) -> Optional[str]:
        """The asymptote whose strip the unbent first piece comes in through, if any."""
        if not path.escaped or path.final_direction is None or not path.segments:
            return None
        exit_point = path.segments[-1].end
        for a in self.base.asymptotes:
            if (is_positive_multiple(path.final_direction, a.m_out) and m == ClassExponent(-a.m_out, 1)
                    and a.contains(exit_point)):
                return a.name
        return None

    def search(self, start: RatPoint, m: ClassExponent, trail: Tuple = (), bends: Tuple = (),
               met: Optional[Set[ClassExponent]] = None, same_chart: bool = True) -> List[BrokenLine]:
        """
        Broken lines that arrive at `start` carrying m, followed by the given later pieces.
        Classes un-bent at points reached from the endpoint without crossing a cut are
        added to `met`: the same class is a candidate at the endpoint itself.
        """
        try:
            path = trace_ray(self.base, start, -m.m.primitive())
        except (RayHitsSingularity, RayEntersDiscardedSector, RadiusExceeded):
            return []
        out: List[BrokenLine] = []
        pieces: List[Tuple] = []
        current = m
        for i, seg in enumerate(path.segments):
            for c in path.crossings:
                if c.before_segment == i:
                    current = ClassExponent(cross_cut(current.m, c.singularity, c.orientation), current.grade)
                    same_chart = False
            for _s, x in self._points_on(seg, skip_start=True):
                q = self.base.canonical(x)
                if not self.base.in_box(q, strict=True) or self.base.singular_at(q):
                    continue
                m_q = current
                if q != x:
                    s = self.base.cut_minus_of(x)
                    m_q = ClassExponent(s.inverse.apply(current.m), current.grade)
                for w, coeff, ids in self._bend_terms(q, m_q):
                    previous = m_q - w
                    if previous.grade < 1 or previous.m.is_zero():
                        continue
                    if met is not None and same_chart and q == x:
                        met.add(previous)
                    piece = (x, seg.start, current)
                    out.extend(self.search(q, previous, trail + tuple(pieces) + (piece,),
                                           bends + (Bend(q, ids, w, coeff),), met, same_chart and q == x))
            pieces.append((seg.end, seg.start, current))
        for c in path.crossings:
            if c.before_segment >= len(path.segments):
                current = ClassExponent(cross_cut(current.m, c.singularity, c.orientation), current.grade)
        name = self._accepts(path, current)
        if name is not None:
            out.append(self._assemble(name, trail + tuple(pieces), bends))
        return out

    def _assemble(self, asymptote: str, backward_pieces: Tuple, backward_bends: Tuple) -> BrokenLine:
        """Turns the backward trail into travel order and fills in the running coefficients."""
        bends = tuple(reversed(backward_bends))
        # Each piece was recorded as (far end, near end, class) while walking backwards.
        forward = list(reversed(backward_pieces))
        segments: List[LineSegment] = []
        coeff = Fraction(1)
        bend_iter = iter(bends)
        previous_class: Optional[ClassExponent] = None
        for far, near, klass in forward:
            if previous_class is not None and klass.grade != previous_class.grade:
                coeff *= next(bend_iter).coeff
            segments.append(LineSegment(far, near, klass, coeff))
            previous_class = klass
        endpoint = segments[-1].end if segments else None
        return BrokenLine(endpoint, asymptote, tuple(segments), bends)

    def _for_class(self, u: RatPoint, klass: ClassExponent) -> Tuple[List[BrokenLine], Set[ClassExponent]]:
        met: Set[ClassExponent] = set()
        lines = self.search(u, klass, met=met)
        for line in lines:
            if len(line.bends) > self.N:
                logger.warning(f"⚠️ [{self.__class__.__name__}] Broken line with {len(line.bends)} bends at budget {self.N}")
        return lines, met

    async def _search_round(self, u: RatPoint, classes: List[ClassExponent]) -> List[Tuple[List[BrokenLine], Set]]:
        # Pure Python under the GIL: the pool fixes the merge order, it does not add speed.
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            tasks = [loop.run_in_executor(pool, self._for_class, u, k) for k in classes]
            results = await asyncio.gather(*tasks, return_exceptions=True)
        for klass, result in zip(classes, results):
            if isinstance(result, BaseException):
                logger.error(f"❌ [{self.__class__.__name__}] Search for class {klass} failed: {result}", exc_info=result)
                raise result
        return results

    async def enumerate(self, u: RatPoint, classes: Optional[List[ClassExponent]] = None,
                        extra: Iterable[ClassExponent] = ()) -> List[BrokenLine]:
        """
        All broken lines ending at u. The transported classes miss lines that reach u
        through a cut at a lower grade than around the singularity, so classes met at
        bends on the endpoint's side of every cut are searched too, until nothing new turns up.
        """
        validate_endpoint(self.diagram, u)
        pending = set(classes if classes is not None else candidate_classes(self.diagram, u, self.N))
        pending.update(e for e in extra if 1 <= e.grade <= self.N and not e.m.is_zero())
        searched: Set[ClassExponent] = set()
        lines: List[BrokenLine] = []
        for round_no in range(CANDIDATE_ROUNDS):
            batch = sorted(pending - searched, key=lambda e: e.sort_key())
            if not batch:
                break
            logger.info(f"➡️ [{self.__class__.__name__}] Round {round_no}: searching {len(batch)} classes at {u}, budget {self.N}")
            searched.update(batch)
            for found, met in await self._search_round(u, batch):
                lines.extend(found)
                pending.update(e for e in met if 1 <= e.grade <= self.N)
        else:
            if pending - searched:
                logger.warning(f"⚠️ [{self.__class__.__name__}] {len(pending - searched)} classes left unsearched "
                               f"at {u} after {CANDIDATE_ROUNDS} rounds")
        return sorted(lines, key=lambda l: l.sort_key())


def enumerate_broken_lines(diagram: ScatteringDiagram, u: RatPoint, N: int,
                           threads: int = DEFAULT_THREADS) -> List[BrokenLine]:
    return asyncio.run(BrokenLineSearch(diagram, N, threads).enumerate(u))


def n_trop(diagram: ScatteringDiagram, u: RatPoint, beta: ClassExponent, N: Optional[int] = None) -> Fraction:
    """Weighted count of broken lines ending at u with class beta."""
    N = diagram.order if N is None else N
    if beta.grade > N or beta.grade < 1:
        return Fraction(0)
    validate_endpoint(diagram, u)
    lines, _met = BrokenLineSearch(diagram, N, threads=1)._for_class(u, beta)
    return sum((l.weight for l in lines), Fraction(0))
